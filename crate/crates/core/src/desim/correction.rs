//! Pauli corrections that turn precomputed answers into live ones.
//!
//! After a prover has run its Clifford unitary `U` on questions `q` and the
//! corrections so far `R_prev`, the live run on `q̃` differs by the Pauli
//! `R = U (X_{q⊕q̃} ⊗ R_prev) U†`. Its X part on the measured qubits flips
//! the precomputed outcome into the live one.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::boolcircuit::BoolCircuit;
use crate::clifford::{CliffordCircuit, CliffordTableau};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::protocol::LocalHistory;

/// `R_i^r = U (X_{q⊕q̃} ⊗ R_prev) U†`, question qubits first.
pub fn correction_update(
    u: &CliffordCircuit,
    q: &BitString,
    q_tilde: &BitString,
    r_prev: &PauliOperator,
) -> Result<PauliOperator> {
    let x = correction_input(u.arity(), q, q_tilde, r_prev)?;
    u.conjugate(&x)
}

/// Same as [`correction_update`] with a compiled tableau of `U`.
pub fn correction_update_tableau(
    u: &CliffordTableau,
    q: &BitString,
    q_tilde: &BitString,
    r_prev: &PauliOperator,
) -> Result<PauliOperator> {
    let x = correction_input(u.arity(), q, q_tilde, r_prev)?;
    u.conjugate(&x)
}

fn correction_input(
    arity: usize,
    q: &BitString,
    q_tilde: &BitString,
    r_prev: &PauliOperator,
) -> Result<PauliOperator> {
    if arity != q.len() + r_prev.num_qubits() {
        return Err(Error::Dimension {
            expected: q.len() + r_prev.num_qubits(),
            found: arity,
        });
    }
    Ok(PauliOperator::x_correction(q, q_tilde)?.tensor(r_prev))
}

/// `ã` with `|ã⟩⟨ã| ⊗ I = R (|a⟩⟨a| ⊗ I) R†` on the measured qubits.
pub fn correct_answer(r: &PauliOperator, a: &BitString, measured: &[usize]) -> Result<BitString> {
    r.conjugate_projector(a, measured)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostStep {
    pub circuit: BoolCircuit,
    /// Classical-bit indices read by the circuit.
    pub inputs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionSource {
    /// The verifier's question for this round.
    Live,
    /// Computed locally: the outputs of these steps in reverse order, which
    /// is the order in which they were prepended to the register.
    Computed(Vec<PostStep>),
}

/// One unitary-then-measure step of a prover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubRound {
    pub question: QuestionSource,
    /// Question used in the precomputed interaction.
    pub hardcoded: BitString,
    /// Acts on the register after the question is prepended.
    pub unitary: CliffordCircuit,
    pub measured: Vec<usize>,
    /// Offset of this step's precomputed outcome in `λ`.
    pub lambda: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRound {
    pub subrounds: Vec<SubRound>,
    /// Classical-bit indices forming the answer.
    pub answer: Vec<usize>,
}

/// Response functions of one classical prover obtained from a Clifford
/// prover. The classical bits mirror the quantum prover's: corrected
/// outcomes and locally recomputed post-processing outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionProgram {
    pub initial_qubits: usize,
    pub rounds: Vec<CorrectionRound>,
}

impl CorrectionProgram {
    /// Pure response function: replays the session over `local`, whose
    /// questions fully determine the state, then answers `question`.
    pub fn answer(
        &self,
        lambda: &BitString,
        r: usize,
        local: &LocalHistory,
        question: &BitString,
    ) -> Result<BitString> {
        if local.len() != r {
            return Err(Error::width("local history rounds", r, local.len()));
        }
        let mut session = CorrectionSession::new(self, false);
        for (q, _) in &local.rounds {
            session.step(lambda, q)?;
        }
        session.step(lambda, question)
    }
}

/// Mutable state `R_i^r` of one classical prover during a run.
#[derive(Clone, Debug)]
pub struct CorrectionSession<'p> {
    program: &'p CorrectionProgram,
    tableaux: Option<Vec<Vec<CliffordTableau>>>,
    correction: PauliOperator,
    cbits: BitString,
    round: usize,
    trace: Vec<PauliOperator>,
}

impl<'p> CorrectionSession<'p> {
    /// With `compiled`, every unitary is compiled to a tableau up front.
    pub fn new(program: &'p CorrectionProgram, compiled: bool) -> Self {
        let tableaux = compiled.then(|| {
            program
                .rounds
                .iter()
                .map(|r| {
                    r.subrounds
                        .iter()
                        .map(|s| s.unitary.compile_tableau())
                        .collect()
                })
                .collect()
        });
        CorrectionSession {
            program,
            tableaux,
            correction: PauliOperator::identity(program.initial_qubits),
            cbits: BitString::zeros(0),
            round: 0,
            trace: Vec::new(),
        }
    }

    pub fn correction(&self) -> &PauliOperator {
        &self.correction
    }

    /// `R` after every step so far.
    pub fn trace(&self) -> &[PauliOperator] {
        &self.trace
    }

    pub fn step(&mut self, lambda: &BitString, question: &BitString) -> Result<BitString> {
        let round = self
            .program
            .rounds
            .get(self.round)
            .ok_or(Error::IndexOutOfRange {
                index: self.round,
                bound: self.program.rounds.len(),
                what: "correction rounds",
            })?;
        for (k, sub) in round.subrounds.iter().enumerate() {
            let live = match &sub.question {
                QuestionSource::Live => question.clone(),
                QuestionSource::Computed(steps) => {
                    let mut outputs = Vec::with_capacity(steps.len());
                    for st in steps {
                        let o = st.circuit.eval(&self.cbits.select(&st.inputs))?;
                        self.cbits.extend_from(&o);
                        outputs.push(o);
                    }
                    BitString::concat(outputs.iter().rev())
                }
            };
            if live.len() != sub.hardcoded.len() {
                return Err(Error::width("question", sub.hardcoded.len(), live.len()));
            }
            self.correction = match &self.tableaux {
                Some(t) => correction_update_tableau(
                    &t[self.round][k],
                    &sub.hardcoded,
                    &live,
                    &self.correction,
                )?,
                None => correction_update(&sub.unitary, &sub.hardcoded, &live, &self.correction)?,
            };
            debug_assert!(self.correction.is_hermitian());
            let end = sub.lambda + sub.measured.len();
            if end > lambda.len() {
                return Err(Error::width("shared randomness", end, lambda.len()));
            }
            let a = lambda.slice(sub.lambda..end);
            let corrected = correct_answer(&self.correction, &a, &sub.measured)?;
            self.cbits.extend_from(&corrected);
            self.trace.push(self.correction.clone());
        }
        self.round += 1;
        Ok(self.cbits.select(&round.answer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordGate::*;
    use crate::dense::DenseMatrix;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn equal_questions_give_identity() {
        let u = CliffordCircuit::new(2, vec![H(0), Cnot(0, 1), S(1)]).unwrap();
        let r = correction_update(&u, &bits("1"), &bits("1"), &PauliOperator::identity(1)).unwrap();
        assert!(r.is_identity() && r.phase_exp() == 0);
    }

    #[test]
    fn identity_circuit_keeps_the_input() {
        let u = CliffordCircuit::empty(3);
        let prev: PauliOperator = "-ZY".parse().unwrap();
        let r = correction_update(&u, &bits("1"), &bits("0"), &prev).unwrap();
        assert_eq!(r, "-XZY".parse().unwrap());
    }

    #[test]
    fn cnot_from_question_spreads_x() {
        let u = CliffordCircuit::new(2, vec![Cnot(0, 1)]).unwrap();
        let r = correction_update(&u, &bits("0"), &bits("1"), &PauliOperator::identity(1)).unwrap();
        assert_eq!(r, "XX".parse().unwrap());
        // U (X ⊗ I) = R U as matrices.
        let um = DenseMatrix::of_circuit(&u).unwrap();
        let lhs = um.mul(&DenseMatrix::of_pauli(&"XI".parse().unwrap()).unwrap());
        let rhs = DenseMatrix::of_pauli(&r).unwrap().mul(&um);
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }

    #[test]
    fn arity_mismatch() {
        let u = CliffordCircuit::empty(3);
        assert!(matches!(
            correction_update(&u, &bits("1"), &bits("0"), &PauliOperator::identity(1)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn corrected_answer_uses_x_part() {
        let r: PauliOperator = "XZY".parse().unwrap();
        assert_eq!(
            correct_answer(&r, &bits("000"), &[0, 1, 2]).unwrap(),
            bits("101")
        );
        assert_eq!(correct_answer(&r, &bits("1"), &[1]).unwrap(), bits("1"));
        assert_eq!(
            correct_answer(&PauliOperator::identity(2), &bits("01"), &[0, 1]).unwrap(),
            bits("01")
        );
    }

    #[test]
    fn sessions_agree_with_and_without_tableaux() {
        let program = CorrectionProgram {
            initial_qubits: 1,
            rounds: vec![
                CorrectionRound {
                    subrounds: vec![SubRound {
                        question: QuestionSource::Live,
                        hardcoded: bits("0"),
                        unitary: CliffordCircuit::new(2, vec![H(1), Cnot(0, 1)]).unwrap(),
                        measured: vec![1],
                        lambda: 0,
                    }],
                    answer: vec![0],
                },
                CorrectionRound {
                    subrounds: vec![SubRound {
                        question: QuestionSource::Live,
                        hardcoded: bits("1"),
                        unitary: CliffordCircuit::new(3, vec![Cnot(0, 2), S(2), H(2)]).unwrap(),
                        measured: vec![2],
                        lambda: 1,
                    }],
                    answer: vec![1],
                },
            ],
        };
        let lambda = bits("10");
        for q0 in ["0", "1"] {
            for q1 in ["0", "1"] {
                let mut a = CorrectionSession::new(&program, true);
                let mut b = CorrectionSession::new(&program, false);
                let x0 = a.step(&lambda, &bits(q0)).unwrap();
                assert_eq!(x0, b.step(&lambda, &bits(q0)).unwrap());
                let x1 = a.step(&lambda, &bits(q1)).unwrap();
                assert_eq!(x1, b.step(&lambda, &bits(q1)).unwrap());
                assert_eq!(a.trace(), b.trace());
                assert!(a.trace().iter().all(PauliOperator::is_hermitian));
                let mut local = LocalHistory::default();
                local.push(bits(q0), x0);
                assert_eq!(program.answer(&lambda, 1, &local, &bits(q1)).unwrap(), x1);
            }
        }
    }
}

//! Classical strategies equivalent to Clifford strategies.
//!
//! The shared randomness `λ` is the answer string of one interaction of the
//! delegated strategy `S′` on hard-coded questions. Each classical prover
//! then tracks its correction operator from its own live questions and
//! flips the precomputed outcomes accordingly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::clifford::CliffordCircuit;
use crate::desim::correction::{CorrectionProgram, CorrectionRound, QuestionSource, SubRound};
use crate::desim::delegate::{delegate_postprocessing, Delegated};
use crate::error::{Error, Result};
use crate::exec::{
    fixed_question_distribution, initial_dense, initial_stabilizer, ExecConfig, ProverSet,
    QuantumSession,
};
use crate::protocol::{LocalHistory, Protocol};
use crate::rng::SplitMix64;
use crate::strategy::{
    validate_model, ClassicalProver, ClassicalStrategy, Element, LambdaRow, QuantumStrategy,
    SharedRandomness,
};

/// One sampled interaction of `S′` on fixed questions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecomputedInteraction {
    pub questions: Vec<Vec<BitString>>,
    pub answers: Vec<Vec<BitString>>,
    pub backend: String,
}

impl PrecomputedInteraction {
    /// `λ`: all answers, round by round, prover by prover.
    pub fn encode(&self) -> BitString {
        BitString::concat(self.answers.iter().flatten())
    }
}

/// Runs `strategy` on the fixed `questions`, sampling every measurement.
pub fn sample_precomputed(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    questions: &[Vec<BitString>],
    rng: &mut SplitMix64,
    cfg: &ExecConfig,
) -> Result<PrecomputedInteraction> {
    let report = validate_model(strategy, protocol)?;
    if !report.all_unitary_then_measure() {
        return Err(Error::Strategy(
            "precomputed interactions need unitary-then-measure rounds; delegate post-processing first".into(),
        ));
    }
    if questions.len() != protocol.rounds() {
        return Err(Error::width(
            "hard-coded question rounds",
            protocol.rounds(),
            questions.len(),
        ));
    }
    for (r, qs) in questions.iter().enumerate() {
        if qs.len() != protocol.provers() {
            return Err(Error::width(
                format!("round {r} hard-coded questions"),
                protocol.provers(),
                qs.len(),
            ));
        }
        for (i, q) in qs.iter().enumerate() {
            if q.len() != protocol.question_width(r, i) {
                return Err(Error::width(
                    format!("round {r} prover {i} question"),
                    protocol.question_width(r, i),
                    q.len(),
                ));
            }
        }
    }
    let dense = cfg.uses_dense(strategy)?;
    let session_rng = rng.split();
    let answers = if dense {
        let init = initial_dense(strategy, cfg.dense_cap)?;
        play_fixed(
            &mut QuantumSession::new(strategy, init, session_rng, cfg.dense_cap),
            questions,
        )?
    } else {
        let init = initial_stabilizer(strategy)?;
        play_fixed(
            &mut QuantumSession::new(strategy, init, session_rng, cfg.dense_cap),
            questions,
        )?
    };
    Ok(PrecomputedInteraction {
        questions: questions.to_vec(),
        answers,
        backend: if dense { "dense" } else { "stabilizer" }.into(),
    })
}

fn play_fixed(
    provers: &mut dyn ProverSet,
    questions: &[Vec<BitString>],
) -> Result<Vec<Vec<BitString>>> {
    let k = questions.first().map_or(0, Vec::len);
    let mut locals = vec![LocalHistory::default(); k];
    let mut out = Vec::with_capacity(questions.len());
    for (r, qs) in questions.iter().enumerate() {
        let mut answers = Vec::with_capacity(qs.len());
        for (i, q) in qs.iter().enumerate() {
            answers.push(provers.answer(i, r, &locals[i], q)?);
        }
        for (i, (q, a)) in qs.iter().zip(&answers).enumerate() {
            locals[i].push(q.clone(), a.clone());
        }
        out.push(answers);
    }
    Ok(out)
}

/// The precomputed interaction as a source of shared randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precomputed {
    pub protocol: Protocol,
    pub strategy: QuantumStrategy,
    pub questions: Vec<Vec<BitString>>,
}

impl Precomputed {
    /// Exact distribution of `λ`.
    pub fn lambda_distribution(&self) -> Result<Vec<(BitString, f64)>> {
        let dist =
            fixed_question_distribution(&self.strategy, &self.questions, &ExecConfig::default())?;
        let mut out: BTreeMap<BitString, f64> = BTreeMap::new();
        for (answers, p) in dist {
            *out.entry(BitString::concat(answers.iter().flatten()))
                .or_insert(0.0) += p;
        }
        Ok(out.into_iter().collect())
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Result<BitString> {
        Ok(sample_precomputed(
            &self.strategy,
            &self.protocol,
            &self.questions,
            rng,
            &ExecConfig::default(),
        )?
        .encode())
    }
}

/// Questions used in the precomputed interaction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Hardcoded {
    /// All zeros.
    #[default]
    Zeros,
    /// One question per round and prover of the original protocol; the
    /// delegated sub-rounds use zeros.
    Protocol(Vec<Vec<BitString>>),
    /// One question per sub-round and prover of the delegated protocol.
    Delegated(Vec<Vec<BitString>>),
}

/// How the emitted strategy represents `λ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LambdaForm {
    /// Sample by running the precomputed interaction.
    #[default]
    Precomputed,
    /// An explicit table of the exact distribution.
    Table,
}

#[derive(Clone, Debug, Default)]
pub struct DesimOptions {
    pub hardcoded: Hardcoded,
    pub lambda: LambdaForm,
}

/// Output of [`declifford_with`].
#[derive(Clone, Debug)]
pub struct Desimulated {
    pub strategy: ClassicalStrategy,
    pub delegated: Delegated,
    /// Hard-coded questions per sub-round of the delegated protocol.
    pub questions: Vec<Vec<BitString>>,
}

/// Classical strategy equivalent to the Clifford strategy `strategy`.
pub fn declifford(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    hardcoded: &Hardcoded,
) -> Result<ClassicalStrategy> {
    let opts = DesimOptions {
        hardcoded: hardcoded.clone(),
        ..DesimOptions::default()
    };
    Ok(declifford_with(strategy, protocol, &opts)?.strategy)
}

/// First element outside the Clifford model, as an error.
pub(crate) fn require_clifford(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    provers: &[usize],
) -> Result<()> {
    let report = validate_model(strategy, protocol)?;
    for &i in provers {
        if report.provers[i].clifford_only {
            continue;
        }
        for (r, round) in strategy.provers[i].rounds.iter().enumerate() {
            if let Some(e) = round.elements.iter().position(|e| !e.is_clifford_model()) {
                return Err(Error::ModelViolation {
                    prover: i,
                    round: r,
                    element: e,
                    reason: "only Clifford-model provers can be desimulated".into(),
                });
            }
        }
    }
    Ok(())
}

pub fn declifford_with(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    opts: &DesimOptions,
) -> Result<Desimulated> {
    let all: Vec<usize> = (0..protocol.provers()).collect();
    require_clifford(strategy, protocol, &all)?;
    let delegated = delegate_postprocessing(protocol, strategy)?;
    let questions = hardcoded_questions(&delegated, &opts.hardcoded)?;
    let programs = correction_programs(strategy, &delegated, &questions, &all)?;
    let precomputed = Precomputed {
        protocol: delegated.protocol.clone(),
        strategy: delegated.strategy.clone(),
        questions: questions.clone(),
    };
    let shared = match opts.lambda {
        LambdaForm::Precomputed => SharedRandomness::Precomputed(Box::new(precomputed)),
        LambdaForm::Table => SharedRandomness::Table(
            precomputed
                .lambda_distribution()?
                .into_iter()
                .map(|(lambda, p)| LambdaRow { lambda, p })
                .collect(),
        ),
    };
    Ok(Desimulated {
        strategy: ClassicalStrategy {
            shared,
            provers: programs
                .into_iter()
                .map(ClassicalProver::Correction)
                .collect(),
        },
        delegated,
        questions,
    })
}

/// Hard-coded questions for every sub-round of the delegated protocol.
pub fn hardcoded_questions(
    delegated: &Delegated,
    hardcoded: &Hardcoded,
) -> Result<Vec<Vec<BitString>>> {
    let g_s = &delegated.protocol;
    let zeros = |t: usize| -> Vec<BitString> {
        (0..g_s.provers())
            .map(|i| BitString::zeros(g_s.question_width(t, i)))
            .collect()
    };
    let out: Vec<Vec<BitString>> = match hardcoded {
        Hardcoded::Zeros => (0..g_s.rounds()).map(zeros).collect(),
        Hardcoded::Protocol(qs) => {
            if qs.len() != delegated.original.rounds() {
                return Err(Error::width(
                    "hard-coded question rounds",
                    delegated.original.rounds(),
                    qs.len(),
                ));
            }
            delegated
                .subrounds
                .iter()
                .enumerate()
                .map(|(t, &(r, s))| if s == 0 { qs[r].clone() } else { zeros(t) })
                .collect()
        }
        Hardcoded::Delegated(qs) => qs.clone(),
    };
    if out.len() != g_s.rounds() {
        return Err(Error::width(
            "hard-coded question rounds",
            g_s.rounds(),
            out.len(),
        ));
    }
    for (t, qs) in out.iter().enumerate() {
        if qs.len() != g_s.provers() {
            return Err(Error::width(
                "hard-coded questions per round",
                g_s.provers(),
                qs.len(),
            ));
        }
        for (i, q) in qs.iter().enumerate() {
            if q.len() != g_s.question_width(t, i) {
                return Err(Error::width(
                    format!("hard-coded question of sub-round {t} prover {i}"),
                    g_s.question_width(t, i),
                    q.len(),
                ));
            }
        }
    }
    Ok(out)
}

/// Offset in `λ` of each sub-round's answer of each prover.
pub(crate) fn lambda_offsets(g_s: &Protocol) -> Vec<Vec<usize>> {
    let mut at = 0;
    (0..g_s.rounds())
        .map(|t| {
            (0..g_s.provers())
                .map(|i| {
                    at += g_s.answer_width(t, i);
                    at - g_s.answer_width(t, i)
                })
                .collect()
        })
        .collect()
}

/// Correction programs for the listed provers.
pub(crate) fn correction_programs(
    strategy: &QuantumStrategy,
    delegated: &Delegated,
    questions: &[Vec<BitString>],
    provers: &[usize],
) -> Result<Vec<CorrectionProgram>> {
    let offsets = lambda_offsets(&delegated.protocol);
    let mut out = Vec::with_capacity(provers.len());
    for &i in provers {
        let mut d = strategy.shares[i].len();
        let mut rounds = Vec::with_capacity(delegated.original.rounds());
        for r in 0..delegated.original.rounds() {
            let mut subrounds = Vec::new();
            for t in delegated.subrounds_of(r) {
                let (_, s) = delegated.subrounds[t];
                let seg = &delegated.segments[i][r][s];
                let question = if s == 0 {
                    QuestionSource::Live
                } else {
                    QuestionSource::Computed(delegated.segments[i][r][s - 1].post.clone())
                };
                d += delegated.protocol.question_width(t, i);
                let gates = seg
                    .gates
                    .iter()
                    .map(|e| match e {
                        Element::Gate(g) => Ok(*g),
                        other => Err(Error::Unsupported(format!(
                            "{other:?} in a Clifford prover"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                subrounds.push(SubRound {
                    question,
                    hardcoded: questions[t][i].clone(),
                    unitary: CliffordCircuit::new(d, gates)?,
                    measured: seg.measured.clone(),
                    lambda: offsets[t][i],
                });
            }
            rounds.push(CorrectionRound {
                subrounds,
                answer: strategy.provers[i].rounds[r].answer.clone(),
            });
        }
        out.push(CorrectionProgram {
            initial_qubits: strategy.shares[i].len(),
            rounds,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordGate::*;
    use crate::distribution::tv_distance;
    use crate::exec::exact_history_distribution;
    use crate::strategy::{ProverProgram, RoundProgram, SharedState, Strategy};

    const CHSH: &str = r#"{"K":2,"R":1,"s":1,"t":1,
        "pi":[[{"history_key":"","row":[{"questions":"00","p":0.25},{"questions":"01","p":0.25},
            {"questions":"10","p":0.25},{"questions":"11","p":0.25}]}]],
        "v":{"circuit":{"inputs":4,"gates":[{"and":[0,1]},{"xor":[2,3,4]},{"not":5}],"outputs":[6]}}}"#;

    fn bell_clifford() -> QuantumStrategy {
        // Prover 0 measures Z or X by question; prover 1 measures Z or X by
        // question through a controlled Hadamard built from Cliffords only
        // on the question qubit (CNOT, H).
        let round = |elements| RoundProgram {
            elements,
            answer: vec![0],
        };
        QuantumStrategy {
            shared_state: SharedState::stabilizer(vec![
                "XX".parse().unwrap(),
                "ZZ".parse().unwrap(),
            ])
            .unwrap(),
            shares: vec![vec![0], vec![1]],
            provers: vec![
                ProverProgram {
                    unrestricted: false,
                    rounds: vec![round(vec![
                        Element::Gate(H(0)),
                        Element::Gate(Cnot(0, 1)),
                        Element::Gate(H(1)),
                        Element::Measure(vec![1]),
                    ])],
                },
                ProverProgram {
                    unrestricted: false,
                    rounds: vec![round(vec![
                        Element::Gate(Cnot(0, 1)),
                        Element::Measure(vec![1]),
                    ])],
                },
            ],
        }
    }

    #[test]
    fn single_prover_identity_answers_zero() {
        let p = Protocol::from_json(
            r#"{"K":1,"R":1,"s":1,"t":1,
            "pi":[[{"history_key":"","row":[{"questions":"0","p":0.5},{"questions":"1","p":0.5}]}]],
            "v":{"truth_table":"1111"}}"#,
        )
        .unwrap();
        let s = QuantumStrategy {
            shared_state: SharedState::zero(1),
            shares: vec![vec![0]],
            provers: vec![ProverProgram {
                unrestricted: false,
                rounds: vec![RoundProgram {
                    elements: vec![Element::Measure(vec![1])],
                    answer: vec![0],
                }],
            }],
        };
        let c = declifford(&s, &p, &Hardcoded::Zeros).unwrap();
        let d = exact_history_distribution(&p, &Strategy::Classical(c), &ExecConfig::default())
            .unwrap();
        assert!(d
            .keys()
            .all(|h| h.rounds()[0].answers[0] == "0".parse().unwrap()));
    }

    #[test]
    fn chsh_clifford_is_reproduced() {
        let p = Protocol::from_json(CHSH).unwrap();
        let s = bell_clifford();
        let exact =
            exact_history_distribution(&p, &Strategy::Quantum(s.clone()), &ExecConfig::dense())
                .unwrap();
        for lambda in [LambdaForm::Precomputed, LambdaForm::Table] {
            for hard in ["00", "01", "10", "11"] {
                let hq: Vec<BitString> = hard
                    .chars()
                    .map(|c| c.to_string().parse().unwrap())
                    .collect();
                let opts = DesimOptions {
                    hardcoded: Hardcoded::Protocol(vec![hq]),
                    lambda,
                };
                let c = declifford_with(&s, &p, &opts).unwrap().strategy;
                let d =
                    exact_history_distribution(&p, &Strategy::Classical(c), &ExecConfig::default())
                        .unwrap();
                assert!(tv_distance(&exact, &d) < 1e-12, "hard-coded {hard}");
            }
        }
    }

    #[test]
    fn non_clifford_prover_is_rejected() {
        let p = Protocol::from_json(CHSH).unwrap();
        let mut s = bell_clifford();
        s.provers[1].unrestricted = true;
        s.provers[1].rounds[0].elements.insert(0, Element::T(1));
        let err = declifford(&s, &p, &Hardcoded::Zeros).unwrap_err();
        assert!(matches!(
            err,
            Error::ModelViolation {
                prover: 1,
                element: 0,
                ..
            }
        ));
    }

    #[test]
    fn sampled_interaction_of_bell_pair_agrees() {
        let p = Protocol::from_json(CHSH).unwrap();
        let mut s = bell_clifford();
        for prog in &mut s.provers {
            prog.rounds[0].elements = vec![Element::Measure(vec![1])];
        }
        let zeros = vec![vec!["0".parse().unwrap(), "0".parse().unwrap()]];
        let mut rng = SplitMix64::new(5);
        for _ in 0..50 {
            let x = sample_precomputed(&s, &p, &zeros, &mut rng, &ExecConfig::default()).unwrap();
            assert_eq!(x.answers[0][0], x.answers[0][1]);
            assert_eq!(x.backend, "stabilizer");
        }
    }
}

//! Dense checks of the identities behind the correction argument.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::clifford::{CliffordCircuit, CliffordGate};
use crate::dense::{pure_state_frobenius, DenseMatrix, DenseState};
use crate::desim::correction::{correct_answer, correction_update};
use crate::error::{Error, Result};
use crate::exec::{initial_dense, run_round, Branch, ExecConfig, Mode, PRUNE};
use crate::pauli::PauliOperator;
use crate::strategy::{round_is_unitary_then_measure, Element, QuantumStrategy};

/// Largest deviations found by [`verify_state_link`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateLink {
    /// `‖ρ̃_{ã} − R ρ_a R†‖_F`, maximized over branches.
    pub state: f64,
    /// `‖U (X ⊗ R_prev) − R U‖_max`, maximized over provers and rounds.
    pub commutation: f64,
    /// `|Pr[ã | q̃] − Pr[a | q]|` for every prefix of rounds.
    pub probability: f64,
    /// Branches compared.
    pub branches: usize,
}

struct ProverRounds {
    unitaries: Vec<CliffordCircuit>,
    measured: Vec<Vec<usize>>,
}

fn unitary_rounds(
    strategy: &QuantumStrategy,
    questions: &[Vec<BitString>],
    rounds: usize,
) -> Result<Vec<ProverRounds>> {
    let mut out = Vec::with_capacity(strategy.provers.len());
    for (i, prog) in strategy.provers.iter().enumerate() {
        let mut d = strategy.shares[i].len();
        let mut cbits = 0;
        let mut pr = ProverRounds {
            unitaries: Vec::new(),
            measured: Vec::new(),
        };
        for (r, round) in prog.rounds.iter().take(rounds).enumerate() {
            if !round_is_unitary_then_measure(round, cbits) {
                return Err(Error::Strategy(format!(
                    "prover {i} round {r} is not unitary-then-measure"
                )));
            }
            d += questions[r][i].len();
            let mut gates: Vec<CliffordGate> = Vec::new();
            let mut measured = Vec::new();
            for e in &round.elements {
                match e {
                    Element::Gate(g) => gates.push(*g),
                    Element::Measure(qs) => measured.extend_from_slice(qs),
                    _ => unreachable!("checked above"),
                }
            }
            cbits += measured.len();
            pr.unitaries.push(CliffordCircuit::new(d, gates)?);
            pr.measured.push(measured);
        }
        out.push(pr);
    }
    Ok(out)
}

type Leaves = BTreeMap<Vec<Vec<BitString>>, Branch<DenseState>>;

fn leaves(
    strategy: &QuantumStrategy,
    questions: &[Vec<BitString>],
    cfg: &ExecConfig,
) -> Result<Leaves> {
    let init = initial_dense(strategy, cfg.dense_cap)?;
    let mut layer: Leaves = BTreeMap::new();
    layer.insert(Vec::new(), Branch::new(init, &strategy.shares));
    for (r, qs) in questions.iter().enumerate() {
        let mut next = BTreeMap::new();
        for (prefix, b) in layer {
            for (answers, mut group) in
                run_round(strategy, vec![b], r, qs, &mut Mode::Exact, cfg.dense_cap)?
            {
                // Every measured bit is part of the answer, so branches with
                // equal answers are the same branch.
                debug_assert_eq!(group.len(), 1);
                let mut key = prefix.clone();
                key.push(answers);
                next.insert(key, group.swap_remove(0));
            }
        }
        layer = next;
    }
    Ok(layer)
}

/// Checks `ρ_{q̃,ã,r} = (⊗R_i^r) ρ_{q,a,r} (⊗R_i^r)†` for every outcome `a`
/// of the first `rounds` rounds, together with the commutation identity and
/// the equality of outcome probabilities. Dense backend only.
pub fn verify_state_link(
    strategy: &QuantumStrategy,
    q: &[Vec<BitString>],
    q_tilde: &[Vec<BitString>],
    rounds: usize,
    cfg: &ExecConfig,
) -> Result<StateLink> {
    if q.len() < rounds || q_tilde.len() < rounds {
        return Err(Error::width(
            "question rounds",
            rounds,
            q.len().min(q_tilde.len()),
        ));
    }
    let k = strategy.provers.len();
    for r in 0..rounds {
        for (what, qs) in [("questions", &q[r]), ("alternative questions", &q_tilde[r])] {
            if qs.len() != k {
                return Err(Error::width(format!("round {r} {what}"), k, qs.len()));
            }
        }
        for i in 0..k {
            if q[r][i].len() != q_tilde[r][i].len() {
                return Err(Error::width(
                    format!("round {r} prover {i} question"),
                    q[r][i].len(),
                    q_tilde[r][i].len(),
                ));
            }
        }
    }
    let plan = unitary_rounds(strategy, q, rounds)?;
    let mut link = StateLink::default();

    // R_i^r for every prover and round.
    let mut corrections: Vec<Vec<PauliOperator>> = Vec::with_capacity(k);
    for (i, pr) in plan.iter().enumerate() {
        let mut prev = PauliOperator::identity(strategy.shares[i].len());
        let mut rs = Vec::with_capacity(rounds);
        for (r, u) in pr.unitaries.iter().enumerate() {
            let next = correction_update(u, &q[r][i], &q_tilde[r][i], &prev)?;
            if !next.is_hermitian() {
                return Err(Error::Strategy(format!(
                    "correction of prover {i} round {r} is not Hermitian"
                )));
            }
            if u.arity() <= cfg.dense_cap {
                let input = PauliOperator::x_correction(&q[r][i], &q_tilde[r][i])?.tensor(&prev);
                let um = DenseMatrix::of_circuit(u)?;
                let lhs = um.mul(&DenseMatrix::of_pauli(&input)?);
                let rhs = DenseMatrix::of_pauli(&next)?.mul(&um);
                link.commutation = link.commutation.max(lhs.max_diff(&rhs));
            }
            rs.push(next.clone());
            prev = next;
        }
        corrections.push(rs);
    }

    for p in 1..=rounds {
        let live = leaves(strategy, &q[..p], cfg)?;
        let alt = leaves(strategy, &q_tilde[..p], cfg)?;
        for (answers, branch) in &live {
            let mut corrected = Vec::with_capacity(p);
            for (r, block) in answers.iter().enumerate() {
                let row = block
                    .iter()
                    .enumerate()
                    .map(|(i, a)| correct_answer(&corrections[i][r], a, &plan[i].measured[r]))
                    .collect::<Result<Vec<_>>>()?;
                corrected.push(row);
            }
            let Some(other) = alt.get(&corrected) else {
                link.probability = link.probability.max(branch.weight);
                link.state = link.state.max(f64::INFINITY);
                continue;
            };
            link.probability = link.probability.max((branch.weight - other.weight).abs());
            if p == rounds && branch.weight > PRUNE {
                let mut moved = branch.state.clone();
                moved.apply_pauli(&global_correction(branch, &corrections, p - 1)?)?;
                link.state = link.state.max(pure_state_frobenius(&moved, &other.state));
                link.branches += 1;
            }
        }
        // Outcomes of the alternative run that no live outcome maps to.
        let mapped: f64 = live
            .keys()
            .filter_map(|a| {
                let c: Vec<Vec<BitString>> = a
                    .iter()
                    .enumerate()
                    .map(|(r, block)| {
                        block
                            .iter()
                            .enumerate()
                            .map(|(i, x)| {
                                correct_answer(&corrections[i][r], x, &plan[i].measured[r]).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                alt.get(&c).map(|b| b.weight)
            })
            .sum();
        let alt_total: f64 = alt.values().map(|b| b.weight).sum();
        link.probability = link.probability.max((alt_total - mapped).abs());
    }
    Ok(link)
}

/// `⊗_i R_i^r` placed on each prover's global qubits.
fn global_correction(
    branch: &Branch<DenseState>,
    corrections: &[Vec<PauliOperator>],
    r: usize,
) -> Result<PauliOperator> {
    let n = branch.state.num_qubits();
    let (mut x, mut z) = (BitString::zeros(n), BitString::zeros(n));
    let mut phase = 0u8;
    for (reg, rs) in branch.registers.iter().zip(corrections) {
        let rop = &rs[r];
        if rop.num_qubits() != reg.qubits.len() {
            return Err(Error::Dimension {
                expected: reg.qubits.len(),
                found: rop.num_qubits(),
            });
        }
        for (j, &g) in reg.qubits.iter().enumerate() {
            x.set(g, rop.x(j));
            z.set(g, rop.z(j));
        }
        phase = (phase + rop.phase_exp()) & 3;
    }
    PauliOperator::from_parts(x, z, phase)
}

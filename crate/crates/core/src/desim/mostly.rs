//! Non-local games in which all provers but one are Clifford.
//!
//! The Clifford provers measure their whole register on hard-coded
//! questions; their outcomes form `λ`. They answer live questions by
//! correcting `λ`, while the remaining prover samples its answer from the
//! conditional distribution of its outcome given the Clifford outcomes,
//! computed on the dense backend.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::clifford::CliffordCircuit;
use crate::desim::correction::{CorrectionProgram, CorrectionRound, QuestionSource, SubRound};
use crate::desim::declifford::{declifford, require_clifford, Hardcoded};
use crate::error::{Error, Result};
use crate::exec::{fixed_question_distribution, BackendChoice, ExecConfig};
use crate::protocol::{History, Protocol};
use crate::strategy::{
    measure_all_final, validate_model, ClassicalProver, ClassicalStrategy, Element, LambdaRow,
    QuantumStrategy, SharedRandomness,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub lambda: BitString,
    pub question: BitString,
    pub answers: Vec<(BitString, f64)>,
}

/// A randomized prover answering from a table of conditionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalProgram {
    pub rows: Vec<ConditionalRow>,
}

impl ConditionalProgram {
    pub fn distribution(
        &self,
        lambda: &BitString,
        r: usize,
        question: &BitString,
    ) -> Result<Vec<(BitString, f64)>> {
        if r != 0 {
            return Err(Error::Unsupported(
                "conditional provers play a single round".into(),
            ));
        }
        self.rows
            .iter()
            .find(|row| &row.lambda == lambda && &row.question == question)
            .map(|row| row.answers.clone())
            .ok_or_else(|| Error::MissingRow {
                round: r,
                key: format!("{}/{}", lambda.to_hex(), question.to_hex()),
            })
    }
}

/// Classical strategy equivalent to a single-round strategy in which at
/// most one prover is outside the Clifford model.
pub fn declifford_mostly(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    hardcoded: &Hardcoded,
) -> Result<ClassicalStrategy> {
    if protocol.rounds() != 1 {
        return Err(Error::Unsupported(
            "only single-round games are handled".into(),
        ));
    }
    let report = validate_model(strategy, protocol)?;
    let free: Vec<usize> = (0..protocol.provers())
        .filter(|&i| !report.provers[i].clifford_only)
        .collect();
    let u = match free.as_slice() {
        [] => return declifford(strategy, protocol, hardcoded),
        [u] => *u,
        _ => {
            return Err(Error::Strategy(format!(
                "{} provers are outside the Clifford model, at most one is allowed",
                free.len()
            )))
        }
    };
    let clifford: Vec<usize> = (0..protocol.provers()).filter(|&i| i != u).collect();
    require_clifford(strategy, protocol, &clifford)?;
    for &i in &clifford {
        if !report.provers[i].unitary_then_measure[0] {
            return Err(Error::Unsupported(format!(
                "prover {i} must apply one Clifford unitary and then measure"
            )));
        }
    }
    let hq: Vec<BitString> = match hardcoded {
        Hardcoded::Zeros => (0..protocol.provers())
            .map(|i| BitString::zeros(protocol.question_width(0, i)))
            .collect(),
        Hardcoded::Protocol(qs) | Hardcoded::Delegated(qs) => {
            let q = qs
                .first()
                .ok_or(Error::width("hard-coded question rounds", 1, 0))?;
            if q.len() != protocol.provers() {
                return Err(Error::width(
                    "hard-coded questions",
                    protocol.provers(),
                    q.len(),
                ));
            }
            q.clone()
        }
    };

    let measure_all = measure_all_final(strategy, protocol, &clifford)?;
    // Every Clifford prover answers with its whole register; λ lists them in
    // prover order.
    let mut full = measure_all.clone();
    for &i in &clifford {
        let d = report.provers[i].layout[0].qubits_after;
        full.provers[i].rounds[0].answer = (0..d).collect();
    }

    let cfg = ExecConfig {
        backend: BackendChoice::Dense,
        ..ExecConfig::default()
    };
    let mut lambda_dist: BTreeMap<BitString, f64> = BTreeMap::new();
    let mut rows = Vec::new();
    let live_questions = question_support(protocol, u)?;
    for (n, q_u) in live_questions.iter().enumerate() {
        let mut qs = hq.clone();
        qs[u] = q_u.clone();
        let joint = fixed_question_distribution(&full, &[qs], &cfg)?;
        let mut by_lambda: BTreeMap<BitString, Vec<(BitString, f64)>> = BTreeMap::new();
        for (answers, p) in joint {
            let lambda = BitString::concat(clifford.iter().map(|&i| &answers[0][i]));
            by_lambda
                .entry(lambda)
                .or_default()
                .push((answers[0][u].clone(), p));
        }
        for (lambda, answers) in by_lambda {
            let total: f64 = answers.iter().map(|(_, p)| p).sum();
            if n == 0 {
                lambda_dist.insert(lambda.clone(), total);
            }
            rows.push(ConditionalRow {
                lambda,
                question: q_u.clone(),
                answers: answers.into_iter().map(|(a, p)| (a, p / total)).collect(),
            });
        }
    }

    let mut offset = 0;
    let mut provers = Vec::with_capacity(protocol.provers());
    for (i, hardcoded_q) in hq.iter().enumerate() {
        if i == u {
            provers.push(ClassicalProver::Conditional(ConditionalProgram {
                rows: rows.clone(),
            }));
            continue;
        }
        let d = report.provers[i].layout[0].qubits_after;
        let gates = strategy.provers[i].rounds[0]
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Gate(g) => Some(*g),
                _ => None,
            })
            .collect();
        provers.push(ClassicalProver::Correction(CorrectionProgram {
            initial_qubits: strategy.shares[i].len(),
            rounds: vec![CorrectionRound {
                subrounds: vec![SubRound {
                    question: QuestionSource::Live,
                    hardcoded: hardcoded_q.clone(),
                    unitary: CliffordCircuit::new(d, gates)?,
                    measured: (0..d).collect(),
                    lambda: offset,
                }],
                answer: measure_all.provers[i].rounds[0].answer.clone(),
            }],
        }));
        offset += d;
    }
    Ok(ClassicalStrategy {
        shared: SharedRandomness::Table(
            lambda_dist
                .into_iter()
                .map(|(lambda, p)| LambdaRow { lambda, p })
                .collect(),
        ),
        provers,
    })
}

/// Questions prover `u` can receive in the first round.
fn question_support(protocol: &Protocol, u: usize) -> Result<Vec<BitString>> {
    let mut seen: Vec<BitString> = protocol
        .question_distribution(0, &History::new())?
        .into_iter()
        .map(|(qs, _)| qs[u].clone())
        .collect();
    seen.sort();
    seen.dedup();
    Ok(seen)
}

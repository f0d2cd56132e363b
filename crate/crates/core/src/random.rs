//! Random instances for tests and benchmarks.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::boolcircuit::{BoolCircuit, BoolGate};
use crate::clifford::{CliffordCircuit, CliffordGate};
use crate::dense::DenseState;
use crate::error::Result;
use crate::pauli::PauliOperator;
use crate::protocol::{Predicate, PredicateKind, Protocol, QuestionRule};
use crate::rng::SplitMix64;
use crate::stabilizer::StabilizerState;
use crate::strategy::{Element, ProverProgram, QuantumStrategy, RoundProgram, SharedState};

fn below(rng: &mut SplitMix64, n: usize) -> usize {
    rng.below(n as u64) as usize
}

fn range(rng: &mut SplitMix64, lo: usize, hi: usize) -> usize {
    lo + below(rng, hi - lo + 1)
}

pub fn random_bits(len: usize, rng: &mut SplitMix64) -> BitString {
    BitString::from_bools((0..len).map(|_| rng.next_bit()))
}

pub fn random_gate(n: usize, rng: &mut SplitMix64) -> CliffordGate {
    match if n < 2 { below(rng, 2) } else { below(rng, 3) } {
        0 => CliffordGate::H(below(rng, n)),
        1 => CliffordGate::S(below(rng, n)),
        _ => {
            let c = below(rng, n);
            let t = (c + 1 + below(rng, n - 1)) % n;
            CliffordGate::Cnot(c, t)
        }
    }
}

pub fn random_clifford_circuit(n: usize, gates: usize, rng: &mut SplitMix64) -> CliffordCircuit {
    let gs = (0..gates).map(|_| random_gate(n, rng)).collect();
    CliffordCircuit::new(n, gs).expect("gates drawn in range")
}

/// A Pauli operator with a uniformly random phase.
pub fn random_pauli(n: usize, rng: &mut SplitMix64) -> PauliOperator {
    let phase = below(rng, 4) as u8;
    PauliOperator::from_parts(random_bits(n, rng), random_bits(n, rng), phase)
        .expect("equal lengths")
}

/// Hermitian Pauli operator (phase `±1` up to the `Y` convention).
pub fn random_hermitian_pauli(n: usize, rng: &mut SplitMix64) -> PauliOperator {
    let mut p = random_pauli(n, rng);
    if !p.is_hermitian() {
        p.set_phase_exp((p.phase_exp() + 1) & 3);
    }
    p
}

/// Generators of a random stabilizer state.
pub fn random_stabilizer_generators(n: usize, rng: &mut SplitMix64) -> Vec<PauliOperator> {
    let mut s = StabilizerState::zero(n);
    let u = random_clifford_circuit(n, 4 * n * n + 8, rng);
    s.apply_circuit(&u).expect("arity matches");
    s.stabilizers().to_vec()
}

/// Shape of a random protocol.
#[derive(Clone, Copy, Debug)]
pub struct ProtocolShape {
    pub provers: usize,
    pub rounds: usize,
    pub max_question: usize,
    pub max_answer: usize,
    /// Most history bits a later round's questions may depend on.
    pub max_view: usize,
}

impl Default for ProtocolShape {
    fn default() -> Self {
        ProtocolShape {
            provers: 2,
            rounds: 1,
            max_question: 1,
            max_answer: 1,
            max_view: 2,
        }
    }
}

fn random_row(width: usize, rng: &mut SplitMix64) -> Vec<(BitString, f64)> {
    let count = range(rng, 1, 4.min(1 << width.min(4)));
    let mut picked: BTreeMap<BitString, f64> = BTreeMap::new();
    while picked.len() < count {
        picked.insert(random_bits(width, rng), 0.1 + rng.next_f64());
    }
    let total: f64 = picked.values().sum();
    picked.into_iter().map(|(q, w)| (q, w / total)).collect()
}

/// A random protocol. Later rounds read a few history bits, so question
/// distributions depend on earlier answers.
pub fn random_protocol(shape: &ProtocolShape, rng: &mut SplitMix64) -> Result<Protocol> {
    let (k, r) = (shape.provers, shape.rounds);
    let qw: Vec<Vec<usize>> = (0..r)
        .map(|_| (0..k).map(|_| range(rng, 1, shape.max_question)).collect())
        .collect();
    let aw: Vec<Vec<usize>> = (0..r)
        .map(|_| (0..k).map(|_| range(rng, 1, shape.max_answer)).collect())
        .collect();
    let mut visible = 0;
    let mut rules = Vec::with_capacity(r);
    for round in 0..r {
        let width: usize = qw[round].iter().sum();
        let view_len = shape.max_view.min(visible);
        let view: Vec<usize> = (0..view_len).map(|_| below(rng, visible)).collect();
        let mut rows = BTreeMap::new();
        for key in 0..1u64 << view_len {
            rows.insert(
                BitString::from_u64(key, view_len).to_hex(),
                random_row(width, rng),
            );
        }
        rules.push(QuestionRule::Table {
            view: Some(view),
            rows,
        });
        visible += width + aw[round].iter().sum::<usize>();
    }
    let view_len = visible.min(10);
    let view = if view_len == visible {
        None
    } else {
        let mut v: Vec<usize> = (0..visible).collect();
        for j in 0..view_len {
            v.swap(j, j + below(rng, visible - j));
        }
        v.truncate(view_len);
        Some(v)
    };
    let predicate = Predicate {
        view,
        kind: PredicateKind::TruthTable(random_bits(1 << view_len, rng)),
    };
    Protocol::new(k, qw, aw, rules, predicate)
}

/// Shape of a random Clifford strategy.
#[derive(Clone, Copy, Debug)]
pub struct StrategyShape {
    pub max_share: usize,
    pub max_gates: usize,
    /// Use a random dense shared state instead of a stabilizer state.
    pub dense: bool,
    /// Add mid-round measurements and post-processing.
    pub postprocessing: bool,
    /// Keep the whole register, questions included, within this many qubits
    /// where possible. Every prover keeps at least one qubit of the shared
    /// state, so callers needing a hard cap should check the result.
    pub qubit_budget: usize,
}

impl Default for StrategyShape {
    fn default() -> Self {
        StrategyShape {
            max_share: 4,
            max_gates: 40,
            dense: false,
            postprocessing: false,
            qubit_budget: usize::MAX,
        }
    }
}

fn random_postprocess(cbits: usize, rng: &mut SplitMix64) -> (BoolCircuit, Vec<usize>) {
    let inputs: Vec<usize> = (0..range(rng, 1, cbits.min(3)))
        .map(|_| below(rng, cbits))
        .collect();
    let n = inputs.len();
    let outputs = range(rng, 1, 2);
    let mut gates = Vec::new();
    for _ in 0..outputs {
        let a = below(rng, n + gates.len());
        let b = below(rng, n + gates.len());
        gates.push(match below(rng, 4) {
            0 => BoolGate::Xor(vec![a, b]),
            1 => BoolGate::And(vec![a, b]),
            2 => BoolGate::Or(vec![a, b]),
            _ => BoolGate::Not(a),
        });
    }
    let outs = (n..n + gates.len()).collect();
    (
        BoolCircuit::new(n, gates, outs).expect("wires in range"),
        inputs,
    )
}

fn distinct(d: usize, count: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut all: Vec<usize> = (0..d).collect();
    for j in 0..count {
        all.swap(j, j + below(rng, d - j));
    }
    all.truncate(count);
    all
}

/// A Clifford-model strategy for `protocol`.
pub fn random_clifford_strategy(
    protocol: &Protocol,
    shape: &StrategyShape,
    rng: &mut SplitMix64,
) -> Result<QuantumStrategy> {
    let k = protocol.provers();
    let questions: usize = (0..protocol.rounds())
        .map(|r| protocol.round_question_len(r))
        .sum();
    // Each round may add up to four post-processing outputs per prover.
    let extra = if shape.postprocessing {
        4 * k * protocol.rounds()
    } else {
        0
    };
    let room = shape.qubit_budget.saturating_sub(questions + extra).max(k);
    let mut sizes: Vec<usize> = (0..k).map(|_| range(rng, 1, shape.max_share)).collect();
    while sizes.iter().sum::<usize>() > room {
        let j = (0..k).max_by_key(|&j| sizes[j]).unwrap();
        sizes[j] -= 1;
    }
    let n: usize = sizes.iter().sum();
    let shared_state = if shape.dense {
        SharedState::Dense(DenseState::random(n, rng))
    } else {
        SharedState::stabilizer(random_stabilizer_generators(n, rng))?
    };
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..n {
        perm.swap(j, j + below(rng, n - j));
    }
    let mut shares = Vec::with_capacity(k);
    let mut at = 0;
    for &s in &sizes {
        shares.push(perm[at..at + s].to_vec());
        at += s;
    }

    let mut provers = Vec::with_capacity(k);
    for (i, &size) in sizes.iter().enumerate() {
        let mut d = size;
        let mut cbits = 0;
        let mut rounds = Vec::with_capacity(protocol.rounds());
        for r in 0..protocol.rounds() {
            d += protocol.question_width(r, i);
            let t = protocol.answer_width(r, i);
            let mut elements = Vec::new();
            let gates = |d: usize, rng: &mut SplitMix64, elements: &mut Vec<Element>| {
                let m = below(rng, shape.max_gates + 1);
                elements.extend((0..m).map(|_| Element::Gate(random_gate(d, rng))));
            };
            let answer = if shape.postprocessing && rng.next_bit() {
                let start = cbits;
                gates(d, rng, &mut elements);
                let first = distinct(d, range(rng, 1, d.min(2)), rng);
                cbits += first.len();
                elements.push(Element::Measure(first));
                let (circuit, inputs) = random_postprocess(cbits, rng);
                d += circuit.num_outputs();
                cbits += circuit.num_outputs();
                elements.push(Element::PostProcess { circuit, inputs });
                gates(d, rng, &mut elements);
                let second = distinct(d, range(rng, 1, d.min(2)), rng);
                cbits += second.len();
                elements.push(Element::Measure(second));
                if rng.next_bit() {
                    let (circuit, inputs) = random_postprocess(cbits, rng);
                    d += circuit.num_outputs();
                    cbits += circuit.num_outputs();
                    elements.push(Element::PostProcess { circuit, inputs });
                }
                (0..t).map(|_| start + below(rng, cbits - start)).collect()
            } else {
                gates(d, rng, &mut elements);
                elements.push(Element::Measure(distinct(d, t, rng)));
                let answer: Vec<usize> = (cbits..cbits + t).collect();
                cbits += t;
                answer
            };
            rounds.push(RoundProgram { elements, answer });
        }
        provers.push(ProverProgram {
            unrestricted: false,
            rounds,
        });
    }
    Ok(QuantumStrategy {
        shared_state,
        shares,
        provers,
    })
}

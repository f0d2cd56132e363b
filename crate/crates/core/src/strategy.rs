//! Quantum and classical strategies and the Clifford-model checks.
//!
//! A prover's local register starts as its share of the shared state. In
//! each round the question is written into fresh qubits that are prepended,
//! so question bit `j` is local qubit `j`. Post-processing outputs are also
//! prepended as fresh basis-state qubits, and appended to the prover's
//! classical bits. Element indices always refer to the register as it is
//! when the element runs. Measurements append their outcomes to the
//! classical bits; a round's answer lists classical-bit indices.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::boolcircuit::BoolCircuit;
use crate::clifford::CliffordGate;
use crate::dense::{c, check_unitary, DenseState, Mat2, Mat4, C64};
use crate::desim::correction::CorrectionProgram;
use crate::desim::declifford::Precomputed;
use crate::desim::mostly::ConditionalProgram;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::protocol::{LocalHistory, Protocol};
use crate::rng::SplitMix64;
use crate::stabilizer::StabilizerState;

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Gate(CliffordGate),
    T(usize),
    Tdg(usize),
    U1 {
        qubit: usize,
        matrix: RawMatrix,
    },
    U2 {
        qubits: [usize; 2],
        matrix: RawMatrix,
    },
    Measure(Vec<usize>),
    PostProcess {
        circuit: BoolCircuit,
        inputs: Vec<usize>,
    },
    Controlled {
        cbit: usize,
        gate: CliffordGate,
    },
}

impl Element {
    /// Whether the element belongs to the Clifford computational model.
    pub fn is_clifford_model(&self) -> bool {
        matches!(
            self,
            Element::Gate(_) | Element::Measure(_) | Element::PostProcess { .. }
        )
    }

    /// Whether a stabilizer backend can execute the element.
    pub fn is_stabilizer_simulable(&self) -> bool {
        !matches!(
            self,
            Element::T(_) | Element::Tdg(_) | Element::U1 { .. } | Element::U2 { .. }
        )
    }
}

pub(crate) fn matrix2(m: &RawMatrix) -> Mat2 {
    let e = |r: usize, k: usize| c(m[r][k][0], m[r][k][1]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub(crate) fn matrix4(m: &RawMatrix) -> Mat4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = c(m[r][k][0], m[r][k][1]);
        }
    }
    out
}

fn check_matrix(m: &RawMatrix, dim: usize) -> std::result::Result<(), String> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(format!("matrix must be {dim}x{dim}"));
    }
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|r| r.iter().map(|v| c(v[0], v[1])).collect())
        .collect();
    check_unitary(&rows).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawElement {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    T(usize),
    Tdg(usize),
    U1 {
        qubit: usize,
        matrix: RawMatrix,
    },
    U2 {
        qubits: [usize; 2],
        matrix: RawMatrix,
    },
    Measure(Vec<usize>),
    Postprocess {
        circuit: BoolCircuit,
        inputs: Vec<usize>,
    },
    Controlled {
        cbit: usize,
        gate: CliffordGate,
    },
}

impl RawElement {
    fn expand(self, out: &mut Vec<Element>) {
        use CliffordGate::*;
        let gates = |out: &mut Vec<Element>, gs: &[CliffordGate]| {
            out.extend(gs.iter().map(|&g| Element::Gate(g)))
        };
        match self {
            RawElement::H(q) => gates(out, &[H(q)]),
            RawElement::S(q) => gates(out, &[S(q)]),
            RawElement::Cnot(a, b) | RawElement::Cx(a, b) => gates(out, &[Cnot(a, b)]),
            RawElement::Cz(a, b) => gates(out, &[H(b), Cnot(a, b), H(b)]),
            RawElement::Sdg(q) => gates(out, &[S(q), S(q), S(q)]),
            RawElement::Z(q) => gates(out, &[S(q), S(q)]),
            RawElement::X(q) => gates(out, &[H(q), S(q), S(q), H(q)]),
            // Y ∝ XZ: Z first, then X.
            RawElement::Y(q) => gates(out, &[S(q), S(q), H(q), S(q), S(q), H(q)]),
            RawElement::T(q) => out.push(Element::T(q)),
            RawElement::Tdg(q) => out.push(Element::Tdg(q)),
            RawElement::U1 { qubit, matrix } => out.push(Element::U1 { qubit, matrix }),
            RawElement::U2 { qubits, matrix } => out.push(Element::U2 { qubits, matrix }),
            RawElement::Measure(qs) => out.push(Element::Measure(qs)),
            RawElement::Postprocess { circuit, inputs } => {
                out.push(Element::PostProcess { circuit, inputs })
            }
            RawElement::Controlled { cbit, gate } => out.push(Element::Controlled { cbit, gate }),
        }
    }

    fn from_element(e: Element) -> RawElement {
        match e {
            Element::Gate(CliffordGate::H(q)) => RawElement::H(q),
            Element::Gate(CliffordGate::S(q)) => RawElement::S(q),
            Element::Gate(CliffordGate::Cnot(a, b)) => RawElement::Cnot(a, b),
            Element::T(q) => RawElement::T(q),
            Element::Tdg(q) => RawElement::Tdg(q),
            Element::U1 { qubit, matrix } => RawElement::U1 { qubit, matrix },
            Element::U2 { qubits, matrix } => RawElement::U2 { qubits, matrix },
            Element::Measure(qs) => RawElement::Measure(qs),
            Element::PostProcess { circuit, inputs } => RawElement::Postprocess { circuit, inputs },
            Element::Controlled { cbit, gate } => RawElement::Controlled { cbit, gate },
        }
    }
}

/// One round of one prover: elements in order, then the answer as
/// classical-bit indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawRound", into = "RawRound")]
pub struct RoundProgram {
    pub elements: Vec<Element>,
    pub answer: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawRound {
    elements: Vec<RawElement>,
    answer: Vec<usize>,
}

impl From<RawRound> for RoundProgram {
    fn from(r: RawRound) -> Self {
        let mut elements = Vec::with_capacity(r.elements.len());
        for e in r.elements {
            e.expand(&mut elements);
        }
        RoundProgram {
            elements,
            answer: r.answer,
        }
    }
}

impl From<RoundProgram> for RawRound {
    fn from(r: RoundProgram) -> Self {
        RawRound {
            elements: r
                .elements
                .into_iter()
                .map(RawElement::from_element)
                .collect(),
            answer: r.answer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProverProgram {
    /// Allows non-Clifford gates and classically controlled gates.
    #[serde(default)]
    pub unrestricted: bool,
    pub rounds: Vec<RoundProgram>,
}

#[derive(Clone, Debug)]
pub enum SharedState {
    Stabilizer {
        generators: Vec<PauliOperator>,
        state: StabilizerState,
    },
    Dense(DenseState),
}

impl PartialEq for SharedState {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                SharedState::Stabilizer { generators: a, .. },
                SharedState::Stabilizer { generators: b, .. },
            ) => a == b,
            (SharedState::Dense(a), SharedState::Dense(b)) => a == b,
            _ => false,
        }
    }
}

impl SharedState {
    pub fn stabilizer(generators: Vec<PauliOperator>) -> Result<Self> {
        let state = StabilizerState::from_generators(&generators)?;
        Ok(SharedState::Stabilizer { generators, state })
    }

    /// `|0…0⟩` as a stabilizer state.
    pub fn zero(n: usize) -> Self {
        let generators = (0..n)
            .map(|j| PauliOperator::single(n, j, 'Z').unwrap())
            .collect();
        SharedState::Stabilizer {
            generators,
            state: StabilizerState::zero(n),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            SharedState::Stabilizer { state, .. } => state.num_qubits(),
            SharedState::Dense(d) => d.num_qubits(),
        }
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        match self {
            SharedState::Stabilizer { state, .. } => state.to_dense(),
            SharedState::Dense(d) => Ok(d.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawSharedState {
    Stabilizer {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<PauliOperator>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
    },
    Dense {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
    },
}

impl<'de> Deserialize<'de> for SharedState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawSharedState::deserialize(d)?;
        let read = |path: &str| {
            std::fs::read_to_string(path).map_err(|e| D::Error::custom(format!("{path}: {e}")))
        };
        match raw {
            RawSharedState::Stabilizer { generators, file } => match (generators, file) {
                (Some(g), None) => SharedState::stabilizer(g).map_err(D::Error::custom),
                (None, Some(f)) => {
                    let text = read(&f)?;
                    let state = StabilizerState::parse_text(&text)
                        .map_err(|e| D::Error::custom(format!("{f}: {e}")))?;
                    Ok(SharedState::Stabilizer {
                        generators: state.stabilizers().to_vec(),
                        state,
                    })
                }
                _ => Err(D::Error::custom(
                    "stabilizer state needs exactly one of `generators` or `file`",
                )),
            },
            RawSharedState::Dense { amplitudes, file } => match (amplitudes, file) {
                (Some(a), None) => {
                    let n = a.len().trailing_zeros() as usize;
                    if a.len() != 1 << n {
                        return Err(D::Error::custom("amplitude count must be a power of two"));
                    }
                    let amps = a.iter().map(|v| c(v[0], v[1])).collect();
                    DenseState::from_amplitudes(n, amps)
                        .map(SharedState::Dense)
                        .map_err(D::Error::custom)
                }
                (None, Some(f)) => {
                    let text = read(&f)?;
                    DenseState::parse_text(&text)
                        .map(SharedState::Dense)
                        .map_err(|e| D::Error::custom(format!("{f}: {e}")))
                }
                _ => Err(D::Error::custom(
                    "dense state needs exactly one of `amplitudes` or `file`",
                )),
            },
        }
    }
}

impl Serialize for SharedState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match self {
            SharedState::Stabilizer { generators, .. } => RawSharedState::Stabilizer {
                generators: Some(generators.clone()),
                file: None,
            },
            SharedState::Dense(d) => RawSharedState::Dense {
                amplitudes: Some(d.amplitudes().iter().map(|a| [a.re, a.im]).collect()),
                file: None,
            },
        };
        raw.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumStrategy {
    pub shared_state: SharedState,
    /// Global qubits of the shared state held by each prover, in local order.
    pub shares: Vec<Vec<usize>>,
    pub provers: Vec<ProverProgram>,
}

impl QuantumStrategy {
    /// Whether every element can run on a stabilizer backend.
    pub fn stabilizer_simulable(&self) -> bool {
        matches!(self.shared_state, SharedState::Stabilizer { .. })
            && self
                .provers
                .iter()
                .flat_map(|p| &p.rounds)
                .flat_map(|r| &r.elements)
                .all(Element::is_stabilizer_simulable)
    }
}

// ---------------------------------------------------------------------------
// Model validation

/// Register sizes around one round of one prover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundLayout {
    /// Local qubits before the question is prepended.
    pub qubits_before: usize,
    /// Local qubits after the round.
    pub qubits_after: usize,
    pub cbits_before: usize,
    pub cbits_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProverReport {
    pub clifford_only: bool,
    pub has_intermediate_measurement: bool,
    pub has_postprocessing: bool,
    pub has_controlled: bool,
    pub unrestricted: bool,
    pub unitary_then_measure: Vec<bool>,
    #[serde(skip)]
    pub layout: Vec<RoundLayout>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelReport {
    pub provers: Vec<ProverReport>,
}

impl ModelReport {
    pub fn all_clifford(&self) -> bool {
        self.provers.iter().all(|p| p.clifford_only)
    }

    pub fn all_unitary_then_measure(&self) -> bool {
        self.provers
            .iter()
            .all(|p| p.unitary_then_measure.iter().all(|&b| b))
    }

    /// Qubits held by all provers after the last round.
    pub fn total_qubits(&self) -> usize {
        self.provers
            .iter()
            .filter_map(|p| p.layout.last())
            .map(|l| l.qubits_after)
            .sum()
    }
}

fn violation(prover: usize, round: usize, element: usize, reason: impl Into<String>) -> Error {
    Error::ModelViolation {
        prover,
        round,
        element,
        reason: reason.into(),
    }
}

/// Whether a round is a Clifford unitary followed by one computational-basis
/// measurement of distinct qubits that forms the answer.
pub fn round_is_unitary_then_measure(round: &RoundProgram, cbits_before: usize) -> bool {
    let mut measured = Vec::new();
    let mut seen_measure = false;
    for e in &round.elements {
        match e {
            Element::Gate(_) if !seen_measure => {}
            Element::Measure(qs) => {
                seen_measure = true;
                measured.extend_from_slice(qs);
            }
            _ => return false,
        }
    }
    let distinct: BTreeSet<_> = measured.iter().collect();
    distinct.len() == measured.len()
        && round
            .answer
            .iter()
            .copied()
            .eq(cbits_before..cbits_before + measured.len())
}

/// Checks the strategy against the protocol's shape and classifies every
/// prover. Non-Clifford or classically controlled elements in a prover that
/// is not flagged `unrestricted` are rejected.
pub fn validate_model(strategy: &QuantumStrategy, protocol: &Protocol) -> Result<ModelReport> {
    let k = protocol.provers();
    if strategy.provers.len() != k {
        return Err(Error::width("provers", k, strategy.provers.len()));
    }
    if strategy.shares.len() != k {
        return Err(Error::width("shares", k, strategy.shares.len()));
    }
    let n = strategy.shared_state.num_qubits();
    let mut owner = vec![None; n];
    for (i, share) in strategy.shares.iter().enumerate() {
        for &q in share {
            if q >= n {
                return Err(Error::Strategy(format!(
                    "prover {i} holds qubit {q} of a {n}-qubit state"
                )));
            }
            if let Some(j) = owner[q].replace(i) {
                return Err(Error::Strategy(format!(
                    "qubit {q} is shared by provers {j} and {i}"
                )));
            }
        }
    }
    if let Some(q) = owner.iter().position(Option::is_none) {
        return Err(Error::Strategy(format!(
            "qubit {q} of the shared state is not held by any prover"
        )));
    }

    let mut provers = Vec::with_capacity(k);
    for (i, prog) in strategy.provers.iter().enumerate() {
        if prog.rounds.len() != protocol.rounds() {
            return Err(Error::width(
                format!("prover {i} rounds"),
                protocol.rounds(),
                prog.rounds.len(),
            ));
        }
        let mut report = ProverReport {
            clifford_only: true,
            has_intermediate_measurement: false,
            has_postprocessing: false,
            has_controlled: false,
            unrestricted: prog.unrestricted,
            unitary_then_measure: Vec::new(),
            layout: Vec::new(),
        };
        let mut d = strategy.shares[i].len();
        let mut cbits = 0usize;
        for (r, round) in prog.rounds.iter().enumerate() {
            let qubits_before = d;
            let cbits_before = cbits;
            d += protocol.question_width(r, i);
            let mut measured_since_gate = false;
            for (e, el) in round.elements.iter().enumerate() {
                let bad = |reason: String| violation(i, r, e, reason);
                let qubit = |q: usize| {
                    if q < d {
                        Ok(())
                    } else {
                        Err(bad(format!("qubit {q} out of range ({d} held)")))
                    }
                };
                if !el.is_clifford_model() {
                    report.clifford_only = false;
                    if !prog.unrestricted {
                        let reason = match el {
                            Element::Controlled { .. } => {
                                "classically controlled gates are outside the Clifford model"
                            }
                            _ => "non-Clifford gate in a prover that is not unrestricted",
                        };
                        return Err(bad(reason.into()));
                    }
                }
                match el {
                    Element::Gate(g) => {
                        g.check(d).map_err(|err| bad(err.to_string()))?;
                        if measured_since_gate {
                            report.has_intermediate_measurement = true;
                        }
                    }
                    Element::T(q) | Element::Tdg(q) => qubit(*q)?,
                    Element::U1 { qubit: q, matrix } => {
                        qubit(*q)?;
                        check_matrix(matrix, 2).map_err(bad)?;
                    }
                    Element::U2 { qubits, matrix } => {
                        qubit(qubits[0])?;
                        qubit(qubits[1])?;
                        if qubits[0] == qubits[1] {
                            return Err(bad("two-qubit block on a repeated qubit".into()));
                        }
                        check_matrix(matrix, 4).map_err(bad)?;
                    }
                    Element::Measure(qs) => {
                        for &q in qs {
                            qubit(q)?;
                        }
                        cbits += qs.len();
                        measured_since_gate = true;
                    }
                    Element::PostProcess { circuit, inputs } => {
                        report.has_postprocessing = true;
                        if circuit.inputs() != inputs.len() {
                            return Err(bad(format!(
                                "post-processing reads {} bits but its circuit takes {}",
                                inputs.len(),
                                circuit.inputs()
                            )));
                        }
                        if let Some(&b) = inputs.iter().find(|&&b| b >= cbits) {
                            return Err(bad(format!(
                                "post-processing reads classical bit {b} of {cbits}"
                            )));
                        }
                        d += circuit.num_outputs();
                        cbits += circuit.num_outputs();
                    }
                    Element::Controlled { cbit, gate } => {
                        report.has_controlled = true;
                        if *cbit >= cbits {
                            return Err(bad(format!("control bit {cbit} of {cbits}")));
                        }
                        gate.check(d).map_err(|err| bad(err.to_string()))?;
                        if measured_since_gate {
                            report.has_intermediate_measurement = true;
                        }
                    }
                }
                if !matches!(el, Element::Measure(_)) && !matches!(el, Element::PostProcess { .. })
                {
                    measured_since_gate = false;
                }
            }
            let t = protocol.answer_width(r, i);
            if round.answer.len() != t {
                return Err(Error::width(
                    format!("prover {i} round {r} answer"),
                    t,
                    round.answer.len(),
                ));
            }
            if let Some(&b) = round.answer.iter().find(|&&b| b >= cbits) {
                return Err(violation(
                    i,
                    r,
                    round.elements.len(),
                    format!("answer reads classical bit {b} of {cbits}"),
                ));
            }
            report
                .unitary_then_measure
                .push(round_is_unitary_then_measure(round, cbits_before));
            report.layout.push(RoundLayout {
                qubits_before,
                qubits_after: d,
                cbits_before,
                cbits_after: cbits,
            });
        }
        provers.push(report);
    }
    Ok(ModelReport { provers })
}

/// Per `(prover, round)`: whether that round is unitary-then-measure.
pub fn is_unitary_then_measure(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
) -> Result<Vec<Vec<bool>>> {
    Ok(validate_model(strategy, protocol)?
        .provers
        .into_iter()
        .map(|p| p.unitary_then_measure)
        .collect())
}

/// Rewrites the final round of each listed prover so it measures its whole
/// register, qubit 0 first, while answering with the originally measured
/// bits. The final round must already be unitary-then-measure.
pub fn measure_all_final(
    strategy: &QuantumStrategy,
    protocol: &Protocol,
    provers: &[usize],
) -> Result<QuantumStrategy> {
    let report = validate_model(strategy, protocol)?;
    let mut out = strategy.clone();
    let last = protocol.rounds() - 1;
    for &i in provers {
        let pr = &report.provers[i];
        if !pr.unitary_then_measure[last] {
            return Err(violation(
                i,
                last,
                0,
                "final round is not unitary-then-measure",
            ));
        }
        let layout = pr.layout[last];
        let round = &mut out.provers[i].rounds[last];
        let measured: Vec<usize> = round
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Measure(qs) => Some(qs.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        round.elements.retain(|e| matches!(e, Element::Gate(_)));
        round
            .elements
            .push(Element::Measure((0..layout.qubits_after).collect()));
        round.answer = measured.iter().map(|&q| layout.cbits_before + q).collect();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Classical strategies

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharedRandomness {
    /// Explicit distribution over encodings `λ`.
    Table(Vec<LambdaRow>),
    /// `λ` drawn by running a precomputed interaction.
    Precomputed(Box<Precomputed>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: BitString,
    pub p: f64,
}

impl SharedRandomness {
    pub fn none() -> Self {
        SharedRandomness::Table(vec![LambdaRow {
            lambda: BitString::zeros(0),
            p: 1.0,
        }])
    }

    pub fn distribution(&self) -> Result<Vec<(BitString, f64)>> {
        match self {
            SharedRandomness::Table(rows) => {
                Ok(rows.iter().map(|r| (r.lambda.clone(), r.p)).collect())
            }
            SharedRandomness::Precomputed(p) => p.lambda_distribution(),
        }
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Result<BitString> {
        match self {
            SharedRandomness::Table(rows) => {
                let weights: Vec<f64> = rows.iter().map(|r| r.p).collect();
                Ok(rows[rng.choose_weighted(&weights)].lambda.clone())
            }
            SharedRandomness::Precomputed(p) => p.sample(rng),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalProver {
    /// Per round, a circuit from `λ ‖ local history ‖ question` to the answer.
    Circuits(Vec<BoolCircuit>),
    Correction(CorrectionProgram),
    Conditional(ConditionalProgram),
}

impl ClassicalProver {
    /// Answer distribution of round `r`; deterministic provers return one
    /// entry with probability 1.
    pub fn answer_distribution(
        &self,
        lambda: &BitString,
        r: usize,
        local: &LocalHistory,
        question: &BitString,
    ) -> Result<Vec<(BitString, f64)>> {
        match self {
            ClassicalProver::Circuits(cs) => {
                let c = cs.get(r).ok_or(Error::IndexOutOfRange {
                    index: r,
                    bound: cs.len(),
                    what: "response circuits",
                })?;
                let mut input = lambda.clone();
                input.extend_from(&local.bits());
                input.extend_from(question);
                Ok(vec![(c.eval(&input)?, 1.0)])
            }
            ClassicalProver::Correction(p) => {
                Ok(vec![(p.answer(lambda, r, local, question)?, 1.0)])
            }
            ClassicalProver::Conditional(p) => p.distribution(lambda, r, question),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    pub shared: SharedRandomness,
    pub provers: Vec<ClassicalProver>,
}

/// `f_i^r(λ, h_i^{r-1}, q_i^r)`. Randomized provers draw from `rng`.
pub fn evaluate_classical(
    strategy: &ClassicalStrategy,
    lambda: &BitString,
    i: usize,
    r: usize,
    local: &LocalHistory,
    question: &BitString,
    rng: &mut SplitMix64,
) -> Result<BitString> {
    let prover = strategy.provers.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        bound: strategy.provers.len(),
        what: "provers",
    })?;
    let mut dist = prover.answer_distribution(lambda, r, local, question)?;
    if dist.len() == 1 {
        return Ok(dist.pop().unwrap().0);
    }
    let weights: Vec<f64> = dist.iter().map(|(_, p)| *p).collect();
    Ok(dist.swap_remove(rng.choose_weighted(&weights)).0)
}

// ---------------------------------------------------------------------------
// Files

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Quantum(QuantumStrategy),
    Classical(ClassicalStrategy),
}

impl Strategy {
    pub fn from_json(text: &str) -> Result<Strategy> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parses a strategy whose state-file references are relative to `base`.
    pub fn from_json_at(text: &str, base: &Path) -> Result<Strategy> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        if let Some(shared) = value
            .get_mut("shared_state")
            .and_then(|v| v.as_object_mut())
        {
            for entry in shared.values_mut() {
                if let Some(file) = entry.get_mut("file") {
                    if let Some(f) = file.as_str() {
                        *file = base.join(f).to_string_lossy().into_owned().into();
                    }
                }
            }
        }
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .map(str::to_owned);
        serde_json::from_value(value).map_err(|e| {
            // The tagged form loses positions; parsing the text as the
            // tagged variant gives a line and column.
            let located = match kind.as_deref() {
                Some("quantum") => serde_json::from_str::<QuantumStrategy>(text).err(),
                Some("classical") => serde_json::from_str::<ClassicalStrategy>(text).err(),
                _ => None,
            };
            match located {
                Some(l) if l.line() > 0 => {
                    Error::parse(l.line(), format!("column {}: {e}", l.column()))
                }
                _ => e.into(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Strategy> {
        let text = std::fs::read_to_string(path)?;
        Strategy::from_json_at(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CliffordGate::*;

    const PROTOCOL: &str = r#"{"K":1,"R":1,"s":1,"t":1,
        "pi":[[{"history_key":"","row":[{"questions":"0","p":0.5},{"questions":"1","p":0.5}]}]],
        "v":{"truth_table":"1001"}}"#;

    fn protocol() -> Protocol {
        Protocol::from_json(PROTOCOL).unwrap()
    }

    fn single(elements: Vec<Element>, answer: Vec<usize>, unrestricted: bool) -> QuantumStrategy {
        QuantumStrategy {
            shared_state: SharedState::zero(1),
            shares: vec![vec![0]],
            provers: vec![ProverProgram {
                unrestricted,
                rounds: vec![RoundProgram { elements, answer }],
            }],
        }
    }

    #[test]
    fn unitary_then_measure_is_clifford_only() {
        let s = single(
            vec![Element::Gate(Cnot(0, 1)), Element::Measure(vec![1])],
            vec![0],
            false,
        );
        let r = validate_model(&s, &protocol()).unwrap();
        let p = &r.provers[0];
        assert!(p.clifford_only && !p.has_intermediate_measurement && !p.has_postprocessing);
        assert_eq!(p.unitary_then_measure, vec![true]);
        assert_eq!(
            is_unitary_then_measure(&s, &protocol()).unwrap(),
            vec![vec![true]]
        );
    }

    #[test]
    fn mid_round_measurement_and_xor_set_flags() {
        let xor = BoolCircuit::new(
            2,
            vec![crate::boolcircuit::BoolGate::Xor(vec![0, 1])],
            vec![2],
        )
        .unwrap();
        let s = single(
            vec![
                Element::Measure(vec![0]),
                Element::Gate(H(1)),
                Element::Measure(vec![1]),
                Element::PostProcess {
                    circuit: xor,
                    inputs: vec![0, 1],
                },
            ],
            vec![2],
            false,
        );
        let r = validate_model(&s, &protocol()).unwrap();
        let p = &r.provers[0];
        assert!(p.clifford_only && p.has_intermediate_measurement && p.has_postprocessing);
        assert_eq!(p.unitary_then_measure, vec![false]);
        assert_eq!(p.layout[0].qubits_after, 3);
    }

    #[test]
    fn t_gate_needs_unrestricted() {
        let elements = vec![Element::T(0), Element::Measure(vec![0])];
        let s = single(elements.clone(), vec![0], false);
        assert!(matches!(
            validate_model(&s, &protocol()),
            Err(Error::ModelViolation { .. })
        ));
        let s = single(elements, vec![0], true);
        let r = validate_model(&s, &protocol()).unwrap();
        assert!(r.provers[0].unrestricted && !r.provers[0].clifford_only);
    }

    #[test]
    fn classically_controlled_gates_are_rejected() {
        let elements = vec![
            Element::Measure(vec![0]),
            Element::Controlled {
                cbit: 0,
                gate: H(1),
            },
            Element::Measure(vec![1]),
        ];
        let s = single(elements.clone(), vec![1], false);
        let err = validate_model(&s, &protocol()).unwrap_err();
        assert!(err.to_string().contains("classically controlled"));
        assert!(validate_model(&single(elements, vec![1], true), &protocol()).is_ok());
    }

    #[test]
    fn index_errors() {
        let s = single(vec![Element::Measure(vec![2])], vec![0], false);
        assert!(validate_model(&s, &protocol()).is_err());
        let s = single(vec![Element::Measure(vec![0])], vec![1], false);
        assert!(validate_model(&s, &protocol()).is_err());
        let s = single(vec![Element::Measure(vec![0, 1])], vec![0, 1], false);
        assert!(validate_model(&s, &protocol()).is_err());
        let mut s = single(vec![Element::Measure(vec![0])], vec![0], false);
        s.shares = vec![vec![]];
        assert!(validate_model(&s, &protocol()).is_err());
    }

    #[test]
    fn json_aliases_and_round_trip() {
        let text = r#"{"kind":"quantum",
            "shared_state":{"stabilizer":{"generators":["XX","ZZ"]}},
            "shares":[[0],[1]],
            "provers":[
              {"rounds":[{"elements":[{"cz":[0,1]},{"sdg":1},{"measure":[1]}],"answer":[0]}]},
              {"unrestricted":true,"rounds":[{"elements":[{"t":0},
                 {"u1":{"qubit":1,"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}},{"measure":[0]}],"answer":[0]}]}]}"#;
        let s = Strategy::from_json(text).unwrap();
        let Strategy::Quantum(q) = &s else { panic!() };
        assert_eq!(q.provers[0].rounds[0].elements.len(), 7);
        let once = s.to_json();
        let back = Strategy::from_json(&once).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), once);
    }

    #[test]
    fn dense_state_round_trips_bit_exactly() {
        let mut rng = SplitMix64::new(9);
        let st = QuantumStrategy {
            shared_state: SharedState::Dense(DenseState::random(2, &mut rng)),
            shares: vec![vec![0, 1]],
            provers: vec![],
        };
        let s = Strategy::Quantum(st);
        let back = Strategy::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn state_files_resolve_relative_to_the_strategy() {
        let dir = std::env::temp_dir().join(format!("cmip-strategy-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("bell.stab"), "2\nXX\nZZ\n").unwrap();
        let text = r#"{"kind":"quantum","shared_state":{"stabilizer":{"file":"bell.stab"}},
            "shares":[[0],[1]],"provers":[]}"#;
        std::fs::write(dir.join("s.json"), text).unwrap();
        let s = Strategy::load(&dir.join("s.json")).unwrap();
        let Strategy::Quantum(q) = s else { panic!() };
        assert_eq!(q.shared_state.num_qubits(), 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn measure_all_keeps_the_answer() {
        let s = single(
            vec![Element::Gate(Cnot(0, 1)), Element::Measure(vec![1])],
            vec![0],
            false,
        );
        let m = measure_all_final(&s, &protocol(), &[0]).unwrap();
        let round = &m.provers[0].rounds[0];
        assert_eq!(round.elements.last(), Some(&Element::Measure(vec![0, 1])));
        assert_eq!(round.answer, vec![1]);
    }

    #[test]
    fn evaluate_constant_and_xor() {
        use crate::boolcircuit::BoolGate;
        let zero = BoolCircuit::new(2, vec![BoolGate::Const(false)], vec![2]).unwrap();
        let xor = BoolCircuit::new(2, vec![BoolGate::Xor(vec![0, 1])], vec![2]).unwrap();
        let s = ClassicalStrategy {
            shared: SharedRandomness::none(),
            provers: vec![
                ClassicalProver::Circuits(vec![zero]),
                ClassicalProver::Circuits(vec![xor]),
            ],
        };
        let mut rng = SplitMix64::new(0);
        let l = LocalHistory::default();
        let q: BitString = "11".parse().unwrap();
        let none = BitString::zeros(0);
        assert_eq!(
            evaluate_classical(&s, &none, 0, 0, &l, &q, &mut rng).unwrap(),
            "0".parse().unwrap()
        );
        assert_eq!(
            evaluate_classical(&s, &none, 1, 0, &l, &q, &mut rng).unwrap(),
            "0".parse().unwrap()
        );
    }
}

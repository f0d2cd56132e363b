//! Running strategies against a protocol.
//!
//! Quantum strategies run on a [`Backend`]: every measurement either splits
//! the current branch by outcome (exact enumeration) or draws one outcome
//! (sampling). Exact enumeration walks the tree of question draws and
//! measurement outcomes and accumulates the probability of every full
//! history.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::clifford::CliffordGate;
use crate::dense::{gates, DenseState, DEFAULT_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::protocol::{History, LocalHistory, Protocol};
use crate::rng::SplitMix64;
use crate::stabilizer::StabilizerState;
use crate::strategy::{
    matrix2, matrix4, validate_model, ClassicalStrategy, Element, QuantumStrategy, RoundProgram,
    SharedState, Strategy,
};

/// Outcomes below this probability are treated as impossible.
pub const PRUNE: f64 = 1e-14;

/// Exact distribution over full histories.
pub type Distribution = BTreeMap<History, f64>;

pub trait Backend: Clone {
    const DENSE: bool;
    fn num_qubits(&self) -> usize;
    fn push_qubit(&mut self, bit: bool) -> usize;
    fn apply_clifford(&mut self, g: &CliffordGate) -> Result<()>;
    fn apply_element(&mut self, e: &Element, map: &[usize]) -> Result<()>;
    /// Probability of reading 1 on `q`.
    fn prob_one(&self, q: usize) -> Result<f64>;
    fn collapse(&mut self, q: usize, bit: bool) -> Result<f64>;
}

impl Backend for StabilizerState {
    const DENSE: bool = false;

    fn num_qubits(&self) -> usize {
        StabilizerState::num_qubits(self)
    }

    fn push_qubit(&mut self, bit: bool) -> usize {
        StabilizerState::push_qubit(self, bit)
    }

    fn apply_clifford(&mut self, g: &CliffordGate) -> Result<()> {
        self.apply_gate(g)
    }

    fn apply_element(&mut self, e: &Element, _map: &[usize]) -> Result<()> {
        Err(Error::NotStabilizer(format!("{e:?}")))
    }

    fn prob_one(&self, q: usize) -> Result<f64> {
        self.outcome_probability(q, true)
    }

    fn collapse(&mut self, q: usize, bit: bool) -> Result<f64> {
        StabilizerState::collapse(self, q, bit)
    }
}

impl Backend for DenseState {
    const DENSE: bool = true;

    fn num_qubits(&self) -> usize {
        DenseState::num_qubits(self)
    }

    fn push_qubit(&mut self, bit: bool) -> usize {
        DenseState::push_qubit(self, bit)
    }

    fn apply_clifford(&mut self, g: &CliffordGate) -> Result<()> {
        self.apply_gate(g)
    }

    fn apply_element(&mut self, e: &Element, map: &[usize]) -> Result<()> {
        match e {
            Element::T(q) => self.apply_1q(map[*q], &gates::t()),
            Element::Tdg(q) => self.apply_1q(map[*q], &gates::tdg()),
            Element::U1 { qubit, matrix } => self.apply_1q(map[*qubit], &matrix2(matrix)),
            Element::U2 { qubits, matrix } => {
                self.apply_2q(map[qubits[0]], map[qubits[1]], &matrix4(matrix))
            }
            other => Err(Error::Unsupported(format!(
                "{other:?} is not a general gate"
            ))),
        }
    }

    fn prob_one(&self, q: usize) -> Result<f64> {
        self.probability(q, true)
    }

    fn collapse(&mut self, q: usize, bit: bool) -> Result<f64> {
        DenseState::collapse(self, q, bit)
    }
}

/// Which simulator runs a quantum strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BackendChoice {
    /// Stabilizer when the state and every element allow it, else dense.
    #[default]
    Auto,
    Dense,
    Stabilizer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecConfig {
    pub backend: BackendChoice,
    /// Largest register the dense backend may hold.
    pub dense_cap: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            backend: BackendChoice::Auto,
            dense_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl ExecConfig {
    pub fn dense() -> Self {
        ExecConfig {
            backend: BackendChoice::Dense,
            ..ExecConfig::default()
        }
    }

    pub fn uses_dense(&self, strategy: &QuantumStrategy) -> Result<bool> {
        match self.backend {
            BackendChoice::Dense => Ok(true),
            BackendChoice::Auto => Ok(!strategy.stabilizer_simulable()),
            BackendChoice::Stabilizer => {
                if strategy.stabilizer_simulable() {
                    Ok(false)
                } else {
                    Err(Error::NotStabilizer("this strategy".into()))
                }
            }
        }
    }
}

/// One prover's local register and classical bits.
#[derive(Clone, Debug, Default)]
pub struct ProverRegister {
    /// Global qubit index of each local qubit.
    pub qubits: Vec<usize>,
    pub cbits: BitString,
}

/// A measurement branch: the post-measurement state and its probability.
#[derive(Clone, Debug)]
pub struct Branch<B> {
    pub state: B,
    pub weight: f64,
    pub registers: Vec<ProverRegister>,
}

impl<B: Backend> Branch<B> {
    pub fn new(state: B, shares: &[Vec<usize>]) -> Self {
        Branch {
            state,
            weight: 1.0,
            registers: shares
                .iter()
                .map(|s| ProverRegister {
                    qubits: s.clone(),
                    cbits: BitString::zeros(0),
                })
                .collect(),
        }
    }
}

pub enum Mode<'a> {
    Exact,
    Sample(&'a mut SplitMix64),
}

struct Runner {
    cap: usize,
}

impl Runner {
    fn push<B: Backend>(&self, b: &mut Branch<B>, bit: bool) -> Result<usize> {
        if B::DENSE && b.state.num_qubits() >= self.cap {
            return Err(Error::CapExceeded {
                needed: b.state.num_qubits() + 1,
                cap: self.cap,
            });
        }
        Ok(b.state.push_qubit(bit))
    }

    /// Runs `round` for prover `i` from element `start` (and qubit `sub` of
    /// it when it is a measurement), sending finished branches to `out`.
    #[allow(clippy::too_many_arguments)]
    fn exec<B: Backend>(
        &self,
        mut b: Branch<B>,
        i: usize,
        round: &RoundProgram,
        start: usize,
        sub: usize,
        mode: &mut Mode,
        out: &mut Vec<Branch<B>>,
    ) -> Result<()> {
        let mut sub = sub;
        for (e, el) in round.elements.iter().enumerate().skip(start) {
            match el {
                Element::Gate(g) => {
                    let map = &b.registers[i].qubits;
                    b.state.apply_clifford(&g.map_qubits(|q| map[q]))?;
                }
                Element::Controlled { cbit, gate } => {
                    if b.registers[i].cbits.get(*cbit) {
                        let map = &b.registers[i].qubits;
                        b.state.apply_clifford(&gate.map_qubits(|q| map[q]))?;
                    }
                }
                Element::Measure(qs) => {
                    for (k, &lq) in qs.iter().enumerate().skip(sub) {
                        let q = b.registers[i].qubits[lq];
                        let p1 = b.state.prob_one(q)?;
                        let bit = if p1 < PRUNE {
                            false
                        } else if p1 > 1.0 - PRUNE {
                            true
                        } else {
                            match mode {
                                Mode::Sample(rng) => rng.next_f64() < p1,
                                Mode::Exact => {
                                    let mut one = b.clone();
                                    one.state.collapse(q, true)?;
                                    one.weight *= p1;
                                    one.registers[i].cbits.push(true);
                                    self.exec(one, i, round, e, k + 1, mode, out)?;
                                    false
                                }
                            }
                        };
                        let p = b.state.collapse(q, bit)?;
                        if !!(PRUNE..=1.0 - PRUNE).contains(&p1) {
                            b.weight *= p;
                        }
                        b.registers[i].cbits.push(bit);
                    }
                }
                Element::PostProcess { circuit, inputs } => {
                    let outputs = circuit.eval(&b.registers[i].cbits.select(inputs))?;
                    let mut fresh = Vec::with_capacity(outputs.len());
                    for bit in outputs.iter() {
                        fresh.push(self.push(&mut b, bit)?);
                    }
                    let reg = &mut b.registers[i];
                    fresh.extend_from_slice(&reg.qubits);
                    reg.qubits = fresh;
                    reg.cbits.extend_from(&outputs);
                }
                general => {
                    let map = b.registers[i].qubits.clone();
                    b.state.apply_element(general, &map)?;
                }
            }
            sub = 0;
        }
        out.push(b);
        Ok(())
    }

    /// Prepends the question qubits of prover `i`.
    fn ask<B: Backend>(&self, b: &mut Branch<B>, i: usize, question: &BitString) -> Result<()> {
        let mut fresh = Vec::with_capacity(question.len() + b.registers[i].qubits.len());
        for bit in question.iter() {
            fresh.push(self.push(b, bit)?);
        }
        fresh.extend_from_slice(&b.registers[i].qubits);
        b.registers[i].qubits = fresh;
        Ok(())
    }

    fn prover_round<B: Backend>(
        &self,
        branches: Vec<Branch<B>>,
        i: usize,
        round: &RoundProgram,
        question: &BitString,
        mode: &mut Mode,
    ) -> Result<Vec<Branch<B>>> {
        let mut out = Vec::with_capacity(branches.len());
        for mut b in branches {
            self.ask(&mut b, i, question)?;
            self.exec(b, i, round, 0, 0, mode, &mut out)?;
        }
        Ok(out)
    }
}

fn answers_of<B>(b: &Branch<B>, strategy: &QuantumStrategy, r: usize) -> Vec<BitString> {
    b.registers
        .iter()
        .zip(&strategy.provers)
        .map(|(reg, p)| reg.cbits.select(&p.rounds[r].answer))
        .collect()
}

/// Runs one full round for all provers on every branch and groups the
/// results by answer tuple.
pub fn run_round<B: Backend>(
    strategy: &QuantumStrategy,
    branches: Vec<Branch<B>>,
    r: usize,
    questions: &[BitString],
    mode: &mut Mode,
    cap: usize,
) -> Result<BTreeMap<Vec<BitString>, Vec<Branch<B>>>> {
    let runner = Runner { cap };
    let mut cur = branches;
    for (i, prog) in strategy.provers.iter().enumerate() {
        cur = runner.prover_round(cur, i, &prog.rounds[r], &questions[i], mode)?;
    }
    let mut groups: BTreeMap<Vec<BitString>, Vec<Branch<B>>> = BTreeMap::new();
    for b in cur {
        groups
            .entry(answers_of(&b, strategy, r))
            .or_default()
            .push(b);
    }
    Ok(groups)
}

pub(crate) fn initial_dense(strategy: &QuantumStrategy, cap: usize) -> Result<DenseState> {
    let n = strategy.shared_state.num_qubits();
    if n > cap {
        return Err(Error::CapExceeded { needed: n, cap });
    }
    strategy.shared_state.to_dense()
}

pub(crate) fn initial_stabilizer(strategy: &QuantumStrategy) -> Result<StabilizerState> {
    match &strategy.shared_state {
        SharedState::Stabilizer { state, .. } => Ok(state.clone()),
        SharedState::Dense(_) => Err(Error::NotStabilizer("a dense shared state".into())),
    }
}

fn quantum_distribution<B: Backend>(
    protocol: &Protocol,
    strategy: &QuantumStrategy,
    init: B,
    cap: usize,
) -> Result<Distribution> {
    let mut dist = Distribution::new();
    let root = vec![Branch::new(init, &strategy.shares)];
    explore(protocol, strategy, History::new(), root, cap, &mut dist)?;
    Ok(dist)
}

fn explore<B: Backend>(
    protocol: &Protocol,
    strategy: &QuantumStrategy,
    history: History,
    branches: Vec<Branch<B>>,
    cap: usize,
    dist: &mut Distribution,
) -> Result<()> {
    let r = history.len();
    if r == protocol.rounds() {
        let w: f64 = branches.iter().map(|b| b.weight).sum();
        *dist.entry(history).or_insert(0.0) += w;
        return Ok(());
    }
    for (questions, pq) in protocol.question_distribution(r, &history)? {
        let scaled: Vec<Branch<B>> = branches
            .iter()
            .map(|b| Branch {
                weight: b.weight * pq,
                ..b.clone()
            })
            .collect();
        let groups = run_round(strategy, scaled, r, &questions, &mut Mode::Exact, cap)?;
        for (answers, group) in groups {
            protocol.check_answers(r, &answers)?;
            let mut next = history.clone();
            next.push(questions.clone(), answers);
            explore(protocol, strategy, next, group, cap, dist)?;
        }
    }
    Ok(())
}

/// Exact `Pr_S[h^R]` for every history with non-zero probability.
pub fn exact_history_distribution(
    protocol: &Protocol,
    strategy: &Strategy,
    cfg: &ExecConfig,
) -> Result<Distribution> {
    match strategy {
        Strategy::Quantum(q) => {
            validate_model(q, protocol)?;
            if cfg.uses_dense(q)? {
                quantum_distribution(protocol, q, initial_dense(q, cfg.dense_cap)?, cfg.dense_cap)
            } else {
                quantum_distribution(protocol, q, initial_stabilizer(q)?, cfg.dense_cap)
            }
        }
        Strategy::Classical(c) => classical_distribution(protocol, c),
    }
}

fn classical_distribution(
    protocol: &Protocol,
    strategy: &ClassicalStrategy,
) -> Result<Distribution> {
    if strategy.provers.len() != protocol.provers() {
        return Err(Error::width(
            "provers",
            protocol.provers(),
            strategy.provers.len(),
        ));
    }
    let mut dist = Distribution::new();
    for (lambda, pl) in strategy.shared.distribution()? {
        if pl > 0.0 {
            classical_explore(protocol, strategy, &lambda, History::new(), pl, &mut dist)?;
        }
    }
    Ok(dist)
}

fn classical_explore(
    protocol: &Protocol,
    strategy: &ClassicalStrategy,
    lambda: &BitString,
    history: History,
    weight: f64,
    dist: &mut Distribution,
) -> Result<()> {
    let r = history.len();
    if r == protocol.rounds() {
        *dist.entry(history).or_insert(0.0) += weight;
        return Ok(());
    }
    for (questions, pq) in protocol.question_distribution(r, &history)? {
        // Cartesian product of the provers' answer distributions.
        let mut partial: Vec<(Vec<BitString>, f64)> = vec![(Vec::new(), weight * pq)];
        for (i, prover) in strategy.provers.iter().enumerate() {
            let local = history.local_view(i);
            let answers = prover.answer_distribution(lambda, r, &local, &questions[i])?;
            let mut next = Vec::with_capacity(partial.len() * answers.len());
            for (prefix, p) in &partial {
                for (a, pa) in &answers {
                    if *pa > 0.0 {
                        let mut v = prefix.clone();
                        v.push(a.clone());
                        next.push((v, p * pa));
                    }
                }
            }
            partial = next;
        }
        for (answers, p) in partial {
            protocol.check_answers(r, &answers)?;
            let mut next = history.clone();
            next.push(questions.clone(), answers);
            classical_explore(protocol, strategy, lambda, next, p, dist)?;
        }
    }
    Ok(())
}

/// Answer distribution of a quantum strategy on fixed questions, keyed by
/// the per-round answer tuples.
pub fn fixed_question_distribution(
    strategy: &QuantumStrategy,
    questions: &[Vec<BitString>],
    cfg: &ExecConfig,
) -> Result<BTreeMap<Vec<Vec<BitString>>, f64>> {
    fn go<B: Backend>(
        strategy: &QuantumStrategy,
        questions: &[Vec<BitString>],
        init: B,
        cap: usize,
    ) -> Result<BTreeMap<Vec<Vec<BitString>>, f64>> {
        type Layer<B> = Vec<(Vec<Vec<BitString>>, Vec<Branch<B>>)>;
        let mut layer: Layer<B> = vec![(Vec::new(), vec![Branch::new(init, &strategy.shares)])];
        for (r, qs) in questions.iter().enumerate() {
            let mut next = Vec::new();
            for (prefix, branches) in layer {
                for (answers, group) in run_round(strategy, branches, r, qs, &mut Mode::Exact, cap)?
                {
                    let mut p = prefix.clone();
                    p.push(answers);
                    next.push((p, group));
                }
            }
            layer = next;
        }
        Ok(layer
            .into_iter()
            .map(|(k, bs)| (k, bs.iter().map(|b| b.weight).sum()))
            .collect())
    }
    if cfg.uses_dense(strategy)? {
        go(
            strategy,
            questions,
            initial_dense(strategy, cfg.dense_cap)?,
            cfg.dense_cap,
        )
    } else {
        go(
            strategy,
            questions,
            initial_stabilizer(strategy)?,
            cfg.dense_cap,
        )
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// The provers of one run. Each call sees only prover `i`'s local history
/// and question.
pub trait ProverSet {
    fn answer(
        &mut self,
        i: usize,
        r: usize,
        local: &LocalHistory,
        question: &BitString,
    ) -> Result<BitString>;
}

/// Quantum provers sharing one sampled branch.
pub struct QuantumSession<'s, B> {
    strategy: &'s QuantumStrategy,
    branch: Option<Branch<B>>,
    rng: SplitMix64,
    cap: usize,
}

impl<'s, B: Backend> QuantumSession<'s, B> {
    pub fn new(strategy: &'s QuantumStrategy, init: B, rng: SplitMix64, cap: usize) -> Self {
        QuantumSession {
            strategy,
            branch: Some(Branch::new(init, &strategy.shares)),
            rng,
            cap,
        }
    }
}

impl<B: Backend> ProverSet for QuantumSession<'_, B> {
    fn answer(
        &mut self,
        i: usize,
        r: usize,
        _local: &LocalHistory,
        question: &BitString,
    ) -> Result<BitString> {
        let runner = Runner { cap: self.cap };
        let round = &self.strategy.provers[i].rounds[r];
        let b = self.branch.take().expect("branch present between calls");
        let mut out = runner.prover_round(
            vec![b],
            i,
            round,
            question,
            &mut Mode::Sample(&mut self.rng),
        )?;
        let b = out.pop().expect("sampling keeps one branch");
        let answer = b.registers[i].cbits.select(&round.answer);
        self.branch = Some(b);
        Ok(answer)
    }
}

/// Classical provers with one draw of `λ`; randomized provers use a private
/// stream each.
pub struct ClassicalSession<'s> {
    strategy: &'s ClassicalStrategy,
    lambda: BitString,
    private: Vec<SplitMix64>,
}

impl<'s> ClassicalSession<'s> {
    pub fn new(strategy: &'s ClassicalStrategy, rng: &mut SplitMix64) -> Result<Self> {
        let lambda = strategy.shared.sample(rng)?;
        let private = (0..strategy.provers.len()).map(|_| rng.split()).collect();
        Ok(ClassicalSession {
            strategy,
            lambda,
            private,
        })
    }
}

impl ProverSet for ClassicalSession<'_> {
    fn answer(
        &mut self,
        i: usize,
        r: usize,
        local: &LocalHistory,
        question: &BitString,
    ) -> Result<BitString> {
        crate::strategy::evaluate_classical(
            self.strategy,
            &self.lambda,
            i,
            r,
            local,
            question,
            &mut self.private[i],
        )
    }
}

/// Plays one interaction: the verifier draws questions from `verifier`
/// and hands each prover only its own local history.
pub fn run_protocol(
    protocol: &Protocol,
    provers: &mut dyn ProverSet,
    verifier: &mut SplitMix64,
) -> Result<(History, bool)> {
    let mut history = History::new();
    for r in 0..protocol.rounds() {
        let questions = protocol.sample_questions(r, &history, verifier)?;
        let mut answers = Vec::with_capacity(protocol.provers());
        for (i, q) in questions.iter().enumerate() {
            let local = history.local_view(i);
            answers.push(provers.answer(i, r, &local, q)?);
        }
        protocol.check_answers(r, &answers)?;
        history.push(questions, answers);
    }
    let accept = protocol.accepts(&history)?;
    Ok((history, accept))
}

/// One seeded run of `strategy`. Stream 0 of `seed` drives the verifier,
/// stream 1 the provers.
pub fn run_once(
    protocol: &Protocol,
    strategy: &Strategy,
    seed: u64,
    cfg: &ExecConfig,
) -> Result<(History, bool)> {
    let mut verifier = SplitMix64::stream(seed, 0);
    let mut provers_rng = SplitMix64::stream(seed, 1);
    match strategy {
        Strategy::Quantum(q) => {
            if cfg.uses_dense(q)? {
                let mut s = QuantumSession::new(
                    q,
                    initial_dense(q, cfg.dense_cap)?,
                    provers_rng,
                    cfg.dense_cap,
                );
                run_protocol(protocol, &mut s, &mut verifier)
            } else {
                let mut s =
                    QuantumSession::new(q, initial_stabilizer(q)?, provers_rng, cfg.dense_cap);
                run_protocol(protocol, &mut s, &mut verifier)
            }
        }
        Strategy::Classical(c) => {
            let mut s = ClassicalSession::new(c, &mut provers_rng)?;
            run_protocol(protocol, &mut s, &mut verifier)
        }
    }
}

/// `shots` independent runs; run `k` uses stream `k` of `seed`, so results
/// do not depend on scheduling.
pub fn run_shots(
    protocol: &Protocol,
    strategy: &Strategy,
    seed: u64,
    shots: u64,
    cfg: &ExecConfig,
) -> Result<BTreeMap<History, u64>> {
    use rayon::prelude::*;
    if let Strategy::Quantum(q) = strategy {
        validate_model(q, protocol)?;
    }
    let chunk = 1024u64;
    let parts: Vec<Result<BTreeMap<History, u64>>> = (0..shots.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut counts = BTreeMap::new();
            for k in c * chunk..((c + 1) * chunk).min(shots) {
                let run_seed = SplitMix64::stream(seed, k).next_u64();
                let (h, _) = run_once(protocol, strategy, run_seed, cfg)?;
                *counts.entry(h).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .collect();
    let mut total = BTreeMap::new();
    for part in parts {
        for (h, n) in part? {
            *total.entry(h).or_insert(0) += n;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordGate::*;
    use crate::strategy::{ProverProgram, RoundProgram};

    const CHSH: &str = r#"{"K":2,"R":1,"s":1,"t":1,
        "pi":[[{"history_key":"","row":[{"questions":"00","p":0.25},{"questions":"01","p":0.25},
            {"questions":"10","p":0.25},{"questions":"11","p":0.25}]}]],
        "v":{"circuit":{"inputs":4,"gates":[{"and":[0,1]},{"xor":[2,3,4]},{"not":5}],"outputs":[6]}}}"#;

    fn bell_measure() -> QuantumStrategy {
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
                    rounds: vec![round(vec![Element::Measure(vec![1])])],
                },
                ProverProgram {
                    unrestricted: false,
                    rounds: vec![round(vec![Element::Measure(vec![1])])],
                },
            ],
        }
    }

    fn value(p: &Protocol, d: &Distribution) -> f64 {
        d.iter()
            .filter(|(h, _)| p.accepts(h).unwrap())
            .map(|(_, w)| w)
            .sum()
    }

    #[test]
    fn bell_answers_agree_and_total_is_one() {
        let p = Protocol::from_json(CHSH).unwrap();
        let s = Strategy::Quantum(bell_measure());
        for cfg in [ExecConfig::default(), ExecConfig::dense()] {
            let d = exact_history_distribution(&p, &s, &cfg).unwrap();
            let total: f64 = d.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for h in d.keys() {
                let a = &h.rounds()[0].answers;
                assert_eq!(a[0], a[1]);
            }
            assert!((value(&p, &d) - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = Protocol::from_json(CHSH).unwrap();
        let s = Strategy::Quantum(bell_measure());
        let a = run_shots(&p, &s, 42, 3000, &ExecConfig::default()).unwrap();
        let b = run_shots(&p, &s, 42, 3000, &ExecConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().sum::<u64>(), 3000);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let p = Protocol::from_json(CHSH).unwrap();
        let s = Strategy::Quantum(bell_measure());
        let cfg = ExecConfig {
            backend: BackendChoice::Dense,
            dense_cap: 3,
        };
        assert!(matches!(
            exact_history_distribution(&p, &s, &cfg),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn question_qubits_feed_the_circuit() {
        // Echo prover: copy the question onto a fresh basis qubit and measure.
        let p = Protocol::from_json(
            r#"{"K":1,"R":1,"s":1,"t":1,
            "pi":[[{"history_key":"","row":[{"questions":"1","p":1.0}]}]],
            "v":{"truth_table":"1001"}}"#,
        )
        .unwrap();
        let s = QuantumStrategy {
            shared_state: SharedState::zero(1),
            shares: vec![vec![0]],
            provers: vec![ProverProgram {
                unrestricted: false,
                rounds: vec![RoundProgram {
                    elements: vec![Element::Gate(Cnot(0, 1)), Element::Measure(vec![1])],
                    answer: vec![0],
                }],
            }],
        };
        let d =
            exact_history_distribution(&p, &Strategy::Quantum(s), &ExecConfig::default()).unwrap();
        assert_eq!(d.len(), 1);
        let (h, w) = d.iter().next().unwrap();
        assert_eq!(*w, 1.0);
        assert!(p.accepts(h).unwrap());
    }
}

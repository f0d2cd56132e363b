//! The transform `G → G_S` that moves classical post-processing to the
//! verifier.
//!
//! Each prover round is cut into segments of the form `gates* measure* post*`.
//! Every segment becomes a sub-round of `G_S` in which the prover runs the
//! gates, measures and answers with the outcomes. The verifier of `G_S`
//! evaluates the post-processing and sends its outputs back as the question
//! of the next sub-round, outputs of the last step first. These are the bits
//! the prover of `G` prepends to its register, so the element indices of
//! `S′` are those of `S`. The verifier samples its own questions and decides
//! acceptance from the bits that correspond to `G`'s history only.

use std::collections::BTreeMap;

use crate::boolcircuit::{BoolCircuit, CircuitBuilder};
use crate::desim::correction::PostStep;
use crate::error::{Error, Result};
use crate::protocol::{History, Predicate, Protocol, QuestionRule};
use crate::strategy::{validate_model, Element, ProverProgram, QuantumStrategy, RoundProgram};

/// One unitary-then-measure piece of a prover round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Segment {
    /// Gates, in order.
    pub gates: Vec<Element>,
    /// Measured local qubits, in order, all distinct.
    pub measured: Vec<usize>,
    /// Post-processing run after the measurements, reading `S`'s classical
    /// bits.
    pub post: Vec<PostStep>,
}

impl Segment {
    fn is_empty(&self) -> bool {
        self.gates.is_empty() && self.measured.is_empty() && self.post.is_empty()
    }
}

/// Splits a round into segments. A round ending in post-processing gets an
/// extra empty segment that receives the outputs.
pub fn segment_round(round: &RoundProgram) -> Result<Vec<Segment>> {
    #[derive(PartialEq, PartialOrd)]
    enum Phase {
        Gates,
        Measure,
        Post,
    }
    let mut out = Vec::new();
    let mut cur = Segment::default();
    let mut phase = Phase::Gates;
    for el in &round.elements {
        match el {
            Element::Measure(qs) => {
                for &q in qs {
                    if phase == Phase::Post || cur.measured.contains(&q) {
                        out.push(std::mem::take(&mut cur));
                    }
                    phase = Phase::Measure;
                    cur.measured.push(q);
                }
            }
            Element::PostProcess { circuit, inputs } => {
                phase = Phase::Post;
                cur.post.push(PostStep {
                    circuit: circuit.clone(),
                    inputs: inputs.clone(),
                });
            }
            Element::Controlled { .. } => {
                return Err(Error::Unsupported(
                    "classically controlled gates cannot be delegated".into(),
                ))
            }
            gate => {
                if phase > Phase::Gates {
                    out.push(std::mem::take(&mut cur));
                    phase = Phase::Gates;
                }
                cur.gates.push(gate.clone());
            }
        }
    }
    let trailing_post = !cur.post.is_empty();
    if !cur.is_empty() || out.is_empty() {
        out.push(cur);
    }
    if trailing_post {
        out.push(Segment::default());
    }
    Ok(out)
}

/// Result of [`delegate_postprocessing`].
#[derive(Clone, Debug)]
pub struct Delegated {
    pub original: Protocol,
    /// `G_S`.
    pub protocol: Protocol,
    /// `S′`, unitary-then-measure in every sub-round.
    pub strategy: QuantumStrategy,
    /// `(round of G, segment)` of each sub-round.
    pub subrounds: Vec<(usize, usize)>,
    /// Per prover and round of `G`, one segment per sub-round of that round.
    pub segments: Vec<Vec<Vec<Segment>>>,
    /// Position in a `G_S` history of each bit of a full `G` history.
    pub positions: Vec<usize>,
}

impl Delegated {
    /// The `G` history whose bits a `G_S` history carries.
    pub fn project_history(&self, history: &History) -> Result<History> {
        let done = |r: usize| self.subrounds.iter().filter(|(g, _)| *g < r).count();
        let rounds = (0..=self.original.rounds())
            .rev()
            .find(|&r| done(r) <= history.len())
            .unwrap_or(0);
        let bits = history.bits();
        self.original
            .history_from_bits(&bits.select(&self.positions[..self.original.history_len(rounds)]))
    }

    /// Sub-round indices belonging to round `r` of `G`.
    pub fn subrounds_of(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.subrounds
            .iter()
            .enumerate()
            .filter(move |(_, (g, _))| *g == r)
            .map(|(t, _)| t)
    }

    /// Whether the transform changed nothing but views and element grouping.
    pub fn is_trivial(&self) -> bool {
        self.subrounds.len() == self.original.rounds()
    }
}

/// Widths of `G_S` and the positions they induce.
struct Layout {
    qw: Vec<Vec<usize>>,
    aw: Vec<Vec<usize>>,
    starts: Vec<usize>,
}

impl Layout {
    fn new(qw: Vec<Vec<usize>>, aw: Vec<Vec<usize>>) -> Self {
        let mut starts = vec![0];
        for (q, a) in qw.iter().zip(&aw) {
            let last = *starts.last().unwrap();
            starts.push(last + q.iter().sum::<usize>() + a.iter().sum::<usize>());
        }
        Layout { qw, aw, starts }
    }

    fn question_bit(&self, t: usize, i: usize, j: usize) -> usize {
        self.starts[t] + self.qw[t][..i].iter().sum::<usize>() + j
    }

    fn answer_bit(&self, t: usize, i: usize, j: usize) -> usize {
        self.starts[t]
            + self.qw[t].iter().sum::<usize>()
            + self.aw[t][..i].iter().sum::<usize>()
            + j
    }
}

/// Builds `(G_S, S′)` from a strategy in the Clifford model (unrestricted
/// provers may also hold general gates).
pub fn delegate_postprocessing(
    protocol: &Protocol,
    strategy: &QuantumStrategy,
) -> Result<Delegated> {
    validate_model(strategy, protocol)?;
    let k = protocol.provers();
    let mut segments: Vec<Vec<Vec<Segment>>> = Vec::with_capacity(k);
    for prog in &strategy.provers {
        segments.push(
            prog.rounds
                .iter()
                .map(segment_round)
                .collect::<Result<_>>()?,
        );
    }
    // Pad every round to the same number of sub-rounds.
    let mut subrounds = Vec::new();
    for r in 0..protocol.rounds() {
        let l = segments.iter().map(|p| p[r].len()).max().unwrap_or(1);
        for p in segments.iter_mut() {
            p[r].resize(l, Segment::default());
        }
        subrounds.extend((0..l).map(|s| (r, s)));
    }

    let seg = |t: usize, i: usize| -> &Segment {
        let (r, s) = subrounds[t];
        &segments[i][r][s]
    };
    let mut qw = Vec::with_capacity(subrounds.len());
    let mut aw = Vec::with_capacity(subrounds.len());
    for (t, &(r, s)) in subrounds.iter().enumerate() {
        qw.push(
            (0..k)
                .map(|i| {
                    if s == 0 {
                        protocol.question_width(r, i)
                    } else {
                        seg(t - 1, i)
                            .post
                            .iter()
                            .map(|p| p.circuit.num_outputs())
                            .sum()
                    }
                })
                .collect::<Vec<usize>>(),
        );
        aw.push(
            (0..k)
                .map(|i| seg(t, i).measured.len())
                .collect::<Vec<usize>>(),
        );
    }
    let layout = Layout::new(qw.clone(), aw.clone());

    // Walk the sub-rounds, recording where each classical bit of `S` lands
    // and building the verifier's post-processing circuits.
    let mut cbit_pos: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut question_pos: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); k]; protocol.rounds()];
    let mut computed: BTreeMap<usize, BoolCircuit> = BTreeMap::new();
    for (t, &(r, s)) in subrounds.iter().enumerate() {
        if s == 0 {
            for (i, qp) in question_pos[r].iter_mut().enumerate() {
                *qp = (0..qw[t][i])
                    .map(|j| layout.question_bit(t, i, j))
                    .collect();
            }
        } else {
            let mut b = CircuitBuilder::new(layout.starts[t]);
            let mut outputs = Vec::new();
            for (i, positions) in cbit_pos.iter_mut().enumerate() {
                let steps = &seg(t - 1, i).post;
                let widths: Vec<usize> = steps.iter().map(|p| p.circuit.num_outputs()).collect();
                let mut batch: BTreeMap<usize, usize> = BTreeMap::new();
                let mut wires = Vec::with_capacity(steps.len());
                for (j, step) in steps.iter().enumerate() {
                    let args: Vec<usize> = step
                        .inputs
                        .iter()
                        .map(|c| batch.get(c).copied().unwrap_or_else(|| positions[*c]))
                        .collect();
                    let out = b.inline(&step.circuit, &args)?;
                    let offset: usize = widths[j + 1..].iter().sum();
                    for (bit, &w) in out.iter().enumerate() {
                        batch.insert(positions.len(), w);
                        positions.push(layout.question_bit(t, i, offset + bit));
                    }
                    wires.push(out);
                }
                for w in wires.iter().rev() {
                    outputs.extend_from_slice(w);
                }
            }
            computed.insert(t, b.finish(outputs)?);
        }
        for (i, positions) in cbit_pos.iter_mut().enumerate() {
            for j in 0..aw[t][i] {
                positions.push(layout.answer_bit(t, i, j));
            }
        }
    }

    let mut g_positions = Vec::with_capacity(protocol.history_len(protocol.rounds()));
    for (r, qps) in question_pos.iter().enumerate() {
        for qp in qps {
            g_positions.extend_from_slice(qp);
        }
        for (i, prog) in strategy.provers.iter().enumerate() {
            g_positions.extend(prog.rounds[r].answer.iter().map(|&c| cbit_pos[i][c]));
        }
    }

    // Views keep reading the whole history only when nothing moved.
    let project =
        |view: &Option<Vec<usize>>, visible: usize, visible_s: usize| -> Option<Vec<usize>> {
            match view {
                Some(v) => Some(v.iter().map(|&b| g_positions[b]).collect()),
                None if visible == visible_s
                    && g_positions[..visible].iter().copied().eq(0..visible) =>
                {
                    None
                }
                None => Some(g_positions[..visible].to_vec()),
            }
        };

    let mut rules = Vec::with_capacity(subrounds.len());
    for (t, &(r, s)) in subrounds.iter().enumerate() {
        if s == 0 {
            let (visible, visible_s) = (protocol.history_len(r), layout.starts[t]);
            rules.push(match &protocol.rules()[r] {
                QuestionRule::Table { view, rows } => QuestionRule::Table {
                    view: project(view, visible, visible_s),
                    rows: rows.clone(),
                },
                QuestionRule::Computed { view, circuit } => QuestionRule::Computed {
                    view: project(view, visible, visible_s),
                    circuit: circuit.clone(),
                },
            });
        } else {
            rules.push(QuestionRule::Computed {
                view: None,
                circuit: computed
                    .remove(&t)
                    .expect("circuit built for every later sub-round"),
            });
        }
    }
    let total = protocol.history_len(protocol.rounds());
    let predicate = Predicate {
        view: project(
            &protocol.predicate().view,
            total,
            *layout.starts.last().unwrap(),
        ),
        kind: protocol.predicate().kind.clone(),
    };
    let g_s = Protocol::new(k, qw, aw.clone(), rules, predicate)?;

    let mut provers = Vec::with_capacity(k);
    for (i, prog) in strategy.provers.iter().enumerate() {
        let mut rounds = Vec::with_capacity(subrounds.len());
        let mut cbits = 0;
        for t in 0..subrounds.len() {
            let sg = seg(t, i);
            let mut elements = sg.gates.clone();
            if !sg.measured.is_empty() {
                elements.push(Element::Measure(sg.measured.clone()));
            }
            let m = sg.measured.len();
            rounds.push(RoundProgram {
                elements,
                answer: (cbits..cbits + m).collect(),
            });
            cbits += m;
        }
        provers.push(ProverProgram {
            unrestricted: prog.unrestricted,
            rounds,
        });
    }
    let s_prime = QuantumStrategy {
        shared_state: strategy.shared_state.clone(),
        shares: strategy.shares.clone(),
        provers,
    };
    validate_model(&s_prime, &g_s)?;
    Ok(Delegated {
        original: protocol.clone(),
        protocol: g_s,
        strategy: s_prime,
        subrounds,
        segments,
        positions: g_positions,
    })
}

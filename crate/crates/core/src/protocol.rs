//! Interactive protocols, histories and the verifier.
//!
//! The canonical bit layout of a history lists, round by round, every
//! prover's question block followed by every prover's answer block. Question
//! rules and the acceptance predicate read a *view*: a list of positions in
//! that layout. Table keys are the viewed bits in hex.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::boolcircuit::BoolCircuit;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Row sums of question tables must be 1 within this tolerance.
pub const ROW_TOL: f64 = 1e-12;
/// Truth tables larger than `2^MAX_TABLE_INPUTS` entries are refused.
pub const MAX_TABLE_INPUTS: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Round {
    pub questions: Vec<BitString>,
    pub answers: Vec<BitString>,
}

/// A transcript `h^r`: per round, one question and one answer per prover.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct History {
    rounds: Vec<Round>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn push(&mut self, questions: Vec<BitString>, answers: Vec<BitString>) {
        self.rounds.push(Round { questions, answers });
    }

    pub fn truncated(&self, rounds: usize) -> History {
        History {
            rounds: self.rounds[..rounds.min(self.rounds.len())].to_vec(),
        }
    }

    /// Canonical bit layout.
    pub fn bits(&self) -> BitString {
        let mut out = BitString::zeros(0);
        for r in &self.rounds {
            for q in &r.questions {
                out.extend_from(q);
            }
            for a in &r.answers {
                out.extend_from(a);
            }
        }
        out
    }

    /// The local history `h_i^r`: prover `i`'s questions and answers.
    pub fn local_view(&self, i: usize) -> LocalHistory {
        LocalHistory {
            rounds: self
                .rounds
                .iter()
                .map(|r| (r.questions[i].clone(), r.answers[i].clone()))
                .collect(),
        }
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, r) in self.rounds.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            let q: Vec<String> = r.questions.iter().map(|b| b.to_string()).collect();
            let a: Vec<String> = r.answers.iter().map(|b| b.to_string()).collect();
            write!(f, "[{}|{}]", q.join(","), a.join(","))?;
        }
        Ok(())
    }
}

/// One prover's view of a history: its own `(question, answer)` per round.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalHistory {
    pub rounds: Vec<(BitString, BitString)>,
}

impl LocalHistory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn push(&mut self, q: BitString, a: BitString) {
        self.rounds.push((q, a));
    }

    pub fn bits(&self) -> BitString {
        let mut out = BitString::zeros(0);
        for (q, a) in &self.rounds {
            out.extend_from(q);
            out.extend_from(a);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuestionRule {
    /// Rows keyed by the hex of the viewed history bits; `"*"` matches any
    /// key without its own row.
    Table {
        view: Option<Vec<usize>>,
        rows: BTreeMap<String, Vec<(BitString, f64)>>,
    },
    /// Deterministic questions computed from the viewed history.
    Computed {
        view: Option<Vec<usize>>,
        circuit: BoolCircuit,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredicateKind {
    /// Entry `j` is the verdict when the viewed bits, read with bit 0 least
    /// significant, equal `j`.
    TruthTable(BitString),
    Circuit(BoolCircuit),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub view: Option<Vec<usize>>,
    pub kind: PredicateKind,
}

impl Predicate {
    fn input_len(&self, total: usize) -> usize {
        self.view.as_ref().map_or(total, Vec::len)
    }

    pub fn eval(&self, bits: &BitString) -> Result<bool> {
        let input = match &self.view {
            Some(v) => bits.select(v),
            None => bits.clone(),
        };
        match &self.kind {
            PredicateKind::TruthTable(t) => Ok(t.get(input.to_u64() as usize)),
            PredicateKind::Circuit(c) => Ok(c.eval(&input)?.get(0)),
        }
    }
}

/// `(K, R, s, t, π, v)` with widths per round and prover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProtocol", into = "RawProtocol")]
pub struct Protocol {
    provers: usize,
    rounds: usize,
    question_widths: Vec<Vec<usize>>,
    answer_widths: Vec<Vec<usize>>,
    rules: Vec<QuestionRule>,
    predicate: Predicate,
}

impl Protocol {
    pub fn new(
        provers: usize,
        question_widths: Vec<Vec<usize>>,
        answer_widths: Vec<Vec<usize>>,
        rules: Vec<QuestionRule>,
        predicate: Predicate,
    ) -> Result<Self> {
        let p = Protocol {
            provers,
            rounds: rules.len(),
            question_widths,
            answer_widths,
            rules,
            predicate,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let (k, r) = (self.provers, self.rounds);
        if k == 0 {
            return Err(Error::Protocol(
                "a protocol needs at least one prover".into(),
            ));
        }
        for (what, w) in [
            ("question widths", &self.question_widths),
            ("answer widths", &self.answer_widths),
        ] {
            if w.len() != r {
                return Err(Error::width(format!("{what} rounds"), r, w.len()));
            }
            if let Some(row) = w.iter().find(|row| row.len() != k) {
                return Err(Error::width(format!("{what} per round"), k, row.len()));
            }
        }
        for (round, rule) in self.rules.iter().enumerate() {
            let visible = self.history_len(round);
            let qw = self.round_question_len(round);
            let check_view = |view: &Option<Vec<usize>>| -> Result<usize> {
                match view {
                    Some(v) => {
                        if let Some(&b) = v.iter().find(|&&b| b >= visible) {
                            return Err(Error::Protocol(format!(
                                "round {round} view reads bit {b}, only {visible} are visible"
                            )));
                        }
                        Ok(v.len())
                    }
                    None => Ok(visible),
                }
            };
            match rule {
                QuestionRule::Table { view, rows } => {
                    let vlen = check_view(view)?;
                    if rows.is_empty() {
                        return Err(Error::Protocol(format!(
                            "round {round} has no question rows"
                        )));
                    }
                    for (key, row) in rows {
                        if key != "*" {
                            BitString::from_hex(key, vlen)?;
                        }
                        let mut sum = 0.0;
                        for (q, p) in row {
                            if q.len() != qw {
                                return Err(Error::width(
                                    format!("round {round} question block"),
                                    qw,
                                    q.len(),
                                ));
                            }
                            if !(p.is_finite() && *p >= 0.0) {
                                return Err(Error::Protocol(format!(
                                    "round {round} row {key:?} has probability {p}"
                                )));
                            }
                            sum += p;
                        }
                        if (sum - 1.0).abs() > ROW_TOL {
                            return Err(Error::Protocol(format!(
                                "round {round} row {key:?} sums to {sum}"
                            )));
                        }
                    }
                }
                QuestionRule::Computed { view, circuit } => {
                    let vlen = check_view(view)?;
                    if circuit.inputs() != vlen {
                        return Err(Error::width(
                            format!("round {round} question circuit inputs"),
                            vlen,
                            circuit.inputs(),
                        ));
                    }
                    if circuit.num_outputs() != qw {
                        return Err(Error::width(
                            format!("round {round} question circuit outputs"),
                            qw,
                            circuit.num_outputs(),
                        ));
                    }
                }
            }
        }
        let total = self.history_len(r);
        if let Some(v) = &self.predicate.view {
            if let Some(&b) = v.iter().find(|&&b| b >= total) {
                return Err(Error::Protocol(format!(
                    "predicate reads bit {b} of a {total}-bit history"
                )));
            }
        }
        let m = self.predicate.input_len(total);
        match &self.predicate.kind {
            PredicateKind::TruthTable(t) => {
                if m > MAX_TABLE_INPUTS {
                    return Err(Error::Protocol(format!(
                        "truth table over {m} bits is too large"
                    )));
                }
                if t.len() != 1 << m {
                    return Err(Error::width("truth table", 1 << m, t.len()));
                }
            }
            PredicateKind::Circuit(c) => {
                if c.inputs() != m {
                    return Err(Error::width("predicate circuit inputs", m, c.inputs()));
                }
                if c.num_outputs() != 1 {
                    return Err(Error::width(
                        "predicate circuit outputs",
                        1,
                        c.num_outputs(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn provers(&self) -> usize {
        self.provers
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn question_width(&self, round: usize, prover: usize) -> usize {
        self.question_widths[round][prover]
    }

    pub fn answer_width(&self, round: usize, prover: usize) -> usize {
        self.answer_widths[round][prover]
    }

    pub fn question_widths(&self) -> &[Vec<usize>] {
        &self.question_widths
    }

    pub fn answer_widths(&self) -> &[Vec<usize>] {
        &self.answer_widths
    }

    pub fn rules(&self) -> &[QuestionRule] {
        &self.rules
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    pub fn round_question_len(&self, round: usize) -> usize {
        self.question_widths[round].iter().sum()
    }

    pub fn round_answer_len(&self, round: usize) -> usize {
        self.answer_widths[round].iter().sum()
    }

    /// Bits in a history of the first `rounds` rounds.
    pub fn history_len(&self, rounds: usize) -> usize {
        (0..rounds)
            .map(|r| self.round_question_len(r) + self.round_answer_len(r))
            .sum()
    }

    /// Position of question bit `j` of prover `i` in round `r`.
    pub fn question_bit(&self, r: usize, i: usize, j: usize) -> usize {
        self.history_len(r) + self.question_widths[r][..i].iter().sum::<usize>() + j
    }

    /// Position of answer bit `j` of prover `i` in round `r`.
    pub fn answer_bit(&self, r: usize, i: usize, j: usize) -> usize {
        self.history_len(r)
            + self.round_question_len(r)
            + self.answer_widths[r][..i].iter().sum::<usize>()
            + j
    }

    fn split(widths: &[usize], block: &BitString) -> Vec<BitString> {
        let mut out = Vec::with_capacity(widths.len());
        let mut at = 0;
        for &w in widths {
            out.push(block.slice(at..at + w));
            at += w;
        }
        out
    }

    pub fn check_history(&self, history: &History) -> Result<()> {
        if history.len() > self.rounds {
            return Err(Error::width("history rounds", self.rounds, history.len()));
        }
        for (r, round) in history.rounds().iter().enumerate() {
            self.check_block(r, &round.questions, &self.question_widths[r], "question")?;
            self.check_block(r, &round.answers, &self.answer_widths[r], "answer")?;
        }
        Ok(())
    }

    fn check_block(
        &self,
        r: usize,
        block: &[BitString],
        widths: &[usize],
        what: &str,
    ) -> Result<()> {
        if block.len() != self.provers {
            return Err(Error::width(
                format!("round {r} {what} count"),
                self.provers,
                block.len(),
            ));
        }
        for (i, (b, &w)) in block.iter().zip(widths).enumerate() {
            if b.len() != w {
                return Err(Error::width(
                    format!("round {r} prover {i} {what}"),
                    w,
                    b.len(),
                ));
            }
        }
        Ok(())
    }

    pub fn check_answers(&self, r: usize, answers: &[BitString]) -> Result<()> {
        self.check_block(r, answers, &self.answer_widths[r], "answer")
    }

    /// `π_r(· | h^{r-1})` as a list of question tuples and probabilities.
    pub fn question_distribution(
        &self,
        r: usize,
        history: &History,
    ) -> Result<Vec<(Vec<BitString>, f64)>> {
        if history.len() != r {
            return Err(Error::width(
                "history rounds before sampling",
                r,
                history.len(),
            ));
        }
        if r >= self.rounds {
            return Err(Error::IndexOutOfRange {
                index: r,
                bound: self.rounds,
                what: "rounds",
            });
        }
        let bits = history.bits();
        let viewed = |view: &Option<Vec<usize>>| match view {
            Some(v) => bits.select(v),
            None => bits.clone(),
        };
        let widths = &self.question_widths[r];
        match &self.rules[r] {
            QuestionRule::Table { view, rows } => {
                let key = viewed(view).to_hex();
                let row = rows
                    .get(&key)
                    .or_else(|| rows.get("*"))
                    .ok_or(Error::MissingRow { round: r, key })?;
                Ok(row
                    .iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(q, p)| (Self::split(widths, q), *p))
                    .collect())
            }
            QuestionRule::Computed { view, circuit } => {
                let q = circuit.eval(&viewed(view))?;
                Ok(vec![(Self::split(widths, &q), 1.0)])
            }
        }
    }

    /// Inverse of [`History::bits`] for a history of whole rounds.
    pub fn history_from_bits(&self, bits: &BitString) -> Result<History> {
        let rounds = (0..=self.rounds)
            .rev()
            .find(|&r| self.history_len(r) == bits.len())
            .ok_or_else(|| {
                Error::Protocol(format!("{} bits do not form whole rounds", bits.len()))
            })?;
        let mut history = History::new();
        let mut at = 0;
        for r in 0..rounds {
            let mut take = |widths: &[usize]| {
                widths
                    .iter()
                    .map(|&w| {
                        at += w;
                        bits.slice(at - w..at)
                    })
                    .collect::<Vec<_>>()
            };
            let q = take(&self.question_widths[r]);
            let a = take(&self.answer_widths[r]);
            history.push(q, a);
        }
        Ok(history)
    }

    pub fn sample_questions(
        &self,
        r: usize,
        history: &History,
        rng: &mut SplitMix64,
    ) -> Result<Vec<BitString>> {
        let mut dist = self.question_distribution(r, history)?;
        if dist.len() == 1 {
            return Ok(dist.pop().unwrap().0);
        }
        let weights: Vec<f64> = dist.iter().map(|(_, p)| *p).collect();
        let k = rng.choose_weighted(&weights);
        Ok(dist.swap_remove(k).0)
    }

    /// `v(h^R)`.
    pub fn accepts(&self, history: &History) -> Result<bool> {
        self.check_history(history)?;
        if history.len() != self.rounds {
            return Err(Error::width("history rounds", self.rounds, history.len()));
        }
        self.predicate.eval(&history.bits())
    }
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWidths {
    Scalar(usize),
    PerRound(Vec<usize>),
    Full(Vec<Vec<usize>>),
}

impl RawWidths {
    fn expand(self, k: usize, r: usize, what: &str) -> Result<Vec<Vec<usize>>> {
        Ok(match self {
            RawWidths::Scalar(w) => vec![vec![w; k]; r],
            RawWidths::PerRound(ws) => {
                if ws.len() != r {
                    return Err(Error::width(format!("{what} rounds"), r, ws.len()));
                }
                ws.into_iter().map(|w| vec![w; k]).collect()
            }
            RawWidths::Full(ws) => ws,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawRow {
    questions: BitString,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    history_key: String,
    row: Vec<RawRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawRule {
    Entries(Vec<RawEntry>),
    Object {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        view: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<RawEntry>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        computed: Option<BoolCircuit>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    view: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth_table: Option<BitString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circuit: Option<BoolCircuit>,
}

#[derive(Serialize, Deserialize)]
struct RawProtocol {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "R")]
    r: usize,
    s: RawWidths,
    t: RawWidths,
    pi: Vec<RawRule>,
    v: RawPredicate,
}

fn table_rows(entries: Vec<RawEntry>) -> Result<BTreeMap<String, Vec<(BitString, f64)>>> {
    let mut rows = BTreeMap::new();
    for e in entries {
        let row = e.row.into_iter().map(|r| (r.questions, r.p)).collect();
        if rows.insert(e.history_key.clone(), row).is_some() {
            return Err(Error::Protocol(format!(
                "duplicate history key {:?}",
                e.history_key
            )));
        }
    }
    Ok(rows)
}

impl TryFrom<RawProtocol> for Protocol {
    type Error = Error;

    fn try_from(raw: RawProtocol) -> Result<Self> {
        if raw.pi.len() != raw.r {
            return Err(Error::width("question rules", raw.r, raw.pi.len()));
        }
        let s = raw.s.expand(raw.k, raw.r, "question widths")?;
        let t = raw.t.expand(raw.k, raw.r, "answer widths")?;
        let rules = raw
            .pi
            .into_iter()
            .map(|rule| match rule {
                RawRule::Entries(entries) => Ok(QuestionRule::Table {
                    view: None,
                    rows: table_rows(entries)?,
                }),
                RawRule::Object {
                    view,
                    table,
                    computed,
                } => match (table, computed) {
                    (Some(entries), None) => Ok(QuestionRule::Table {
                        view,
                        rows: table_rows(entries)?,
                    }),
                    (None, Some(circuit)) => Ok(QuestionRule::Computed { view, circuit }),
                    _ => Err(Error::Protocol(
                        "a round needs exactly one of `table` or `computed`".into(),
                    )),
                },
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = match (raw.v.truth_table, raw.v.circuit) {
            (Some(t), None) => PredicateKind::TruthTable(t),
            (None, Some(c)) => PredicateKind::Circuit(c),
            _ => {
                return Err(Error::Protocol(
                    "`v` needs exactly one of `truth_table` or `circuit`".into(),
                ))
            }
        };
        Protocol::new(
            raw.k,
            s,
            t,
            rules,
            Predicate {
                view: raw.v.view,
                kind,
            },
        )
    }
}

impl From<Protocol> for RawProtocol {
    fn from(p: Protocol) -> Self {
        let pi = p
            .rules
            .into_iter()
            .map(|rule| match rule {
                QuestionRule::Table { view, rows } => RawRule::Object {
                    view,
                    table: Some(
                        rows.into_iter()
                            .map(|(history_key, row)| RawEntry {
                                history_key,
                                row: row
                                    .into_iter()
                                    .map(|(questions, p)| RawRow { questions, p })
                                    .collect(),
                            })
                            .collect(),
                    ),
                    computed: None,
                },
                QuestionRule::Computed { view, circuit } => RawRule::Object {
                    view,
                    table: None,
                    computed: Some(circuit),
                },
            })
            .collect();
        let (truth_table, circuit) = match p.predicate.kind {
            PredicateKind::TruthTable(t) => (Some(t), None),
            PredicateKind::Circuit(c) => (None, Some(c)),
        };
        RawProtocol {
            k: p.provers,
            r: p.rounds,
            s: RawWidths::Full(p.question_widths),
            t: RawWidths::Full(p.answer_widths),
            pi,
            v: RawPredicate {
                view: p.predicate.view,
                truth_table,
                circuit,
            },
        }
    }
}

impl Protocol {
    pub fn from_json(text: &str) -> Result<Protocol> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHSH: &str = r#"{
        "K": 2, "R": 1, "s": 1, "t": 1,
        "pi": [[{"history_key": "", "row": [
            {"questions": "00", "p": 0.25}, {"questions": "01", "p": 0.25},
            {"questions": "10", "p": 0.25}, {"questions": "11", "p": 0.25}]}]],
        "v": {"circuit": {"inputs": 4,
            "gates": [{"and": [0, 1]}, {"xor": [2, 3, 4]}, {"not": 5}],
            "outputs": [6]}}
    }"#;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn chsh() -> Protocol {
        Protocol::from_json(CHSH).unwrap()
    }

    #[test]
    fn chsh_shape_and_predicate() {
        let p = chsh();
        assert_eq!((p.provers(), p.rounds()), (2, 1));
        assert_eq!(p.question_width(0, 1), 1);
        let mut wins = 0;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let mut h = History::new();
                h.push(
                    vec![BitString::from_u64(x, 1), BitString::from_u64(y, 1)],
                    vec![bits("0"), bits("0")],
                );
                wins += p.accepts(&h).unwrap() as u32;
            }
        }
        assert_eq!(wins, 3);
    }

    #[test]
    fn json_round_trip() {
        let p = chsh();
        let q = Protocol::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn single_row_is_certain() {
        let text = r#"{"K":1,"R":1,"s":2,"t":1,
            "pi":[[{"history_key":"","row":[{"questions":"10","p":1.0}]}]],
            "v":{"truth_table":"01010101"}}"#;
        let p = Protocol::from_json(text).unwrap();
        let mut rng = SplitMix64::new(0);
        for _ in 0..10 {
            assert_eq!(
                p.sample_questions(0, &History::new(), &mut rng).unwrap(),
                vec![bits("10")]
            );
        }
    }

    #[test]
    fn uniform_table_frequencies() {
        let p = chsh();
        let mut rng = SplitMix64::new(5);
        let n = 100_000;
        let mut counts = BTreeMap::new();
        for _ in 0..n {
            let q = p.sample_questions(0, &History::new(), &mut rng).unwrap();
            *counts.entry(q).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma + 1.0);
        }
    }

    #[test]
    fn answer_dependent_rows() {
        // Round 2 asks the round-1 answer back.
        let text = r#"{"K":1,"R":2,"s":1,"t":1,
            "pi":[[{"history_key":"","row":[{"questions":"0","p":1.0}]}],
                  {"view":[1],"table":[
                      {"history_key":"0","row":[{"questions":"0","p":1.0}]},
                      {"history_key":"8","row":[{"questions":"1","p":1.0}]}]}],
            "v":{"view":[2],"truth_table":"01"}}"#;
        let p = Protocol::from_json(text).unwrap();
        let mut h = History::new();
        h.push(vec![bits("0")], vec![bits("1")]);
        let d = p.question_distribution(1, &h).unwrap();
        assert_eq!(d, vec![(vec![bits("1")], 1.0)]);
        let mut rng = SplitMix64::new(1);
        assert_eq!(
            p.sample_questions(1, &h, &mut rng).unwrap(),
            vec![bits("1")]
        );
    }

    #[test]
    fn validation_errors() {
        let bad_sum = CHSH.replace(
            "\"p\": 0.25}, {\"questions\": \"01\"",
            "\"p\": 0.5}, {\"questions\": \"01\"",
        );
        assert!(Protocol::from_json(&bad_sum).is_err());
        let bad_width = CHSH.replace("\"questions\": \"00\"", "\"questions\": \"000\"");
        assert!(Protocol::from_json(&bad_width).is_err());
        let text = r#"{"K":1,"R":1,"s":1,"t":1,
            "pi":[[{"history_key":"f","row":[{"questions":"0","p":1.0}]}]],
            "v":{"truth_table":"01"}}"#;
        assert!(Protocol::from_json(text).is_err());
    }

    #[test]
    fn missing_row_is_reported() {
        let text = r#"{"K":1,"R":2,"s":1,"t":1,
            "pi":[[{"history_key":"","row":[{"questions":"0","p":1.0}]}],
                  [{"history_key":"0","row":[{"questions":"0","p":1.0}]}]],
            "v":{"view":[],"truth_table":"1"}}"#;
        let p = Protocol::from_json(text).unwrap();
        let mut h = History::new();
        h.push(vec![bits("0")], vec![bits("1")]);
        assert!(matches!(
            p.question_distribution(1, &h),
            Err(Error::MissingRow { .. })
        ));
    }

    #[test]
    fn local_view_projects() {
        let mut h = History::new();
        h.push(vec![bits("1"), bits("0")], vec![bits("01"), bits("1")]);
        h.push(vec![bits("0"), bits("1")], vec![bits("1"), bits("0")]);
        let l = h.local_view(0);
        assert_eq!(l.len(), 2);
        assert_eq!(l.rounds[0], (bits("1"), bits("01")));
        assert_eq!(l.rounds[1], (bits("0"), bits("1")));
        let mut single = History::new();
        single.push(vec![bits("1")], vec![bits("0")]);
        assert_eq!(single.local_view(0).bits(), single.bits());
    }

    #[test]
    fn bit_positions() {
        let p = chsh();
        assert_eq!(p.question_bit(0, 1, 0), 1);
        assert_eq!(p.answer_bit(0, 0, 0), 2);
        assert_eq!(p.history_len(1), 4);
    }
}

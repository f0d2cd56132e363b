use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl From<cmip_core::distribution::ChiSquare> for ChiSquareReport {
    fn from(c: cmip_core::distribution::ChiSquare) -> Self {
        ChiSquareReport {
            statistic: c.statistic,
            dof: c.dof,
            p_value: c.p_value,
        }
    }
}

/// Result of one command. Fields that do not apply stay `None` and are
/// left out of both renderings.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub game: String,
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    pub seed: u64,
    /// `"exact"` or the number of shots.
    pub runs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub win_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_most: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<ChiSquareReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: &'static str, game: &str, strategy: &str, seed: u64, runs: String) -> Self {
        RunReport {
            command,
            game: game.to_string(),
            strategy: strategy.to_string(),
            against: None,
            seed,
            runs,
            value: None,
            win_rate: None,
            std_error: None,
            expected: None,
            at_most: None,
            tv: None,
            chi_square: None,
            notes: Vec::new(),
            trace: Vec::new(),
            verdict: Verdict::Pass,
            wall_time_s: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable lines followed by the JSON block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k:<12}{v}");
        };
        line("command", &self.command);
        line("game", &self.game);
        line("strategy", &self.strategy);
        if let Some(a) = &self.against {
            line("against", a);
        }
        line("seed", &self.seed);
        line("runs", &self.runs);
        let fields = [
            ("value", self.value),
            ("win rate", self.win_rate),
            ("std error", self.std_error),
            ("expected", self.expected),
            ("at most", self.at_most),
            ("tv", self.tv),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                line(k, &v);
            }
        }
        if let Some(c) = &self.chi_square {
            line(
                "chi-square",
                &format_args!("{} (dof {}, p = {})", c.statistic, c.dof, c.p_value),
            );
        }
        for n in &self.notes {
            line("note", n);
        }
        for t in &self.trace {
            line("trace", t);
        }
        if let Some(t) = self.wall_time_s {
            line("wall time", &format_args!("{t:.3}s"));
        }
        line(
            "verdict",
            &format_args!("{:?}", self.verdict)
                .to_string()
                .to_uppercase(),
        );
        out.push_str("--- json\n");
        out.push_str(&self.to_json());
        out.push('\n');
        out
    }
}

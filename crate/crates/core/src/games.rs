//! Built-in games with reference strategies.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::protocol::Protocol;
use crate::strategy::Strategy;

struct Embedded {
    name: &'static str,
    manifest: &'static str,
    files: &'static [(&'static str, &'static str)],
}

macro_rules! embed {
    ($name:literal, [$($file:literal),* $(,)?]) => {
        Embedded {
            name: $name,
            manifest: include_str!(concat!("../games/", $name, "/game.json")),
            files: &[$(($file, include_str!(concat!("../games/", $name, "/", $file)))),*],
        }
    };
}

const GAMES: &[Embedded] = &[
    embed!(
        "chsh",
        [
            "protocol.json",
            "classical_best.json",
            "quantum_optimal.json",
            "clifford_only.json",
            "one_nonclifford.json",
        ]
    ),
    embed!(
        "ghz3",
        [
            "protocol.json",
            "classical_best.json",
            "quantum_perfect.json",
            "one_unrestricted.json"
        ]
    ),
    embed!(
        "two_round_toy",
        [
            "protocol.json",
            "delegating.json",
            "plain.json",
            "classical_zero.json"
        ]
    ),
];

#[derive(Deserialize)]
struct Manifest {
    name: String,
    description: String,
    protocol: String,
    strategies: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    name: String,
    file: String,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    at_most: Option<f64>,
}

/// What a bundled strategy is expected to achieve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Expected {
    /// Exact game value.
    pub value: Option<f64>,
    /// Upper bound on the game value.
    pub at_most: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BundledStrategy {
    pub name: String,
    pub strategy: Strategy,
    pub expected: Expected,
}

#[derive(Clone, Debug)]
pub struct GameBundle {
    pub name: String,
    pub description: String,
    pub protocol: Protocol,
    pub strategies: Vec<BundledStrategy>,
}

impl GameBundle {
    pub fn strategy(&self, name: &str) -> Result<&BundledStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownGame(format!("{}/{name}", self.name)))
    }
}

/// Names of the built-in games.
pub fn list() -> Vec<&'static str> {
    GAMES.iter().map(|g| g.name).collect()
}

pub fn load_bundle(name: &str) -> Result<GameBundle> {
    let game = GAMES
        .iter()
        .find(|g| g.name == name)
        .ok_or_else(|| Error::UnknownGame(name.to_string()))?;
    let file = |f: &str| {
        game.files
            .iter()
            .find(|(n, _)| *n == f)
            .map(|(_, text)| *text)
            .ok_or_else(|| Error::UnknownGame(format!("{name}/{f}")))
    };
    let manifest: Manifest = serde_json::from_str(game.manifest)?;
    let protocol = Protocol::from_json(file(&manifest.protocol)?)?;
    let mut strategies = Vec::with_capacity(manifest.strategies.len());
    for entry in manifest.strategies {
        let strategy = Strategy::from_json(file(&entry.file)?)?;
        if let Strategy::Quantum(q) = &strategy {
            crate::strategy::validate_model(q, &protocol)?;
        }
        strategies.push(BundledStrategy {
            name: entry.name,
            strategy,
            expected: Expected {
                value: entry.value,
                at_most: entry.at_most,
            },
        });
    }
    Ok(GameBundle {
        name: manifest.name,
        description: manifest.description,
        protocol,
        strategies,
    })
}

/// Best value over deterministic classical strategies of a single-round
/// game, by enumeration.
pub fn classical_value_brute_force(protocol: &Protocol) -> Result<f64> {
    use crate::protocol::History;
    if protocol.rounds() != 1 {
        return Err(Error::Unsupported(
            "brute force covers single-round games".into(),
        ));
    }
    let k = protocol.provers();
    let questions = protocol.question_distribution(0, &History::new())?;
    let (s, t): (Vec<usize>, Vec<usize>) = (0..k)
        .map(|i| (protocol.question_width(0, i), protocol.answer_width(0, i)))
        .unzip();
    // A deterministic prover is a table from its 2^s questions to t-bit answers.
    let table_bits: Vec<usize> = (0..k).map(|i| t[i] << s[i]).collect();
    let total: usize = table_bits.iter().sum();
    if total > 24 {
        return Err(Error::Unsupported(format!(
            "{total} table bits are too many to enumerate"
        )));
    }
    let mut best: f64 = 0.0;
    for code in 0u64..(1u64 << total) {
        let mut v = 0.0;
        for (qs, p) in &questions {
            let mut shift = 0;
            let mut answers = Vec::with_capacity(k);
            for i in 0..k {
                let entry = qs[i].to_u64() as usize;
                let at = shift + entry * t[i];
                answers.push(crate::bits::BitString::from_u64(
                    (code >> at) & ((1u64 << t[i]) - 1),
                    t[i],
                ));
                shift += table_bits[i];
            }
            let mut h = History::new();
            h.push(qs.clone(), answers);
            if protocol.accepts(&h)? {
                v += p;
            }
        }
        best = best.max(v);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::game_value;
    use crate::exec::{exact_history_distribution, ExecConfig};

    #[test]
    fn bundles_load_with_expected_shapes() {
        let chsh = load_bundle("chsh").unwrap();
        let p = &chsh.protocol;
        assert_eq!(
            (
                p.provers(),
                p.rounds(),
                p.question_width(0, 0),
                p.answer_width(0, 0)
            ),
            (2, 1, 1, 1)
        );
        let ghz = load_bundle("ghz3").unwrap();
        assert_eq!((ghz.protocol.provers(), ghz.protocol.rounds()), (3, 1));
        let toy = load_bundle("two_round_toy").unwrap();
        assert_eq!(toy.protocol.rounds(), 2);
        assert!(matches!(
            load_bundle("magic_square"),
            Err(Error::UnknownGame(_))
        ));
    }

    #[test]
    fn annotated_values_reproduce() {
        for name in list() {
            let b = load_bundle(name).unwrap();
            for s in &b.strategies {
                let d =
                    exact_history_distribution(&b.protocol, &s.strategy, &ExecConfig::default())
                        .unwrap();
                let v = game_value(&b.protocol, &d).unwrap();
                if let Some(e) = s.expected.value {
                    assert!((v - e).abs() < 1e-9, "{name}/{}: {v} vs {e}", s.name);
                }
                if let Some(m) = s.expected.at_most {
                    assert!(v <= m + 1e-9, "{name}/{}: {v} above {m}", s.name);
                }
            }
        }
    }

    #[test]
    fn classical_optima_by_enumeration() {
        let chsh = load_bundle("chsh").unwrap();
        assert!((classical_value_brute_force(&chsh.protocol).unwrap() - 0.75).abs() < 1e-12);
        let ghz = load_bundle("ghz3").unwrap();
        assert!((classical_value_brute_force(&ghz.protocol).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn controlled_ghz_needs_the_unrestricted_flag() {
        let b = load_bundle("ghz3").unwrap();
        let Strategy::Quantum(mut q) = b.strategy("quantum_perfect").unwrap().strategy.clone()
        else {
            panic!("quantum strategy expected");
        };
        q.provers[0].unrestricted = false;
        let err = crate::strategy::validate_model(&q, &b.protocol).unwrap_err();
        assert!(matches!(
            err,
            Error::ModelViolation {
                prover: 0,
                element: 1,
                ..
            }
        ));
    }
}

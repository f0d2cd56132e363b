//! Protocol and strategy loading: files on disk or bundled games by name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cmip_core::games::{self, Expected, GameBundle};
use cmip_core::{Protocol, Strategy};

pub struct Game {
    pub id: String,
    pub protocol: Protocol,
    bundle: Option<GameBundle>,
}

pub struct LoadedStrategy {
    pub id: String,
    pub strategy: Strategy,
    pub expected: Expected,
}

pub fn game(name: Option<&str>, file: Option<&Path>) -> Result<Game> {
    match (name, file) {
        (Some(_), Some(_)) => bail!("give either --game or --protocol, not both"),
        (None, None) => bail!("a protocol is required: --game NAME or --protocol FILE"),
        (Some(name), None) => {
            let bundle = games::load_bundle(name)
                .with_context(|| format!("bundled games: {}", games::list().join(", ")))?;
            Ok(Game {
                id: name.to_string(),
                protocol: bundle.protocol.clone(),
                bundle: Some(bundle),
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let protocol = Protocol::from_json(&text)
                .with_context(|| format!("parsing protocol {}", path.display()))?;
            Ok(Game {
                id: stem(path),
                protocol,
                bundle: None,
            })
        }
    }
}

/// `name_or_path` is a file path, or the name of a strategy of the bundled game.
pub fn strategy(name_or_path: &str, game: &Game) -> Result<LoadedStrategy> {
    let path = PathBuf::from(name_or_path);
    if path.is_file() {
        let strategy = Strategy::load(&path)
            .with_context(|| format!("parsing strategy {}", path.display()))?;
        if let Strategy::Quantum(q) = &strategy {
            cmip_core::strategy::validate_model(q, &game.protocol).with_context(|| {
                format!("strategy {} does not fit the protocol", path.display())
            })?;
        }
        return Ok(LoadedStrategy {
            id: stem(&path),
            strategy,
            expected: Expected::default(),
        });
    }
    let Some(bundle) = &game.bundle else {
        bail!("no strategy file {name_or_path}");
    };
    let b = bundle.strategy(name_or_path).with_context(|| {
        let names: Vec<&str> = bundle.strategies.iter().map(|s| s.name.as_str()).collect();
        format!("strategies of {}: {}", bundle.name, names.join(", "))
    })?;
    Ok(LoadedStrategy {
        id: b.name.clone(),
        strategy: b.strategy.clone(),
        expected: b.expected,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

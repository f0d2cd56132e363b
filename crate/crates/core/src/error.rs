use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for {bound} {what}")]
    IndexOutOfRange {
        index: usize,
        bound: usize,
        what: &'static str,
    },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("outcome has zero probability")]
    ZeroProbability,

    #[error("{needed} qubits exceed the dense-simulation cap of {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("{0} is not supported by the stabilizer backend")]
    NotStabilizer(String),

    #[error("prover {prover}, round {round}, element {element}: {reason}")]
    ModelViolation {
        prover: usize,
        round: usize,
        element: usize,
        reason: String,
    },

    #[error("width mismatch for {what}: expected {expected} bits, found {found}")]
    Width {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("no question row for history {key:?} in round {round}")]
    MissingRow { round: usize, key: String },

    #[error("invalid protocol: {0}")]
    Protocol(String),

    #[error("invalid strategy: {0}")]
    Strategy(String),

    #[error("invalid stabilizer generators: {0}")]
    Generators(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown game {0:?}")]
    UnknownGame(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn width(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Width {
            what: what.into(),
            expected,
            found,
        }
    }
}

use thiserror::Error;

/// Errors raised by the laboratory.
///
/// `Invariant` is reserved for internal consistency failures (a computed
/// structure violated one of its own guarantees); everything else is a
/// problem with the inputs or the configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate cube: no lattice points inside {0}")]
    DegenerateCube(String),
    #[error("diagonal point pair: x = y gives an infinite dyadic family")]
    DiagonalPair,
    #[error("max_level {given} too small, need at least {required}")]
    InsufficientDepth { required: u32, given: u32 },
    #[error("divergent tree-sum regime: alpha = {alpha} <= -n/2 = {bound}")]
    DivergentRegime { alpha: f64, bound: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

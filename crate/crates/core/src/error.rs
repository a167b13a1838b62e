use thiserror::Error;

use crate::privacy::PrivacyError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in vector at coordinate {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {d} too small: need d >= {min_d} for {vectors} problem vectors")]
    DimensionTooSmall { d: usize, min_d: usize, vectors: usize },

    #[error("cannot sample {requested} orthonormal vectors orthogonal to {existing} in dimension {d}")]
    SubspaceTooLarge { d: usize, requested: usize, existing: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("declared capacity {declared} bits is below the payload length {required} bits")]
    CapacityExceeded { declared: u64, required: u64 },

    #[error("instance is {beta}-smooth but the step size requires smoothness at most {limit}")]
    SmoothnessViolated { beta: f64, limit: f64 },

    #[error("subsolver failed in round {round}: {reason}")]
    Subsolver { round: usize, reason: String },

    #[error("iteration cap {cap} reached with certified gap {gap:e} above target {target:e}")]
    IterationCap { cap: usize, gap: f64, target: f64 },

    #[error(transparent)]
    Privacy(#[from] PrivacyError),

    #[error("malformed instance file: {0}")]
    Format(String),

    /// `line` is 1-based when the problem can be located in the file.
    #[error("config error{}: {message}", at_line(.line))]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    /// A configuration problem without a source location.
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

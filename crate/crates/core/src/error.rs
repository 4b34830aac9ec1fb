use thiserror::Error;

/// Errors raised by the measurement, decoding, and bound routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("stability index {0} outside (0, 2]")]
    InvalidAlpha(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid sparsity level {0}; need k >= 1")]
    InvalidSparsity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design mismatch: {0}")]
    DesignMismatch(String),

    #[error("restricted design is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("series did not converge (t = {t}, residual {residual:e})")]
    SeriesNotConverged { t: f64, residual: f64 },

    #[error("optimizer reached the t cap {cap}")]
    TCapReached { cap: f64 },

    #[error("no positive exponent available; sample complexity is unbounded")]
    Unbounded,

    #[error("iterate diverged at iteration {0}")]
    Diverged(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

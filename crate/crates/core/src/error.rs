use thiserror::Error;

/// Errors raised by the sampling, benchmark, tuning and statistics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {requested} exceeds the {supported} dimensions of the direction-number table")]
    UnsupportedDimension { requested: usize, supported: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{0}` has a fixed dimension")]
    FixedDimension(String),

    #[error("malformed direction-number table at line {line}: {reason}")]
    DirectionTable { line: usize, reason: String },

    #[error("sample variance is zero; the variance ratio is undefined")]
    DegenerateVariance,

    #[error("not enough data: {0}")]
    MissingData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

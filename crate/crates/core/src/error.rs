use thiserror::Error;

pub type Result<T> = std::result::Result<T, CfcError>;

#[derive(Debug, Error)]
pub enum CfcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index set too large: cardinality bound {bound:.3e} exceeds cap {cap}")]
    IndexSetTooLarge { bound: f64, cap: usize },

    #[error("not a lower set")]
    NotLower,

    #[error("duplicate column {0}")]
    DuplicateColumn(String),

    #[error("index {0} is not a column of the system")]
    UnknownColumn(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lower Riesz constant b_phi = {0} is not positive")]
    NonPositiveRieszBound(f64),

    #[error("zero denominator: exact solution vanishes on the evaluation sample")]
    ZeroDenominator,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Operands with incompatible shapes (e.g. state vs. observable qubits).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The sample admits no test statistic (zero variance, all-zero deltas).
    /// Callers decide how to classify such cells; returning an error keeps
    /// degenerate inputs from fabricating p-values of 0 or 1.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSample(msg.into())
    }
}

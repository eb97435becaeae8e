use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition on the numerical content of an argument
    /// does not hold (non-hermitian input, non-projector, spectrum off ±1, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

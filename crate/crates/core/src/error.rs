use thiserror::Error;

/// Errors raised by construction, validation and the checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input text (bad JSON, bad rational literal).
    #[error("parse error: {0}")]
    Parse(String),
    /// Input that is well-formed but violates a structural requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An exhaustive oracle was asked to examine more than its configured bound.
    #[error("oracle bound exceeded: {0}")]
    OracleBoundExceeded(String),
    /// The eigensolver hit its iteration cap. `partial` holds the eigenvalues
    /// that had already deflated, as `(re, im)` pairs.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        partial: Vec<(f64, f64)>,
    },
    /// A result that the construction guarantees could not be produced.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

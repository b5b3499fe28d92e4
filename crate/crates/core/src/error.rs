use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },

    #[error("group mismatch: expected {expected}, got {got}")]
    GroupMismatch { expected: String, got: String },

    /// The argument left the chart domain around the identity. Callers are
    /// expected to shrink steps (or report the escape as data).
    #[error("out of chart domain: {0}")]
    OutOfChartDomain(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on the inputs (e.g. C¹ smoothness) is not met.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

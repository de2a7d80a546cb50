//! Error type shared by all modules.

/// Errors raised by constructors and operations.
///
/// Validation of POVMs is report-valued (see [`crate::povm::ValidationReport`])
/// so that a caller can display every violated invariant at once; `Error` is
/// reserved for inputs that make an operation meaningless.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input violates a structural precondition (dimension mismatch,
    /// non-Hermitian matrix where one is required, malformed labels, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input is well-formed but outside the supported regime of the
    /// operation (e.g. a zero effect where full support is required).
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    /// A stated precondition of the operation does not hold for this input
    /// (e.g. constructing a broadcaster whose existence condition fails).
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionFailed(msg.into())
    }
}

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied arguments does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,

    /// The branch-and-bound enclosure ran out of budget (or hit the rounding
    /// floor) before the requested width was reached.
    #[error("enclosure [{lower}, {upper}] did not reach tolerance {tol}")]
    ToleranceNotReached { lower: f64, upper: f64, tol: f64 },

    /// A certificate that must hold by construction did not verify.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "invalid bracket [{left}, {right}]: endpoint values do not have strict opposite signs"
    )]
    InvalidBracket { left: f64, right: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

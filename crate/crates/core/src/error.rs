use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input that breaks a type invariant (zero deadline, duplicate target, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A caller-side precondition that the operation refuses to work around.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An exhaustive procedure was asked to run above its resource budget.
    #[error("{what}: size {actual} exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        cap: u64,
        actual: u64,
    },

    /// An internal invariant failed. Always a bug.
    #[error("internal invariant breached: {0}")]
    Internal(String),

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInstance(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

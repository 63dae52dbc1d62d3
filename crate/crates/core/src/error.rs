use thiserror::Error;

/// Errors raised by the library when a caller breaks an operation's contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("point outside operator domain{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    DomainViolation { step: Option<usize> },

    #[error("trajectory too short: need index {needed}, recorded up to {recorded}")]
    InsufficientLength { needed: u64, recorded: usize },

    #[error("cannot parse counterfunction `{input}`: {reason}")]
    CounterfunctionSyntax { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    /// Input passed the upstream checks but violates a condition those checks
    /// imply, which signals a numerically broken instance.
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("non-monotone verdict over bracket: {0}")]
    NonMonotone(String),
}

pub type Result<T> = std::result::Result<T, Error>;

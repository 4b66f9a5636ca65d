use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parity error: {0}")]
    Parity(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Two independent algorithms disagreed on a value that must be identical.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by every module.

use std::fmt;

use crate::scheme::CommScheme;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(Box<SearchFailure>),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Payload of [`Error::SearchExhausted`].
#[derive(Debug)]
pub struct SearchFailure {
    pub message: String,
    pub attempts: usize,
    /// Best candidate found, if the search produced any verified scheme at all.
    pub best: Option<CommScheme>,
}

impl fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} attempts", self.message, self.attempts)
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn dim<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

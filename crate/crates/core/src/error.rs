use thiserror::Error;

/// Errors produced by the algebra layer.
///
/// The variants separate bad input (caller's fault), requests the library
/// does not support, size blowups, and invariant violations. The last kind
/// means a computation contradicted a theorem the library relies on and
/// always indicates a bug.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("size limit exceeded: {what} needs {needed}, limit is {limit}")]
    Overflow {
        what: &'static str,
        needed: String,
        limit: usize,
    },

    #[error("order violation: {0}")]
    Order(String),

    #[error("unknown point: {0}")]
    UnknownPoint(String),

    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn overflow(what: &'static str, needed: impl ToString, limit: usize) -> Self {
        Error::Overflow {
            what,
            needed: needed.to_string(),
            limit,
        }
    }

    /// True for errors that indicate a contradiction rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

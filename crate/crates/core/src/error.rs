use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while computing {what} at k = {k}")]
    Overflow { what: &'static str, k: usize },

    #[error("non-finite value {value} at node t = {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("tree too large: {count} vertices exceeds the budget of {budget}")]
    TreeTooLarge { count: u128, budget: u128 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

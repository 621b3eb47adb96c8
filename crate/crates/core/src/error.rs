use thiserror::Error;

/// Errors raised by the library. The variants are grouped by how a caller is
/// expected to react: bad input, numerical trouble, or a size guard.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported shift: {0}")]
    Unsupported(String),

    #[error("insufficient context: need {needed} symbols, got {got}")]
    InsufficientContext { needed: usize, got: usize },

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// A construction whose hypotheses fail (e.g. a lemma requiring a sign change).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("level set is empty: alpha = {alpha} lies outside [{lo}, {hi}]")]
    EmptyLevelSet { alpha: f64, lo: f64, hi: f64 },

    #[error("supremum is infinite: {0}")]
    InfiniteSupremum(String),

    #[error("numerical failure: {message} (bracket [{lo}, {hi}])")]
    Numerical { message: String, lo: f64, hi: f64 },

    #[error("capacity exceeded: {what} needs {requested} entries, cap is {cap}")]
    Capacity { what: String, requested: u128, cap: u128 },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, lo: f64, hi: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            lo,
            hi,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

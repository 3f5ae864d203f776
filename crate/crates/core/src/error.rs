//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the library.
///
/// Construction errors (`DimensionMismatch`, `SizeMismatch`,
/// `InvalidParameter`) indicate misuse of the API and are always detected
/// before any expensive work starts. `BudgetExceeded` guards the exact
/// combinatorial solvers against instances they are not meant for.
/// `DtTooLarge` and `Numerical` signal runtime failures of the iterative
/// schemes.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size mismatch in {context}: expected {expected}, got {got}")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{context}: instance size {size} exceeds exact-solver budget {budget}")]
    BudgetExceeded {
        context: &'static str,
        size: usize,
        budget: usize,
    },

    #[error(
        "time step too large: energy increased by {increase:.3e} at iteration {iter} \
         (decrease dt or raise the splitting constant)"
    )]
    DtTooLarge { iter: usize, increase: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

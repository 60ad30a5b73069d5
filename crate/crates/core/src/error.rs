use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} is outside the open interval (-1, 1)")]
    Domain { value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("root finder did not converge after {iterations} iterations (mu={mu}, sigma={sigma})")]
    NonConvergence {
        iterations: usize,
        mu: f64,
        sigma: f64,
    },

    #[error("non-finite {what} loss at update {update}")]
    NonFiniteLoss { what: &'static str, update: usize },

    #[error("empty input")]
    Empty,

    #[error("mismatched checkpoint grids between run records")]
    MismatchedCheckpoints,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

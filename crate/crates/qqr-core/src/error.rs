//! Error type shared across the crate.

use alloc::string::String;

use thiserror::Error;

/// Errors raised by construction and evaluation routines.
///
/// Numerical non-convergence is not an error: solvers report it through
/// their status fields so partial results stay available.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    /// An input vector, matrix, or tensor has the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// An input contains a NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// A parameter violates its documented constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// The exhaustive grid estimator only exists for n <= 2.
    #[error("grid mode requires dimension <= 2, got {0}")]
    GridDimension(usize),
    /// An unknown built-in problem name was requested.
    #[error("unknown problem name: {0}")]
    UnknownProblem(String),
}

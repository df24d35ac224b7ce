//! Error type shared by all filter modules.

use thiserror::Error;

/// Errors raised by model evaluation, block solvers and streaming filters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    /// Operand shapes are incompatible; both shapes are spelled out.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    /// An operation received an empty vector or dataset.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A reference vector that must be nonzero was zero.
    #[error("zero vector not allowed: {0}")]
    ZeroVector(&'static str),

    /// A vector length is not divisible as required by a reshape.
    #[error("length {len} not divisible by {divisor} in {context}")]
    NotDivisible {
        context: &'static str,
        len: usize,
        divisor: usize,
    },

    /// A linear solve failed; carries the factor name, the iteration at
    /// which it happened and the estimated reciprocal condition number.
    #[error("singular or ill-conditioned {factor} at iteration {iteration} (rcond ~ {rcond:.3e})")]
    Singular {
        factor: &'static str,
        iteration: usize,
        rcond: f64,
    },

    /// A streaming update produced a nonfinite coefficient; carries the
    /// step index at which divergence was detected.
    #[error("{filter} diverged: nonfinite state at step {step}")]
    NonFinite { filter: &'static str, step: usize },

    /// A constructor argument is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FilterError>;

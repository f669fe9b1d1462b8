//! Error type shared by all solver and assembly routines.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the solvers and assembly routines.
#[derive(Debug, Error)]
pub enum Error {
    /// The coupling parameters violate the admissibility conditions.
    /// The payload names the first violated condition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A condensate parameter set maps outside the admissible region.
    /// The payload names the offending derived quantity.
    #[error("condensate parameters map outside the admissible region: {0}")]
    BecRejected(String),

    /// Mismatched array lengths between a grid and nodal data.
    #[error("length mismatch: expected {expected} nodal values, got {got}")]
    LengthMismatch {
        /// Number of grid cells.
        expected: usize,
        /// Length actually supplied.
        got: usize,
    },

    /// The Newton iteration failed to reach the requested residual.
    #[error("profile solver did not converge: {detail} (last residual {residual:.3e})")]
    NewtonFailure {
        /// Scaled sup-norm of the last residual.
        residual: f64,
        /// Continuation stage or iteration information.
        detail: String,
    },

    /// The eigensolver failed to converge to the requested accuracy.
    #[error("eigensolver did not converge: {detail} (last residual {residual:.3e})")]
    EigenFailure {
        /// Last relative residual norm.
        residual: f64,
        /// Stage information.
        detail: String,
    },

    /// A banded factorization broke down (matrix numerically singular).
    #[error("factorization breakdown at pivot {index}")]
    SingularFactor {
        /// Pivot index at which breakdown occurred.
        index: usize,
    },

    /// An argument was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A cross-check was requested at a resolution beyond its guard
    /// limits (the dense comparison is quadratic in the grid sizes).
    #[error("resolution guard exceeded: {0}")]
    ResolutionGuard(String),

    /// An I/O error from reading or writing data files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

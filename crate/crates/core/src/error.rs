//! Error type shared by the crate.

use thiserror::Error;

/// Configuration and capability errors.
///
/// Numerical trouble during a run (non-finite values, singular small
/// systems, failed line searches) is not an error: it ends up in the run
/// summary as a failed run or triggers a reset.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The objective does not provide a Hessian-vector product.
    #[error("objective does not provide a Hessian action")]
    MissingHessianAction,
    /// A vector had the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected length.
        expected: usize,
        /// Supplied length.
        got: usize,
    },
    /// Problem size does not satisfy the problem's constraints.
    #[error("invalid dimension {n} for problem {problem}: {reason}")]
    InvalidDimension {
        /// Problem label.
        problem: char,
        /// Requested dimension.
        n: usize,
        /// What is wrong with it.
        reason: &'static str,
    },
    /// A configuration parameter is out of range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// What is wrong with it.
        reason: &'static str,
    },
    /// The termination rule is missing the reference value it needs.
    #[error("termination rule is not fully configured: {0}")]
    IncompleteTermination(&'static str),
}

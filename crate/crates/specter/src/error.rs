//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An input matrix contains a NaN or infinity.
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// Dimensions of the operands do not line up.
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    /// A matrix required to be Hermitian is not, beyond roundoff tolerance.
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    /// A Cholesky pivot collapsed, so the matrix is not positive definite.
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// An iterative kernel failed to converge.
    #[error("eigenvalue or singular value iteration did not converge")]
    NoConvergence,

    /// A linear system collapsed under elimination.
    #[error("linear system is singular to working precision")]
    Singular,

    /// The requested operation is meaningless for this problem kind.
    #[error("mode mismatch: {context}")]
    ModeMismatch { context: String },

    /// The modal basis is too ill conditioned to trust.
    #[error("eigenvector basis is near defective (condition estimate {cond:.3e})")]
    NearDefective { cond: f64 },

    /// A scalar argument is out of its admissible range.
    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },
}

impl Error {
    pub(crate) fn shape(context: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
        }
    }

    pub(crate) fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }
}

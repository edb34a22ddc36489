//! Dense-matrix toolkit for spectral perturbation analysis of matrix pencils.
//!
//! The crate works with pencils `(A, M)` where `M` is Hermitian positive
//! definite, covering the standard case `M = I`. On top of a small set of
//! dense kernels ([`numcore`]) it provides:
//!
//! * epsilon-pseudospectra of standard and generalized problems, including an
//!   M-weighted variant, optimal rank-one perturbations, random perturbation
//!   scatter plots, and stability radii ([`pseudospectra`]),
//! * B-singular values and (S, T)-singular values, two generalizations of the
//!   singular value decomposition ([`gsvd`]),
//! * numerical ranges and maximum transient energy growth of the associated
//!   evolution problem ([`transient`]),
//! * generators for structured test problems ([`problems`]).
//!
//! All routines are deterministic: factorizations use fixed phase and
//! ordering conventions, and sampling is driven by counter-based seeded
//! streams.

pub mod error;
pub mod gsvd;
pub mod matrix;
pub mod numcore;
pub mod problems;
pub mod pseudospectra;
pub mod transient;

pub use error::Error;
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use pseudospectra::{Mode, PencilProblem};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

//! Blind deconvolution by zero-sheet deflation.
//!
//! An image blurred by convolution factors its two-variable z-transform:
//! `G(u,v) = F(u,v) * H(u,v)`. Every blur kernel therefore leaves its own
//! zero set inside the zero set of the observed image, and that signature
//! survives with no knowledge of the kernel. This crate detects blur kernels
//! by following branches of slice zeros around the unit circle and testing
//! each branch with a multi-point determinant that vanishes exactly when the
//! branch belongs to a blur factor of a given size. Restoration divides the
//! detected zeros back out of the transform (polynomial deflation) and
//! returns to pixel space with inverse DFTs.
//!
//! Pipeline:
//!
//! 1. [`track::branches`] samples the unit circle, solves one slice
//!    polynomial per sample point at extended precision, and matches roots
//!    across points into continuous branches.
//! 2. [`detect::detect`] sweeps base angles, scores every branch with the
//!    determinant test, and reports how many branches are flagged per angle
//!    plus the consensus over the sweep.
//! 3. [`restore::restore`] collects the flagged zeros on a DFT grid,
//!    deflates them from the slice polynomials, and rebuilds the deblurred
//!    image exactly.
//!
//! All polynomial arithmetic runs at a configurable decimal precision
//! ([`num::PrecisionContext`], default 120 digits) because the determinant
//! test must distinguish exact zeros from values that are merely small.

pub mod detect;
pub mod error;
pub mod image;
pub mod num;
pub mod restore;
pub mod track;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero-magnitude value")]
    DivisionByZero,

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("polynomial has no roots to solve (degree < 1 after trimming)")]
    DegreeTooLow,

    #[error("root solver did not converge: worst residual {worst_residual:e} after {iterations} iterations (raise the digit count)")]
    RootsDidNotConverge { worst_residual: f64, iterations: u32 },

    #[error("value is not a root: residual {residual:e} exceeds deflation bound {bound:e}")]
    NotARoot { residual: f64, bound: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows} rows, {cols} entries in a row")]
    NotSquare { rows: usize, cols: usize },

    #[error("slice degree dropped at sample point {point}: leading coefficient fell below the trim tolerance")]
    DegreeDrop { point: usize },

    #[error("branch count mismatch: the determinant test needs {expected} sample values, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("not enough branches: need {needed}, only {available} available at grid point {point}")]
    NotEnoughBranches { needed: usize, available: usize, point: usize },

    #[error("no blur detected on either axis; nothing to restore")]
    NoBlurDetected,

    #[error("degenerate deflation: normalization scalar magnitude {magnitude:e} is below the trim tolerance")]
    DegenerateNormalization { magnitude: f64 },

    #[error("restored image is not real: imaginary residual {max:e} exceeds bound {bound:e}")]
    ImaginaryResidual { max: f64, bound: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

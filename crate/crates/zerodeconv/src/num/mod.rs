//! Extended-precision numerics: complex arithmetic, polynomials, root
//! finding, and determinants.
//!
//! Everything in the detection path hinges on telling an exact zero
//! (magnitude at rounding level, e.g. 1e-100) from a structurally nonzero
//! value that is merely small (e.g. 1e-43 when sample points sit close
//! together on the circle). Double precision cannot make that distinction,
//! so all polynomial and matrix work runs on MPFR floats at a precision
//! derived from a requested decimal digit count.

mod cbig;
mod matrix;
mod poly;
mod roots;

pub use cbig::CBig;
pub use matrix::CMatrix;
pub use poly::CPoly;
pub use roots::poly_roots;
pub(crate) use roots::poly_roots_seeded;

use rug::ops::Pow;
use rug::Float;

/// Shared precision settings threaded through every numeric operation.
#[derive(Debug, Clone)]
pub struct PrecisionContext {
    digits: u32,
    prec: u32,
    root_tol: Float,
    trim_tol: Float,
}

/// Guard bits beyond the requested decimal precision.
const GUARD_BITS: u32 = 32;

impl PrecisionContext {
    /// Context with `digits` decimal digits of working precision.
    ///
    /// `digits` must be at least 30. The root certification tolerance
    /// defaults to `10^-(digits-20)` and the coefficient trim tolerance to
    /// `10^-(digits-30)`, which keeps `root_tol < 10^-(digits/2) < trim_tol`
    /// for every allowed digit count.
    pub fn new(digits: u32) -> Self {
        assert!(digits >= 30, "precision must be at least 30 digits");
        let prec = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS;
        let root_exp = (digits - 20).max(digits / 2 + 5);
        let trim_exp = root_exp - 10;
        let ten = Float::with_val(prec, 10);
        let root_tol = ten.clone().pow(-(root_exp as i32));
        let trim_tol = ten.pow(-(trim_exp as i32));
        Self { digits, prec, root_tol, trim_tol }
    }

    /// Decimal digit count this context was built for.
    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working precision in bits.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Residual bound below which a root is accepted as certified,
    /// relative to the largest coefficient magnitude.
    pub fn root_tol(&self) -> &Float {
        &self.root_tol
    }

    /// Magnitude below which a coefficient or pivot is treated as zero.
    pub fn trim_tol(&self) -> &Float {
        &self.trim_tol
    }

    /// `10^-(digits/4)`: bound used when checking that a claimed root
    /// really is one before deflating it, and as the cluster radius for
    /// same-root and ambiguity checks.
    pub fn cluster_tol(&self) -> Float {
        let ten = Float::with_val(self.prec, 10);
        ten.pow(-((self.digits / 4) as i32))
    }

    /// A fresh real zero at working precision.
    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.prec, v)
    }

    /// Pi at working precision.
    pub fn pi(&self) -> Float {
        Float::with_val(self.prec, rug::float::Constant::Pi)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(120)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_context_tolerances() {
        let ctx = PrecisionContext::default();
        assert_eq!(ctx.digits(), 120);
        assert!(ctx.prec() >= 399 + GUARD_BITS);
        let hundred = Float::with_val(ctx.prec(), 10).pow(-100i32);
        let ninety = Float::with_val(ctx.prec(), 10).pow(-90i32);
        assert_eq!(ctx.root_tol(), &hundred);
        assert_eq!(ctx.trim_tol(), &ninety);
    }

    #[test]
    fn tolerance_ordering_holds_for_all_digit_counts() {
        for digits in [30, 40, 60, 120, 240] {
            let ctx = PrecisionContext::new(digits);
            let half = Float::with_val(ctx.prec(), 10).pow(-((digits / 2) as i32));
            assert!(ctx.root_tol().clone() < half, "digits {digits}");
            assert!(ctx.trim_tol().clone() > ctx.root_tol().clone(), "digits {digits}");
        }
    }

    #[test]
    #[should_panic(expected = "at least 30")]
    fn too_few_digits_rejected() {
        PrecisionContext::new(29);
    }
}

//! Dense univariate polynomials over [`CBig`].
//!
//! Coefficients are stored in ascending order: `coeffs[k]` multiplies `z^k`.
//! A polynomial with an empty coefficient vector is identically zero.

use super::cbig::{mul_acc, CBig};
use super::PrecisionContext;
use crate::error::Error;
use crate::Result;
use rug::Float;

#[derive(Debug, Clone)]
pub struct CPoly {
    pub coeffs: Vec<CBig>,
}

impl CPoly {
    pub fn new(coeffs: Vec<CBig>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lead(&self) -> Option<&CBig> {
        self.coeffs.last()
    }

    /// Largest coefficient magnitude (zero for the zero polynomial).
    pub fn max_coeff_mag(&self, prec: u32) -> Float {
        let mut m = Float::new(prec);
        for c in &self.coeffs {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Drop trailing coefficients at or below the trim tolerance. If every
    /// coefficient is that small the result is the zero polynomial.
    pub fn trimmed(mut self, ctx: &PrecisionContext) -> Self {
        while let Some(c) = self.coeffs.last() {
            if c.abs() <= *ctx.trim_tol() {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &CBig) -> CBig {
        let prec = z.prec();
        let mut acc = CBig::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * z;
            acc += c;
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_deriv(&self, z: &CBig) -> (CBig, CBig) {
        let prec = z.prec();
        let mut p = CBig::zero(prec);
        let mut d = CBig::zero(prec);
        for c in self.coeffs.iter().rev() {
            d = &d * z;
            d += &p;
            p = &p * z;
            p += c;
        }
        (p, d)
    }

    /// Product of two polynomials (coefficient convolution).
    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![CBig::zero(prec); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                mul_acc(&mut out[i + j], a, b);
            }
        }
        Self { coeffs: out }
    }

    /// Monic product `prod_k (z - r_k)`.
    pub fn from_roots(roots: &[CBig], prec: u32) -> Self {
        let mut p = Self { coeffs: vec![CBig::one(prec)] };
        for r in roots {
            let lin = Self { coeffs: vec![-r, CBig::one(prec)] };
            p = p.mul(&lin, prec);
        }
        p
    }

    /// Synthetic division by the monic linear factor `(z - root)`.
    ///
    /// The claimed root is verified first: its residual must not exceed
    /// `10^-(digits/4)` times the largest coefficient magnitude. The
    /// quotient has degree one less; the remainder is discarded (it is at
    /// rounding level once the precondition holds).
    pub fn deflate(&self, root: &CBig, ctx: &PrecisionContext) -> Result<Self> {
        let d = self.degree().ok_or(Error::DegreeTooLow)?;
        if d < 1 {
            return Err(Error::DegreeTooLow);
        }
        let maxc = self.max_coeff_mag(ctx.prec());
        let bound = Float::with_val(ctx.prec(), &maxc * &ctx.cluster_tol());
        let residual = self.eval(root).abs();
        if residual > bound {
            return Err(Error::NotARoot {
                residual: residual.to_f64(),
                bound: bound.to_f64(),
            });
        }
        let mut quotient = vec![CBig::zero(ctx.prec()); d];
        let mut carry = self.coeffs[d].clone();
        for k in (0..d).rev() {
            quotient[k] = carry.clone();
            carry = &self.coeffs[k] + &(&carry * root);
        }
        Ok(Self { coeffs: quotient })
    }
}

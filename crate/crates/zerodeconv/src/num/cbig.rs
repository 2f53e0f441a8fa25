//! Complex numbers as pairs of MPFR floats.
//!
//! The system MPFR has no complex layer, so the complex field is built
//! directly: a value is a real/imaginary pair at a shared precision, and
//! the ring operations are written out. Division reports an explicit error
//! on a zero-magnitude divisor rather than producing infinities; no
//! operation can introduce a NaN from finite operands.

use crate::error::Error;
use crate::Result;
use rug::Float;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, PartialEq)]
pub struct CBig {
    pub re: Float,
    pub im: Float,
}

impl CBig {
    pub fn zero(prec: u32) -> Self {
        Self { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn i(prec: u32) -> Self {
        Self { re: Float::new(prec), im: Float::with_val(prec, 1) }
    }

    /// Build from double-precision parts. Errors on non-finite input.
    pub fn from_f64(prec: u32, re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::NonFinite("complex component"));
        }
        Ok(Self { re: Float::with_val(prec, re), im: Float::with_val(prec, im) })
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Self { re, im: Float::new(prec) }
    }

    /// `r * e^{i theta}`.
    pub fn polar(r: &Float, theta: &Float) -> Self {
        let prec = r.prec().max(theta.prec());
        let (sin, cos) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        Self { re: cos * r, im: sin * r }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// |z|^2, cheaper than `abs` and order-equivalent for comparisons.
    pub fn abs_sq(&self) -> Float {
        let prec = self.prec();
        let mut s = Float::with_val(prec, &self.re * &self.re);
        s += Float::with_val(prec, &self.im * &self.im);
        s
    }

    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// |self - other| as f64, for matching and diagnostics.
    pub fn dist_f64(&self, other: &Self) -> f64 {
        (self - other).abs().to_f64()
    }

    pub fn scale(&self, f: &Float) -> Self {
        Self { re: self.re.clone() * f, im: self.im.clone() * f }
    }

    /// Division with an explicit zero-divisor error.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        let prec = self.prec().max(rhs.prec());
        let den = rhs.abs_sq();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut re = Float::with_val(prec, &self.re * &rhs.re);
        re += Float::with_val(prec, &self.im * &rhs.im);
        re /= &den;
        let mut im = Float::with_val(prec, &self.im * &rhs.re);
        im -= Float::with_val(prec, &self.re * &rhs.im);
        im /= &den;
        Ok(Self { re, im })
    }

    /// Multiplicative inverse; errors on zero.
    pub fn try_recip(&self) -> Result<Self> {
        CBig::one(self.prec()).try_div(self)
    }

    /// Non-negative integer power by repeated squaring.
    pub fn pow_int(&self, mut e: u32) -> Self {
        let prec = self.prec();
        let mut base = self.clone();
        let mut acc = CBig::one(prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for CBig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6e}, {:.6e})", self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for &CBig {
    type Output = CBig;
    fn add(self, rhs: &CBig) -> CBig {
        let prec = self.prec().max(rhs.prec());
        CBig {
            re: Float::with_val(prec, &self.re + &rhs.re),
            im: Float::with_val(prec, &self.im + &rhs.im),
        }
    }
}

impl Sub for &CBig {
    type Output = CBig;
    fn sub(self, rhs: &CBig) -> CBig {
        let prec = self.prec().max(rhs.prec());
        CBig {
            re: Float::with_val(prec, &self.re - &rhs.re),
            im: Float::with_val(prec, &self.im - &rhs.im),
        }
    }
}

impl Mul for &CBig {
    type Output = CBig;
    fn mul(self, rhs: &CBig) -> CBig {
        let prec = self.prec().max(rhs.prec());
        let mut re = Float::with_val(prec, &self.re * &rhs.re);
        re -= Float::with_val(prec, &self.im * &rhs.im);
        let mut im = Float::with_val(prec, &self.re * &rhs.im);
        im += Float::with_val(prec, &self.im * &rhs.re);
        CBig { re, im }
    }
}

impl Neg for &CBig {
    type Output = CBig;
    fn neg(self) -> CBig {
        CBig { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&CBig> for CBig {
    fn add_assign(&mut self, rhs: &CBig) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&CBig> for CBig {
    fn sub_assign(&mut self, rhs: &CBig) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

/// Fused multiply-accumulate: `acc += a * b` without a temporary CBig.
pub(crate) fn mul_acc(acc: &mut CBig, a: &CBig, b: &CBig) {
    let prec = acc.prec();
    acc.re += Float::with_val(prec, &a.re * &b.re);
    acc.re -= Float::with_val(prec, &a.im * &b.im);
    acc.im += Float::with_val(prec, &a.re * &b.im);
    acc.im += Float::with_val(prec, &a.im * &b.re);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::PrecisionContext;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn one_plus_i_over_one_minus_i_is_i() {
        let p = ctx().prec();
        let a = CBig::from_f64(p, 1.0, 1.0).unwrap();
        let b = CBig::from_f64(p, 1.0, -1.0).unwrap();
        let q = a.try_div(&b).unwrap();
        let diff = (&q - &CBig::i(p)).abs();
        assert!(diff < 1e-120, "residual {}", diff.to_f64());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let p = ctx().prec();
        let a = CBig::one(p);
        let z = CBig::zero(p);
        assert!(matches!(a.try_div(&z), Err(Error::DivisionByZero)));
    }

    #[test]
    fn non_finite_input_is_an_error() {
        assert!(matches!(CBig::from_f64(64, f64::NAN, 0.0), Err(Error::NonFinite(_))));
        assert!(matches!(CBig::from_f64(64, 0.0, f64::INFINITY), Err(Error::NonFinite(_))));
    }

    #[test]
    fn powers_match_repeated_multiplication() {
        let p = ctx().prec();
        let z = CBig::from_f64(p, 0.7, -1.3).unwrap();
        let mut acc = CBig::one(p);
        for e in 0..8u32 {
            let d = (&z.pow_int(e) - &acc).abs();
            assert!(d < 1e-110, "e={e}");
            acc = &acc * &z;
        }
    }

    #[test]
    fn polar_lands_on_the_circle() {
        let c = ctx();
        let r = c.float(1.0);
        let theta = c.pi() / 3u32;
        let z = CBig::polar(&r, &theta);
        let half = rug::Float::with_val(c.prec(), &z.re - &c.float(0.5))
            .abs()
            .to_f64()
            .abs();
        assert!(half < 1e-110);
        assert!((z.abs().to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mul_acc_matches_separate_ops() {
        let p = ctx().prec();
        let a = CBig::from_f64(p, 1.25, -0.5).unwrap();
        let b = CBig::from_f64(p, -2.0, 3.5).unwrap();
        let mut acc = CBig::from_f64(p, 0.1, 0.2).unwrap();
        let expect = &acc + &(&a * &b);
        mul_acc(&mut acc, &a, &b);
        assert!((&acc - &expect).abs() < 1e-110);
    }
}

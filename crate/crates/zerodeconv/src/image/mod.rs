//! Images, convolution, transform slices, and inverse DFTs.
//!
//! An image is a rectangular grid of double-precision reals; its
//! two-variable transform is the polynomial `Σ g(x,y)·u^x·v^y`, with `x`
//! running down the rows and `y` across the columns. Pixels stay in double
//! precision (test data is integer-valued, so storage is exact); promotion
//! to extended precision happens when a slice polynomial is built.

mod gen;
mod io;

pub use gen::{gen_test_scene, TestScene};
pub use io::{read_image, write_atomic, write_image, ImageFormat};

use crate::error::Error;
use crate::num::{CBig, CPoly, PrecisionContext};
use crate::Result;
use rug::Float;

/// Rectangular grid of finite double-precision pixels, row-major.
///
/// `rows` is the x-extent (paired with `u` in the transform), `cols` the
/// y-extent (paired with `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    /// All-zero image.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "image must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds an image from rows of pixels; rows must all have equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Malformed("image must be at least 1x1".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Malformed(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for &px in row {
                if !px.is_finite() {
                    return Err(Error::NonFinite("image pixel"));
                }
                data.push(px);
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.cols + y]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[x * self.cols + y] = value;
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_pixel(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_pixel(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Full linear convolution; result is (M+m-1) x (N+n-1).
    pub fn convolve(&self, kernel: &Image) -> Image {
        let out_rows = self.rows + kernel.rows - 1;
        let out_cols = self.cols + kernel.cols - 1;
        let mut out = Image::zeros(out_rows, out_cols);
        for x in 0..self.rows {
            for y in 0..self.cols {
                let fv = self.get(x, y);
                if fv == 0.0 {
                    continue;
                }
                for s in 0..kernel.rows {
                    for t in 0..kernel.cols {
                        let idx = (x + s) * out_cols + (y + t);
                        out.data[idx] += fv * kernel.get(s, t);
                    }
                }
            }
        }
        out
    }

    /// Slice polynomial in `v` at fixed `u`: coefficient of `v^y` is
    /// `Σ_x g(x,y)·u^x`.
    pub fn vslice(&self, u: &CBig, ctx: &PrecisionContext) -> CPoly {
        let prec = ctx.prec();
        let u_pows = power_table(u, self.rows, prec);
        let coeffs = (0..self.cols)
            .map(|y| {
                let mut acc = CBig::zero(prec);
                for (x, up) in u_pows.iter().enumerate() {
                    let px = self.get(x, y);
                    if px != 0.0 {
                        acc += &up.scale(&ctx.float(px));
                    }
                }
                acc
            })
            .collect();
        CPoly::new(coeffs)
    }

    /// Slice polynomial in `u` at fixed `v`: coefficient of `u^x` is
    /// `Σ_y g(x,y)·v^y`.
    pub fn uslice(&self, v: &CBig, ctx: &PrecisionContext) -> CPoly {
        let prec = ctx.prec();
        let v_pows = power_table(v, self.cols, prec);
        let coeffs = (0..self.rows)
            .map(|x| {
                let mut acc = CBig::zero(prec);
                for (y, vp) in v_pows.iter().enumerate() {
                    let px = self.get(x, y);
                    if px != 0.0 {
                        acc += &vp.scale(&ctx.float(px));
                    }
                }
                acc
            })
            .collect();
        CPoly::new(coeffs)
    }

    /// Transform value at one point: `Σ g(x,y)·u^x·v^y`.
    pub fn eval2(&self, u: &CBig, v: &CBig, ctx: &PrecisionContext) -> CBig {
        self.vslice(u, ctx).eval(v)
    }
}

/// Rectangular grid of extended-precision complex values; the intermediate
/// form of a deflated image before imaginary parts are discarded.
#[derive(Debug, Clone)]
pub struct ComplexImage {
    rows: usize,
    cols: usize,
    data: Vec<CBig>,
}

impl ComplexImage {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        assert!(rows >= 1 && cols >= 1, "image must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![CBig::zero(prec); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> &CBig {
        &self.data[x * self.cols + y]
    }

    pub fn set(&mut self, x: usize, y: usize, value: CBig) {
        self.data[x * self.cols + y] = value;
    }

    /// Drops imaginary parts, returning the real image and the largest
    /// absolute imaginary part discarded.
    pub fn into_real(self) -> (Image, f64) {
        let mut max_imag = 0.0f64;
        let data = self
            .data
            .iter()
            .map(|z| {
                let (re, im) = z.to_f64_pair();
                max_imag = max_imag.max(im.abs());
                re
            })
            .collect();
        (
            Image {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            max_imag,
        )
    }
}

/// Powers `base^0 .. base^(count-1)`.
pub(crate) fn power_table(base: &CBig, count: usize, prec: u32) -> Vec<CBig> {
    let mut pows = Vec::with_capacity(count);
    let mut cur = CBig::one(prec);
    for _ in 0..count {
        pows.push(cur.clone());
        cur = &cur * base;
    }
    pows
}

/// The `len`-th roots of unity `e^{2πij/len}` for j = 0..len-1, computed
/// from one shared value of π so grids built anywhere in the pipeline agree
/// to working precision.
/// The angle 2πj/len, computed identically wherever a grid point is
/// needed, so that sample points and transform roots agree to the bit.
pub(crate) fn unit_angle(j: usize, len: usize, ctx: &PrecisionContext) -> Float {
    let prec = ctx.prec();
    let two_pi = ctx.pi() * 2u32;
    Float::with_val(prec, &two_pi) * Float::with_val(prec, j as u32)
        / Float::with_val(prec, len as u32)
}

pub(crate) fn unit_roots(len: usize, ctx: &PrecisionContext) -> Vec<CBig> {
    let one = Float::with_val(ctx.prec(), 1);
    (0..len)
        .map(|j| CBig::polar(&one, &unit_angle(j, len, ctx)))
        .collect()
}

/// Inverse DFT of values sampled at the `axis_len`-th roots of unity in
/// index order `j → e^{2πij/axis_len}`: recovers the coefficient sequence
/// `x_n = (1/L)·Σ_j X_j·e^{-2πijn/L}`.
pub fn idft_axis(values: &[CBig], axis_len: usize, ctx: &PrecisionContext) -> Result<Vec<CBig>> {
    if values.len() != axis_len || axis_len == 0 {
        return Err(Error::LengthMismatch {
            expected: axis_len,
            got: values.len(),
        });
    }
    let prec = ctx.prec();
    let roots = unit_roots(axis_len, ctx);
    let inv_len = Float::with_val(prec, 1) / Float::with_val(prec, axis_len as u32);
    let out = (0..axis_len)
        .map(|n| {
            let mut acc = CBig::zero(prec);
            for (j, value) in values.iter().enumerate() {
                // e^{-2πijn/L} is the conjugate of the root at index (j*n) mod L.
                let w = roots[(j * n) % axis_len].conj();
                acc += &(value * &w);
            }
            acc.scale(&inv_len)
        })
        .collect();
    Ok(out)
}

/// Two-dimensional inverse DFT of a full grid of samples.
///
/// `grid[j][k]` holds the value at `(u_j, v_k)` where `u_j` runs over the
/// `rows`-th roots of unity and `v_k` over the `cols`-th. The result holds
/// the coefficient table: entry `[x][y]` multiplies `u^x v^y`.
pub fn idft2(grid: &ComplexImage, ctx: &PrecisionContext) -> Result<ComplexImage> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let mut half = ComplexImage::zeros(rows, cols, ctx.prec());
    for k in 0..cols {
        let col: Vec<CBig> = (0..rows).map(|j| grid.get(j, k).clone()).collect();
        for (x, value) in idft_axis(&col, rows, ctx)?.into_iter().enumerate() {
            half.set(x, k, value);
        }
    }
    let mut out = ComplexImage::zeros(rows, cols, ctx.prec());
    for x in 0..rows {
        let row: Vec<CBig> = (0..cols).map(|k| half.get(x, k).clone()).collect();
        for (y, value) in idft_axis(&row, cols, ctx)?.into_iter().enumerate() {
            out.set(x, y, value);
        }
    }
    Ok(out)
}

/// Forward evaluation of a coefficient sequence at the `len`-th roots of
/// unity (the transform `idft_axis` inverts). Test and reconstruction
/// helper.
pub fn eval_at_unit_roots(coeffs: &[CBig], len: usize, ctx: &PrecisionContext) -> Vec<CBig> {
    let roots = unit_roots(len, ctx);
    let poly = CPoly::new(coeffs.to_vec());
    roots.iter().map(|r| poly.eval(r)).collect()
}

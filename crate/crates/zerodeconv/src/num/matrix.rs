//! Dense complex matrices and determinants at extended precision.
//!
//! Determinants are computed by LU factorization with partial pivoting.
//! When every candidate pivot in a column is negligibly small relative to
//! the matrix's largest initial entry, the matrix is treated as exactly
//! singular and the determinant returned is an exact zero; this keeps
//! rank-deficient test matrices from reporting rounding dust instead of
//! zero.

use super::cbig::CBig;
use super::PrecisionContext;
use crate::error::Error;
use crate::Result;
use rug::Float;

/// Square complex matrix in row-major order.
#[derive(Debug, Clone)]
pub struct CMatrix {
    n: usize,
    data: Vec<CBig>,
}

impl CMatrix {
    /// Builds a matrix from full rows; every row must have the same length
    /// as the number of rows.
    pub fn from_rows(rows: Vec<Vec<CBig>>) -> Result<Self> {
        let n = rows.len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &CBig {
        &self.data[r * self.n + c]
    }

    /// Determinant via LU with partial pivoting.
    ///
    /// Returns an exact zero when elimination finds a column whose remaining
    /// entries are all below `trim_tol` times the largest entry of the
    /// original matrix.
    pub fn det(&self, ctx: &PrecisionContext) -> CBig {
        let n = self.n;
        let prec = ctx.prec();
        if n == 0 {
            return CBig::one(prec);
        }
        let mut a = self.data.clone();

        let mut max_entry_sq = Float::new(prec);
        for e in &a {
            let m = e.abs_sq();
            if m > max_entry_sq {
                max_entry_sq = m;
            }
        }
        // Threshold on |entry|^2, so square the relative tolerance.
        let tol_sq = {
            let t = Float::with_val(prec, ctx.trim_tol());
            Float::with_val(prec, &max_entry_sq) * Float::with_val(prec, &t * &t)
        };

        let mut det = CBig::one(prec);
        let mut negate = false;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = a[col * n + col].abs_sq();
            for r in (col + 1)..n {
                let m = a[r * n + col].abs_sq();
                if m > pivot_mag {
                    pivot_mag = m;
                    pivot_row = r;
                }
            }
            if pivot_mag <= tol_sq {
                return CBig::zero(prec);
            }
            if pivot_row != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot_row * n + c);
                }
                negate = !negate;
            }
            let pivot = a[col * n + col].clone();
            det = &det * &pivot;
            for r in (col + 1)..n {
                let factor = match a[r * n + col].try_div(&pivot) {
                    Ok(f) => f,
                    Err(_) => continue,
                };
                for c in (col + 1)..n {
                    let sub = &factor * &a[col * n + c];
                    let cell = &mut a[r * n + c];
                    *cell = &*cell - &sub;
                }
            }
        }
        if negate {
            -&det
        } else {
            det
        }
    }
}

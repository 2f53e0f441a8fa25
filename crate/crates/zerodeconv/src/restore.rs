//! Image restoration by deflating detected factor zeros.
//!
//! Once detection has settled how many zero branches belong to the factor
//! on each axis, the branch values are collected on an exact grid of unit
//! roots and divided out. Sequential mode deflates the v-zeros from every
//! v-slice, rebuilds the intermediate image by inverse DFT, then repeats
//! on the other axis; because every removed factor is monic, the quotient
//! is the sharp image itself whenever the factor's corner coefficient is
//! one (the scale convention: `(f, h)` and `(αf, h/α)` produce identical
//! observations, so the corner pins the split). Literal mode instead
//! evaluates the transform ratio pointwise on a full grid and inverts in
//! one step; it is exact when the factor separates into a product of
//! one-variable polynomials.

use crate::detect::{detect, score, CEAxis, CEConfig, CEReport};
use crate::error::Error;
use crate::image::{idft2, idft_axis, unit_angle, unit_roots, ComplexImage, Image};
use crate::num::{CBig, PrecisionContext};
use crate::track::branches;
use crate::Result;
use serde::{Deserialize, Serialize};

/// How the detected zeros are divided out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestoreMode {
    /// Deflate one axis, rebuild, then deflate the other.
    Sequential,
    /// Divide transform values on a full grid and invert once. Exact only
    /// for factors that separate per axis.
    Literal,
}

/// Factor zeros collected over an exact grid of unit roots.
#[derive(Debug, Clone)]
pub struct BlurZeroSet {
    /// The determinant form whose flags selected these zeros.
    pub axis: CEAxis,
    /// Number of grid points (the inverse-DFT length).
    pub grid_len: usize,
    /// Zeros expected (and stored) per grid point.
    pub expected_count: usize,
    /// `zeros[j]` holds the factor zeros at grid point j.
    pub zeros: Vec<Vec<CBig>>,
    /// Scores of the selected branches, parallel to `zeros`.
    pub scores: Vec<Vec<f64>>,
    /// Grid points where the flag count disagreed with `expected_count`
    /// and the lowest-scoring branches were taken instead.
    pub coerced: Vec<usize>,
}

/// Collects `count` factor zeros at every grid point.
///
/// The grid has `grid_len` points at the unit roots; the sample cluster at
/// each point is based exactly on the grid root, so the collected values
/// can be fed straight into an inverse DFT of that length. At each point
/// the flagged branches are taken when their number matches `count`;
/// otherwise the `count` lowest-scoring branches are taken and the point
/// is recorded as coerced.
pub fn collect_zeros_with(
    img: &Image,
    cfg: &CEConfig,
    axis: CEAxis,
    count: usize,
    grid_len: usize,
    ctx: &PrecisionContext,
) -> Result<BlurZeroSet> {
    cfg.validate()?;
    if grid_len == 0 {
        return Err(Error::Malformed("zero-length collection grid".into()));
    }
    let mut zeros = Vec::with_capacity(grid_len);
    let mut scores = Vec::with_capacity(grid_len);
    let mut coerced = Vec::new();
    for j in 0..grid_len {
        if count == 0 {
            zeros.push(Vec::new());
            scores.push(Vec::new());
            continue;
        }
        let phi = unit_angle(j, grid_len, ctx);
        let tracked = branches(img, &phi, &cfg.plan, axis.slice_axis(), ctx)?;
        if tracked.len() < count {
            return Err(Error::NotEnoughBranches {
                needed: count,
                available: tracked.len(),
                point: j,
            });
        }
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(tracked.len());
        for (i, branch) in tracked.iter().enumerate() {
            let det = crate::detect::ce_value(&branch.points, &branch.values, &cfg.size, axis, ctx)?;
            scored.push((score(&det.abs(), cfg.scale), i));
        }
        let flagged: Vec<usize> = scored
            .iter()
            .filter(|(s, _)| *s < cfg.tau)
            .map(|&(_, i)| i)
            .collect();
        let chosen: Vec<usize> = if flagged.len() == count {
            flagged
        } else {
            coerced.push(j);
            let mut by_score = scored.clone();
            by_score.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            by_score.iter().take(count).map(|&(_, i)| i).collect()
        };
        scores.push(
            chosen
                .iter()
                .map(|&i| scored.iter().find(|&&(_, idx)| idx == i).unwrap().0)
                .collect(),
        );
        zeros.push(
            chosen
                .iter()
                .map(|&i| tracked[i].values[0].clone())
                .collect(),
        );
    }
    Ok(BlurZeroSet {
        axis,
        grid_len,
        expected_count: count,
        zeros,
        scores,
        coerced,
    })
}

/// Runs a detection sweep to fix the zero count, then collects that many
/// zeros on the grid. Returns the collection together with the sweep
/// report that chose the count.
pub fn collect_zeros(
    img: &Image,
    cfg: &CEConfig,
    axis: CEAxis,
    grid_len: usize,
    ctx: &PrecisionContext,
) -> Result<(BlurZeroSet, CEReport)> {
    let report = detect(img, cfg, axis, ctx)?;
    let set = collect_zeros_with(img, cfg, axis, report.consensus_count, grid_len, ctx)?;
    Ok((set, report))
}

/// Divides the collected zeros out of the image along one axis.
///
/// For a `UForm` set (v-zeros), every v-slice on the row-count grid is
/// deflated by its zeros and the shortened coefficient columns are
/// inverse-transformed back to pixel rows; the result keeps the row count
/// and loses one column per zero. A `VForm` set works transposed.
pub fn deflate_axis(
    img: &Image,
    set: &BlurZeroSet,
    ctx: &PrecisionContext,
) -> Result<ComplexImage> {
    let k = set.expected_count;
    match set.axis {
        CEAxis::UForm => {
            if set.grid_len != img.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "collection grid has {} points but the image has {} rows",
                    set.grid_len,
                    img.rows()
                )));
            }
            if k >= img.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "cannot remove {k} column zeros from {} columns",
                    img.cols()
                )));
            }
            let new_cols = img.cols() - k;
            let grid = unit_roots(img.rows(), ctx);
            let mut columns: Vec<Vec<CBig>> = vec![Vec::with_capacity(img.rows()); new_cols];
            for (j, point) in grid.iter().enumerate() {
                let mut poly = img.vslice(point, ctx);
                for zero in &set.zeros[j] {
                    poly = poly.deflate(zero, ctx)?;
                }
                debug_assert_eq!(poly.coeffs.len(), new_cols);
                for (y, column) in columns.iter_mut().enumerate() {
                    column.push(poly.coeffs[y].clone());
                }
            }
            let mut out = ComplexImage::zeros(img.rows(), new_cols, ctx.prec());
            for (y, column) in columns.iter().enumerate() {
                for (x, value) in idft_axis(column, img.rows(), ctx)?.into_iter().enumerate() {
                    out.set(x, y, value);
                }
            }
            Ok(out)
        }
        CEAxis::VForm => {
            if set.grid_len != img.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "collection grid has {} points but the image has {} columns",
                    set.grid_len,
                    img.cols()
                )));
            }
            if k >= img.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "cannot remove {k} row zeros from {} rows",
                    img.rows()
                )));
            }
            let new_rows = img.rows() - k;
            let grid = unit_roots(img.cols(), ctx);
            let mut rows: Vec<Vec<CBig>> = vec![Vec::with_capacity(img.cols()); new_rows];
            for (j, point) in grid.iter().enumerate() {
                let mut poly = img.uslice(point, ctx);
                for zero in &set.zeros[j] {
                    poly = poly.deflate(zero, ctx)?;
                }
                debug_assert_eq!(poly.coeffs.len(), new_rows);
                for (x, row) in rows.iter_mut().enumerate() {
                    row.push(poly.coeffs[x].clone());
                }
            }
            let mut out = ComplexImage::zeros(new_rows, img.cols(), ctx.prec());
            for (x, row) in rows.iter().enumerate() {
                for (y, value) in idft_axis(row, img.cols(), ctx)?.into_iter().enumerate() {
                    out.set(x, y, value);
                }
            }
            Ok(out)
        }
    }
}

/// Result of a restoration run.
#[derive(Debug, Clone)]
pub struct RestorationResult {
    pub restored: Image,
    pub mode: RestoreMode,
    /// Zeros removed along the column axis (v) and row axis (u).
    pub v_zero_count: usize,
    pub u_zero_count: usize,
    /// Corner coefficient of the reconstructed factor, as (re, im). The
    /// scale convention pins it near one; a near-zero value means the
    /// collected zero set is inconsistent.
    pub normalization: (f64, f64),
    /// Largest imaginary part discarded when realizing the result.
    pub max_imag_residual: f64,
    pub coerced_v_points: Vec<usize>,
    pub coerced_u_points: Vec<usize>,
    /// Sweep reports that fixed the two zero counts.
    pub v_report: CEReport,
    pub u_report: CEReport,
}

const NORMALIZATION_FLOOR: f64 = 1e-6;

fn check_imag(max_imag: f64, reference: &Image) -> Result<()> {
    let bound = 1e-6 * reference.max_pixel().abs().max(1.0);
    if max_imag > bound {
        return Err(Error::ImaginaryResidual {
            max: max_imag,
            bound,
        });
    }
    Ok(())
}

fn divide_all(mut grid: ComplexImage, by: &CBig) -> Result<ComplexImage> {
    for x in 0..grid.rows() {
        for y in 0..grid.cols() {
            let q = grid.get(x, y).try_div(by)?;
            grid.set(x, y, q);
        }
    }
    Ok(grid)
}

fn complex_of(img: &Image, prec: u32) -> Result<ComplexImage> {
    let mut out = ComplexImage::zeros(img.rows(), img.cols(), prec);
    for x in 0..img.rows() {
        for y in 0..img.cols() {
            out.set(x, y, CBig::from_f64(prec, img.get(x, y), 0.0)?);
        }
    }
    Ok(out)
}

/// Corner coefficient of the monic factor product, reconstructed the same
/// way the restoration itself works: evaluate on a grid, inverse-DFT, read
/// the coefficient at the factor's corner degree.
fn monic_corner(
    grid_len: usize,
    gammas: &[CBig],
    ctx: &PrecisionContext,
) -> Result<CBig> {
    if gammas.len() >= grid_len {
        return Err(Error::DimensionMismatch(format!(
            "grid of {grid_len} points cannot resolve degree {}",
            gammas.len()
        )));
    }
    let grid = unit_roots(grid_len, ctx);
    let column: Vec<CBig> = grid
        .iter()
        .map(|u| {
            let mut s = CBig::one(ctx.prec());
            for g in gammas {
                s = &s * &(u - g);
            }
            s
        })
        .collect();
    Ok(idft_axis(&column, grid_len, ctx)?[gammas.len()].clone())
}

/// Restores the sharp image from one observed image.
///
/// Detection fixes the zero counts per axis; the zeros are collected on
/// exact grids and divided out per `mode`. Fails with `NoBlurDetected` if
/// neither axis flags anything, `DegenerateNormalization` if the
/// reconstructed factor's corner collapses, and `ImaginaryResidual` if the
/// realized pixels carry more than a millionth of the peak in their
/// imaginary parts.
pub fn restore(
    img: &Image,
    cfg: &CEConfig,
    mode: RestoreMode,
    ctx: &PrecisionContext,
) -> Result<RestorationResult> {
    cfg.validate()?;
    match mode {
        RestoreMode::Sequential => restore_sequential(img, cfg, ctx),
        RestoreMode::Literal => restore_literal(img, cfg, ctx),
    }
}

fn restore_sequential(
    img: &Image,
    cfg: &CEConfig,
    ctx: &PrecisionContext,
) -> Result<RestorationResult> {
    let v_report = detect(img, cfg, CEAxis::UForm, ctx)?;
    let k_v = v_report.consensus_count;

    let (intermediate, coerced_v, imag_intermediate) = if k_v > 0 {
        let set = collect_zeros_with(img, cfg, CEAxis::UForm, k_v, img.rows(), ctx)?;
        let (real, imag) = deflate_axis(img, &set, ctx)?.into_real();
        (real, set.coerced, imag)
    } else {
        (img.clone(), Vec::new(), 0.0)
    };
    check_imag(imag_intermediate, &intermediate)?;

    let u_report = detect(&intermediate, cfg, CEAxis::VForm, ctx)?;
    let k_u = u_report.consensus_count;
    if k_v == 0 && k_u == 0 {
        return Err(Error::NoBlurDetected);
    }

    let (final_complex, coerced_u, gammas) = if k_u > 0 {
        let set = collect_zeros_with(
            &intermediate,
            cfg,
            CEAxis::VForm,
            k_u,
            intermediate.cols(),
            ctx,
        )?;
        let deflated = deflate_axis(&intermediate, &set, ctx)?;
        let gammas = set.zeros[0].clone();
        (deflated, set.coerced, gammas)
    } else {
        (complex_of(&intermediate, ctx.prec())?, Vec::new(), Vec::new())
    };

    let nu = monic_corner(img.rows(), &gammas, ctx)?;
    if nu.abs_f64() < NORMALIZATION_FLOOR {
        return Err(Error::DegenerateNormalization {
            magnitude: nu.abs_f64(),
        });
    }
    let (restored, max_imag) = divide_all(final_complex, &nu)?.into_real();
    check_imag(max_imag, &restored)?;

    Ok(RestorationResult {
        restored,
        mode: RestoreMode::Sequential,
        v_zero_count: k_v,
        u_zero_count: k_u,
        normalization: nu.to_f64_pair(),
        max_imag_residual: max_imag.max(imag_intermediate),
        coerced_v_points: coerced_v,
        coerced_u_points: coerced_u,
        v_report,
        u_report,
    })
}

fn restore_literal(
    img: &Image,
    cfg: &CEConfig,
    ctx: &PrecisionContext,
) -> Result<RestorationResult> {
    let prec = ctx.prec();
    let v_report = detect(img, cfg, CEAxis::UForm, ctx)?;
    let u_report = detect(img, cfg, CEAxis::VForm, ctx)?;
    let k_v = v_report.consensus_count;
    let k_u = u_report.consensus_count;
    if k_v == 0 && k_u == 0 {
        return Err(Error::NoBlurDetected);
    }
    if k_u >= img.rows() || k_v >= img.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot remove {k_u}x{k_v} zeros from a {}x{} image",
            img.rows(),
            img.cols()
        )));
    }
    let rows_out = img.rows() - k_u;
    let cols_out = img.cols() - k_v;
    if k_u >= rows_out || k_v >= cols_out {
        return Err(Error::DimensionMismatch(
            "output grid too small to resolve the factor's corner".into(),
        ));
    }

    let v_zeros = collect_zeros_with(img, cfg, CEAxis::UForm, k_v, rows_out, ctx)?;
    let u_zeros = collect_zeros_with(img, cfg, CEAxis::VForm, k_u, cols_out, ctx)?;

    let ugrid = unit_roots(rows_out, ctx);
    let vgrid = unit_roots(cols_out, ctx);
    let mut ratio = ComplexImage::zeros(rows_out, cols_out, prec);
    let mut denom = ComplexImage::zeros(rows_out, cols_out, prec);
    for (j, u) in ugrid.iter().enumerate() {
        let slice = img.vslice(u, ctx);
        for (k, v) in vgrid.iter().enumerate() {
            let g = slice.eval(v);
            let mut d = CBig::one(prec);
            for beta in &v_zeros.zeros[j] {
                d = &d * &(v - beta);
            }
            for gamma in &u_zeros.zeros[k] {
                d = &d * &(u - gamma);
            }
            ratio.set(j, k, g.try_div(&d)?);
            denom.set(j, k, d);
        }
    }

    let coeffs = idft2(&ratio, ctx)?;
    let factor = idft2(&denom, ctx)?;
    let nu = factor.get(k_u, k_v).clone();
    if nu.abs_f64() < NORMALIZATION_FLOOR {
        return Err(Error::DegenerateNormalization {
            magnitude: nu.abs_f64(),
        });
    }
    let (restored, max_imag) = divide_all(coeffs, &nu)?.into_real();
    check_imag(max_imag, &restored)?;

    Ok(RestorationResult {
        restored,
        mode: RestoreMode::Literal,
        v_zero_count: k_v,
        u_zero_count: k_u,
        normalization: nu.to_f64_pair(),
        max_imag_residual: max_imag,
        coerced_v_points: v_zeros.coerced,
        coerced_u_points: u_zeros.coerced,
        v_report,
        u_report,
    })
}

/// Agreement metrics between a restored image and a reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_abs_diff: f64,
    pub rmse: f64,
    /// Normalized cross-correlation; one for images equal up to an affine
    /// pixel map.
    pub ncc: f64,
}

/// Compares two images of equal dimensions.
pub fn verify(restored: &Image, reference: &Image) -> Result<VerifyReport> {
    if restored.rows() != reference.rows() || restored.cols() != reference.cols() {
        return Err(Error::DimensionMismatch(format!(
            "restored {}x{} vs reference {}x{}",
            restored.rows(),
            restored.cols(),
            reference.rows(),
            reference.cols()
        )));
    }
    let n = (restored.rows() * restored.cols()) as f64;
    let mut max_abs = 0.0f64;
    let mut sq = 0.0f64;
    let (mut sa, mut sb) = (0.0f64, 0.0f64);
    for x in 0..restored.rows() {
        for y in 0..restored.cols() {
            let (a, b) = (restored.get(x, y), reference.get(x, y));
            max_abs = max_abs.max((a - b).abs());
            sq += (a - b) * (a - b);
            sa += a;
            sb += b;
        }
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut num, mut va, mut vb) = (0.0f64, 0.0f64, 0.0f64);
    for x in 0..restored.rows() {
        for y in 0..restored.cols() {
            let (da, db) = (restored.get(x, y) - ma, reference.get(x, y) - mb);
            num += da * db;
            va += da * da;
            vb += db * db;
        }
    }
    let ncc = if va == 0.0 && vb == 0.0 {
        1.0
    } else if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        num / (va.sqrt() * vb.sqrt())
    };
    Ok(VerifyReport {
        max_abs_diff: max_abs,
        rmse: (sq / n).sqrt(),
        ncc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::SamplingPlan;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    /// Config with a wider angular step: small test images need the larger
    /// separation to keep non-factor branch scores clear of the threshold.
    fn test_cfg() -> CEConfig {
        CEConfig {
            plan: SamplingPlan {
                dphi: std::f64::consts::PI / 215.0,
                ..SamplingPlan::default()
            },
            sweep_count: 8,
            ..CEConfig::default()
        }
    }

    fn small_image() -> Image {
        Image::from_rows(vec![
            vec![9.0, 3.0, 17.0, 6.0],
            vec![2.0, 14.0, 5.0, 11.0],
            vec![7.0, 1.0, 13.0, 4.0],
            vec![10.0, 8.0, 2.0, 15.0],
        ])
        .unwrap()
    }

    /// Full-scale run on a generated scene; ignored by default for time.
    /// Run with --release --ignored.
    #[test]
    #[ignore]
    fn full_scene_sequential_restore_is_exact() {
        let cx = ctx();
        let scene = crate::image::gen_test_scene(1, false);
        let t0 = std::time::Instant::now();
        let result = restore(
            &scene.observed,
            &CEConfig::default(),
            RestoreMode::Sequential,
            &cx,
        )
        .unwrap();
        println!("sequential restore elapsed {:?}", t0.elapsed());
        assert_eq!(result.v_zero_count, 4);
        assert_eq!(result.u_zero_count, 3);
        let report = verify(&result.restored, &scene.true_image).unwrap();
        println!(
            "max_abs_diff {:.3e} rmse {:.3e} ncc {} nu ({}, {}) imag {:.3e} coerced v{:?} u{:?}",
            report.max_abs_diff,
            report.rmse,
            report.ncc,
            result.normalization.0,
            result.normalization.1,
            result.max_imag_residual,
            result.coerced_v_points,
            result.coerced_u_points,
        );
        assert!(report.max_abs_diff < 1e-6);
    }

    /// Full-scale literal-mode run on a separable scene; ignored for time.
    #[test]
    #[ignore]
    fn full_scene_literal_restore_is_exact_for_separable() {
        let cx = ctx();
        let scene = crate::image::gen_test_scene(1, true);
        let t0 = std::time::Instant::now();
        let result = restore(
            &scene.observed,
            &CEConfig::default(),
            RestoreMode::Literal,
            &cx,
        )
        .unwrap();
        println!("literal restore elapsed {:?}", t0.elapsed());
        assert_eq!(result.v_zero_count, 4);
        assert_eq!(result.u_zero_count, 3);
        let report = verify(&result.restored, &scene.true_image).unwrap();
        println!(
            "max_abs_diff {:.3e} rmse {:.3e} ncc {}",
            report.max_abs_diff, report.rmse, report.ncc
        );
        assert!(report.max_abs_diff < 1e-6);
    }

    #[test]
    fn collected_zeros_of_constant_factor_are_constant() {
        let cx = ctx();
        let f = small_image();
        // 2 + v: zero at -2 on every slice.
        let h = Image::from_rows(vec![vec![2.0, 1.0]]).unwrap();
        let g = f.convolve(&h);
        let set =
            collect_zeros_with(&g, &test_cfg(), CEAxis::UForm, 1, g.rows(), &cx).unwrap();
        assert_eq!(set.zeros.len(), g.rows());
        let p = cx.prec();
        let expected = CBig::from_f64(p, -2.0, 0.0).unwrap();
        for zs in &set.zeros {
            assert_eq!(zs.len(), 1);
            assert!(zs[0].dist_f64(&expected) < 1e-60);
        }
    }

    #[test]
    fn deflating_non_monic_factor_leaves_its_lead_as_scale() {
        let cx = ctx();
        let f = small_image();
        // 1 + 2v has zero -1/2 and leading coefficient 2, so removing the
        // monic factor (v + 1/2) leaves 2f.
        let h = Image::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let g = f.convolve(&h);
        let set =
            collect_zeros_with(&g, &test_cfg(), CEAxis::UForm, 1, g.rows(), &cx).unwrap();
        let (real, imag) = deflate_axis(&g, &set, &cx).unwrap().into_real();
        assert!(imag < 1e-80);
        assert_eq!(real.rows(), f.rows());
        assert_eq!(real.cols(), f.cols());
        for x in 0..f.rows() {
            for y in 0..f.cols() {
                assert!((real.get(x, y) - 2.0 * f.get(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sequential_restore_is_exact_for_two_axis_factor() {
        let cx = ctx();
        let f = small_image();
        // Both factors monic at their corners: (2 + v) and (3 + u).
        let hv = Image::from_rows(vec![vec![2.0, 1.0]]).unwrap();
        let hu = Image::from_rows(vec![vec![3.0], vec![1.0]]).unwrap();
        let g = f.convolve(&hv).convolve(&hu);
        assert_eq!(g.rows(), 5);
        assert_eq!(g.cols(), 5);
        let result = restore(&g, &test_cfg(), RestoreMode::Sequential, &cx).unwrap();
        assert_eq!(result.v_zero_count, 1);
        assert_eq!(result.u_zero_count, 1);
        assert_eq!(result.restored.rows(), 4);
        assert_eq!(result.restored.cols(), 4);
        let (nre, nim) = result.normalization;
        assert!((nre - 1.0).abs() < 1e-9 && nim.abs() < 1e-9);
        let report = verify(&result.restored, &f).unwrap();
        assert!(report.max_abs_diff < 1e-9, "diff {}", report.max_abs_diff);
        assert!((report.ncc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn literal_restore_matches_sequential_for_separable_factor() {
        let cx = ctx();
        let f = small_image();
        let hv = Image::from_rows(vec![vec![2.0, 1.0]]).unwrap();
        let hu = Image::from_rows(vec![vec![3.0], vec![1.0]]).unwrap();
        let g = f.convolve(&hv).convolve(&hu);
        let lit = restore(&g, &test_cfg(), RestoreMode::Literal, &cx).unwrap();
        assert_eq!(lit.restored.rows(), 4);
        assert_eq!(lit.restored.cols(), 4);
        let report = verify(&lit.restored, &f).unwrap();
        assert!(report.max_abs_diff < 1e-9, "diff {}", report.max_abs_diff);
        let seq = restore(&g, &test_cfg(), RestoreMode::Sequential, &cx).unwrap();
        let agreement = verify(&lit.restored, &seq.restored).unwrap();
        assert!(agreement.max_abs_diff < 1e-9);
    }

    #[test]
    fn unblurred_image_reports_no_factor() {
        let cx = ctx();
        let f = small_image();
        assert!(matches!(
            restore(&f, &test_cfg(), RestoreMode::Sequential, &cx),
            Err(Error::NoBlurDetected)
        ));
    }

    #[test]
    fn verify_reports_identity_and_rejects_mismatched_shapes() {
        let f = small_image();
        let report = verify(&f, &f).unwrap();
        assert_eq!(report.max_abs_diff, 0.0);
        assert_eq!(report.rmse, 0.0);
        assert!((report.ncc - 1.0).abs() < 1e-12);
        let other = Image::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            verify(&f, &other),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn verify_ncc_is_affine_invariant() {
        let f = small_image();
        let mut g = Image::zeros(4, 4);
        for x in 0..4 {
            for y in 0..4 {
                g.set(x, y, 3.0 * f.get(x, y) + 7.0);
            }
        }
        let report = verify(&g, &f).unwrap();
        assert!((report.ncc - 1.0).abs() < 1e-12);
        assert!(report.max_abs_diff > 1.0);
    }
}

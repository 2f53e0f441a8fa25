//! Tracking slice zeros across nearby sample points.
//!
//! A slice of the image transform at a fixed `u` is a polynomial whose
//! roots move continuously as `u` moves. The determinant test needs the
//! value of one root followed over a whole cluster of sample points, but a
//! numerical solver returns each point's roots in arbitrary order, so the
//! tracker matches roots between consecutive points by distance and
//! assembles them into branches. Matching is greedy nearest-first with a
//! 2-opt repair pass; if two candidates are close enough to be confused it
//! falls back to an optimal assignment and marks the affected branches.

use crate::error::Error;
use crate::image::Image;
use crate::num::{poly_roots_seeded, CBig, CPoly, PrecisionContext};
use crate::Result;
use pathfinding::matrix::Matrix;
use pathfinding::prelude::kuhn_munkres_min;
use rug::Float;

/// Which variable the slice polynomial is solved in.
///
/// `VRoots` fixes `u` and finds the zeros in `v` (the β values used by the
/// u-form determinant test); `URoots` fixes `v` and finds the zeros in `u`
/// (the γ values used by the v-form test).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    VRoots,
    URoots,
}

/// Direction the sample cluster advances around the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

/// How consecutive sample points are generated from the base point.
///
/// `Rotational` keeps every sample on the circle of radius ρ, stepping the
/// angle by Δφ; `Additive` adds the fixed complex step ρ·e^{∓iΔφ} to the
/// base point, leaving the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepping {
    Rotational,
    Additive,
}

/// Geometry of one sample-point cluster.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    /// Circle radius ρ.
    pub rho: f64,
    /// Angular step Δφ in radians.
    pub dphi: f64,
    /// Number of sample points (must match the determinant size m·n).
    pub count: usize,
    pub direction: Direction,
    pub stepping: Stepping,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            rho: 1.0,
            dphi: std::f64::consts::PI / 2150.0,
            count: 6,
            direction: Direction::Clockwise,
            stepping: Stepping::Rotational,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Malformed("sampling plan: rho must be positive".into()));
        }
        if !(self.dphi > 0.0 && self.dphi.is_finite()) {
            return Err(Error::Malformed("sampling plan: dphi must be positive".into()));
        }
        if self.count < 2 {
            return Err(Error::Malformed(
                "sampling plan: need at least two sample points".into(),
            ));
        }
        if self.dphi * self.count as f64 >= std::f64::consts::TAU {
            return Err(Error::Malformed(
                "sampling plan: cluster must span less than a full turn".into(),
            ));
        }
        Ok(())
    }
}

/// One slice zero followed across the cluster's sample points.
#[derive(Debug, Clone)]
pub struct RootBranch {
    /// The sample points u_0..u_{count-1}.
    pub points: Vec<CBig>,
    /// The matched root value at each sample point.
    pub values: Vec<CBig>,
    /// |slice(value)| at each point, for certification audits.
    pub residuals: Vec<f64>,
    pub branch_index: usize,
    /// Set when root matching at some step had a near-tie; the branch is
    /// still usable but its identity rests on the optimal assignment.
    pub ambiguous: bool,
}

/// The cluster of sample points around base angle `phi`.
///
/// Rotational stepping: u_ℓ = ρ·e^{i(φ ∓ ℓΔφ)} (minus for clockwise).
/// Additive stepping: u_ℓ = u_0 + ℓ·ρ·e^{∓iΔφ}.
pub fn sample_points(phi: &Float, plan: &SamplingPlan, ctx: &PrecisionContext) -> Vec<CBig> {
    let prec = ctx.prec();
    let rho = ctx.float(plan.rho);
    let signed_dphi = match plan.direction {
        Direction::Clockwise => -plan.dphi,
        Direction::Counterclockwise => plan.dphi,
    };
    match plan.stepping {
        Stepping::Rotational => (0..plan.count)
            .map(|l| {
                let theta = Float::with_val(prec, phi)
                    + ctx.float(signed_dphi) * Float::with_val(prec, l as u32);
                CBig::polar(&rho, &theta)
            })
            .collect(),
        Stepping::Additive => {
            let base = CBig::polar(&rho, &Float::with_val(prec, phi));
            let step = CBig::polar(&rho, &ctx.float(signed_dphi));
            (0..plan.count)
                .map(|l| {
                    let mut offset = step.scale(&Float::with_val(prec, l as u32));
                    offset += &base;
                    offset
                })
                .collect()
        }
    }
}

/// Builds the slice polynomial for one axis and checks it has its nominal
/// degree (cols-1 for v-roots, rows-1 for u-roots).
fn slice_at(
    img: &Image,
    point: &CBig,
    axis: SliceAxis,
    ctx: &PrecisionContext,
    point_index: usize,
) -> Result<CPoly> {
    let (poly, nominal) = match axis {
        SliceAxis::VRoots => (img.vslice(point, ctx), img.cols() - 1),
        SliceAxis::URoots => (img.uslice(point, ctx), img.rows() - 1),
    };
    let trimmed = poly.trimmed(ctx);
    match trimmed.degree() {
        Some(d) if d == nominal && d >= 1 => Ok(trimmed),
        _ => Err(Error::DegreeDrop { point: point_index }),
    }
}

/// Solves and matches all slice zeros across the sample cluster.
///
/// Returns one branch per root of the first point's slice; branch `i`'s
/// value at point `ℓ+1` is the root matched to its value at point `ℓ`.
pub fn branches(
    img: &Image,
    phi: &Float,
    plan: &SamplingPlan,
    axis: SliceAxis,
    ctx: &PrecisionContext,
) -> Result<Vec<RootBranch>> {
    plan.validate()?;
    let points = sample_points(phi, plan, ctx);

    let first_poly = slice_at(img, &points[0], axis, ctx, 0)?;
    let mut current = crate::num::poly_roots(&first_poly, ctx)?;
    let degree = current.len();

    let residual_of = |poly: &CPoly, roots: &[CBig]| -> Vec<f64> {
        roots.iter().map(|r| poly.eval(r).abs_f64()).collect()
    };

    let mut values_per_point: Vec<Vec<CBig>> = Vec::with_capacity(plan.count);
    let mut residuals_per_point: Vec<Vec<f64>> = Vec::with_capacity(plan.count);
    let mut ambiguous = vec![false; degree];
    residuals_per_point.push(residual_of(&first_poly, &current));
    values_per_point.push(current.clone());

    for (l, point) in points.iter().enumerate().skip(1) {
        let poly = slice_at(img, point, axis, ctx, l)?;
        let solved = poly_roots_seeded(&poly, ctx, Some(&current))?;
        if solved.len() != degree {
            return Err(Error::DegreeDrop { point: l });
        }
        let matching = match_roots(&current, &solved, ctx);
        let next: Vec<CBig> = matching
            .perm
            .iter()
            .map(|&j| solved[j].clone())
            .collect();
        for (i, amb) in matching.ambiguous.iter().enumerate() {
            if *amb {
                ambiguous[i] = true;
            }
        }
        residuals_per_point.push(residual_of(&poly, &next));
        values_per_point.push(next.clone());
        current = next;
    }

    Ok((0..degree)
        .map(|i| RootBranch {
            points: points.clone(),
            values: values_per_point.iter().map(|vs| vs[i].clone()).collect(),
            residuals: residuals_per_point.iter().map(|rs| rs[i]).collect(),
            branch_index: i,
            ambiguous: ambiguous[i],
        })
        .collect())
}

/// Result of matching two root lists.
#[derive(Debug, Clone)]
pub struct Matching {
    /// `perm[i]` is the index in `next` assigned to `prev[i]`.
    pub perm: Vec<usize>,
    /// Per-`prev`-index flag: the assignment had a near-tie there.
    pub ambiguous: Vec<bool>,
}

/// Matches `prev` to `next` (equal lengths) minimizing distances:
/// greedy smallest-pair-first, then 2-opt swaps until no single swap
/// improves the total. If any choice is ambiguous within the context's
/// cluster tolerance, the permutation is recomputed as a globally optimal
/// assignment and the tied entries stay flagged.
pub fn match_roots(prev: &[CBig], next: &[CBig], ctx: &PrecisionContext) -> Matching {
    assert_eq!(prev.len(), next.len(), "matching needs equal-length lists");
    let n = prev.len();
    if n == 0 {
        return Matching {
            perm: Vec::new(),
            ambiguous: Vec::new(),
        };
    }
    let dist: Vec<Vec<f64>> = prev
        .iter()
        .map(|p| next.iter().map(|q| p.dist_f64(q)).collect())
        .collect();
    let cluster = ctx.cluster_tol().to_f64();

    // Greedy: take the globally smallest remaining pair each time.
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(i1, j1), &(i2, j2)| {
        dist[i1][j1]
            .partial_cmp(&dist[i2][j2])
            .unwrap()
            .then(i1.cmp(&i2))
            .then(j1.cmp(&j2))
    });
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut ambiguous = vec![false; n];
    let mut assigned = 0;
    for &(i, j) in &pairs {
        if assigned == n {
            break;
        }
        if perm[i] != usize::MAX || taken[j] {
            continue;
        }
        // A near-tie: another free candidate almost as close as this one.
        let tie = (0..n).any(|j2| {
            j2 != j && !taken[j2] && (dist[i][j2] - dist[i][j]).abs() <= cluster
        });
        if tie {
            ambiguous[i] = true;
        }
        perm[i] = j;
        taken[j] = true;
        assigned += 1;
    }

    // 2-opt repair: swap any pair of assignments that lowers the total.
    let mut changed = true;
    while changed {
        changed = false;
        for i1 in 0..n {
            for i2 in (i1 + 1)..n {
                let (j1, j2) = (perm[i1], perm[i2]);
                if dist[i1][j2] + dist[i2][j1] + 1e-300 < dist[i1][j1] + dist[i2][j2] {
                    perm[i1] = j2;
                    perm[i2] = j1;
                    changed = true;
                }
            }
        }
    }

    if ambiguous.iter().any(|&a| a) {
        perm = optimal_assignment(&dist);
    }
    Matching { perm, ambiguous }
}

/// Globally optimal assignment (Hungarian method) on a scaled integer copy
/// of the distance matrix.
fn optimal_assignment(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    let max_d = dist
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let scale = (1u64 << 40) as f64 / max_d;
    let weights = Matrix::from_fn(n, n, |(i, j)| (dist[i][j] * scale) as i64);
    let (_, assignment) = kuhn_munkres_min(&weights);
    assignment
}

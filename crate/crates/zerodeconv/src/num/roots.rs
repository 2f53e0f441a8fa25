//! Simultaneous root finding (Aberth-Ehrlich) at extended precision.
//!
//! All roots of a polynomial are iterated together; each root's update is
//! a Newton step divided by a repulsion term from the other iterates, which
//! gives cubic convergence for simple roots and keeps iterates from
//! collapsing onto the same root. Iterates start on a perturbed circle of
//! Cauchy-bound radius unless the caller supplies warm-start guesses (the
//! branch tracker reuses the previous sample point's roots, which cuts the
//! iteration count by an order of magnitude). A few plain Newton steps
//! polish the converged set, and every root is certified against the
//! context's residual tolerance before it is returned.
//!
//! Residual thresholds are relative to the evaluation scale `Σ|a_k|·|z|^k`
//! at each root, the backward-stable criterion: a root of modulus well
//! above one has a far larger attainable residual than one inside the unit
//! disc, and an absolute threshold would reject it no matter how many
//! iterations run.

use super::cbig::CBig;
use super::poly::CPoly;
use super::PrecisionContext;
use crate::error::Error;
use crate::Result;
use rug::Float;

const MAX_ITERATIONS: u32 = 500;
const POLISH_STEPS: usize = 3;

/// All complex roots of `p`, in no particular order.
pub fn poly_roots(p: &CPoly, ctx: &PrecisionContext) -> Result<Vec<CBig>> {
    poly_roots_seeded(p, ctx, None)
}

/// Root solve with optional warm-start guesses (one per root; ignored if
/// the count does not match the trimmed degree).
pub(crate) fn poly_roots_seeded(
    p: &CPoly,
    ctx: &PrecisionContext,
    init: Option<&[CBig]>,
) -> Result<Vec<CBig>> {
    let p = p.clone().trimmed(ctx);
    let d = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::DegreeTooLow),
    };
    let prec = ctx.prec();

    if d == 1 {
        let root = (-&p.coeffs[0]).try_div(&p.coeffs[1])?;
        return Ok(vec![root]);
    }

    let mut z: Vec<CBig> = match init {
        Some(g) if g.len() == d => g.to_vec(),
        _ => initial_circle(&p, d, ctx),
    };

    // Residual factor that counts as "done" during iteration: comfortably
    // above the evaluation noise floor, far below the certification bound.
    // Both are multiplied by the per-root evaluation scale.
    let freeze_eps = {
        let mut t = Float::with_val(prec, 1);
        t >>= prec - 24;
        t
    };
    let step_eps = {
        let mut t = Float::with_val(prec, 1);
        t >>= prec - 16;
        t
    };

    let mut frozen = vec![false; d];
    let mut stagnant_passes = 0u32;
    for _ in 0..MAX_ITERATIONS {
        let mut all_frozen = true;
        let mut max_rel_step = Float::new(prec);
        for k in 0..d {
            if frozen[k] {
                continue;
            }
            let (pv, dv) = p.eval_with_deriv(&z[k]);
            if pv.abs() <= eval_scale(&p, &z[k], prec) * &freeze_eps {
                frozen[k] = true;
                continue;
            }
            all_frozen = false;
            let newton = match pv.try_div(&dv) {
                Ok(n) => n,
                Err(_) => {
                    z[k] = jitter(&z[k], k, ctx);
                    continue;
                }
            };
            let mut repulsion = CBig::zero(prec);
            let mut collided = false;
            for j in 0..d {
                if j == k {
                    continue;
                }
                let diff = &z[k] - &z[j];
                match CBig::one(prec).try_div(&diff) {
                    Ok(inv) => repulsion += &inv,
                    Err(_) => {
                        collided = true;
                        break;
                    }
                }
            }
            if collided {
                z[k] = jitter(&z[k], k, ctx);
                continue;
            }
            let denom = &CBig::one(prec) - &(&newton * &repulsion);
            let step = match newton.try_div(&denom) {
                Ok(s) => s,
                Err(_) => newton,
            };
            let rel = step.abs() / (Float::with_val(prec, 1) + z[k].abs());
            if rel > max_rel_step {
                max_rel_step = rel;
            }
            z[k] = &z[k] - &step;
        }
        if all_frozen {
            break;
        }
        if max_rel_step <= step_eps {
            stagnant_passes += 1;
            if stagnant_passes >= 2 {
                break;
            }
        } else {
            stagnant_passes = 0;
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..POLISH_STEPS {
            let (pv, dv) = p.eval_with_deriv(zk);
            if pv.abs() <= eval_scale(&p, zk, prec) * &freeze_eps {
                break;
            }
            match pv.try_div(&dv) {
                Ok(step) => *zk = &*zk - &step,
                Err(_) => break,
            }
        }
    }

    // Certify each root against its own evaluation scale; report the worst
    // residual as a multiple of its bound if any root fails.
    let mut worst_ratio = Float::new(prec);
    let mut worst_abs = 0.0f64;
    for zk in &z {
        let r = p.eval(zk).abs();
        if r.is_zero() {
            continue;
        }
        let bound = eval_scale(&p, zk, prec) * ctx.root_tol();
        if bound.is_zero() {
            return Err(Error::RootsDidNotConverge {
                worst_residual: r.to_f64(),
                iterations: MAX_ITERATIONS,
            });
        }
        let ratio = Float::with_val(prec, &r / &bound);
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_abs = r.to_f64();
        }
    }
    if worst_ratio > 1 {
        return Err(Error::RootsDidNotConverge {
            worst_residual: worst_abs,
            iterations: MAX_ITERATIONS,
        });
    }
    Ok(z)
}

/// Evaluation magnitude scale `Σ|a_k|·|z|^k`: the natural size of rounding
/// noise when evaluating at `z`, and the scale against which a residual
/// certifies `z` as the exact root of a nearby polynomial.
fn eval_scale(p: &CPoly, z: &CBig, prec: u32) -> Float {
    let az = z.abs();
    let mut acc = Float::new(prec);
    for c in p.coeffs.iter().rev() {
        acc *= &az;
        acc += c.abs();
    }
    acc
}

/// Deterministically jittered circle of initial guesses with the Cauchy
/// root bound as radius.
fn initial_circle(p: &CPoly, d: usize, ctx: &PrecisionContext) -> Vec<CBig> {
    let prec = ctx.prec();
    let lead = p.coeffs[d].abs();
    let mut ratio_max = Float::new(prec);
    for c in &p.coeffs[..d] {
        let r = c.abs() / &lead;
        if r > ratio_max {
            ratio_max = r;
        }
    }
    let radius = Float::with_val(prec, 1) + ratio_max;
    let two_pi = ctx.pi() * 2u32;

    let mut rng_state = 0x9E37_79B9_7F4A_7C15u64 ^ (d as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let mut next_unit = || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((rng_state >> 11) as f64) / ((1u64 << 53) as f64)
    };

    (0..d)
        .map(|k| {
            let r_jit = 0.9 + 0.2 * next_unit();
            let a_jit = 0.25 * (next_unit() - 0.5);
            let r = Float::with_val(prec, &radius) * Float::with_val(prec, r_jit);
            let theta = Float::with_val(prec, &two_pi)
                * Float::with_val(prec, (k as f64 + 0.37) / d as f64 + a_jit);
            CBig::polar(&r, &theta)
        })
        .collect()
}

/// Small deterministic displacement used when iterates collide exactly.
fn jitter(z: &CBig, k: usize, ctx: &PrecisionContext) -> CBig {
    let prec = ctx.prec();
    let scale = (Float::with_val(prec, 1) + z.abs()) * ctx.cluster_tol();
    let angle = ctx.float(0.618_033_988_749_894_9 * (k as f64 + 1.0));
    let bump = CBig::polar(&scale, &angle);
    z + &bump
}

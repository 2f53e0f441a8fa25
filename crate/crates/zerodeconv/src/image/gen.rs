//! Seeded synthetic test scenes: a random integer true image convolved
//! with four small integer blur kernels (1x2, 2x1, 2x2, 2x3).
//!
//! Everything is drawn from one ChaCha8 stream keyed by the seed, so a
//! given seed always produces the same scene byte for byte. Kernel
//! parameters are rejection-sampled until the blur zero curves are
//! well-conditioned for detection and restoration:
//!
//! - kernel entries are strictly positive integers and each kernel's
//!   highest-order corner entry is 1, which pins the scale convention of
//!   the deconvolution (deflation by monic factors then reproduces the
//!   true image exactly);
//! - zero curves of distinct kernels stay separated on the unit circle, so
//!   root-to-branch matching cannot mix kernels;
//! - slice leading coefficients stay bounded away from zero on every
//!   sampling grid the pipeline uses, so slice degrees never collapse;
//! - the observed image is integer-valued and fits 16-bit PGM exactly
//!   (lossless storage is what lets later stages treat the transform
//!   factorization as exact).

use super::Image;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A generated scene: the sharp image, the four kernels in application
/// order, and their sequential convolution.
#[derive(Debug, Clone)]
pub struct TestScene {
    pub true_image: Image,
    pub blurs: Vec<Image>,
    pub observed: Image,
    pub seed: u64,
    pub separable: bool,
}

const TRUE_SIZE: usize = 40;
const MAX_ATTEMPTS: u32 = 10_000;
/// Minimum distance between zero curves of different kernels on the unit
/// circle (root matching must never be able to confuse two kernels).
const CROSS_GAP: f64 = 0.05;
/// Minimum distance between the 2x3 kernel's own two zero branches.
const PAIR_GAP: f64 = 0.02;
/// Maximum movement of any zero branch between adjacent points of a
/// 256-point circle grid (keeps branches slow relative to sampling steps).
const MAX_STEP: f64 = 0.15;
/// Largest zero magnitude tolerated (keeps determinant entries bounded).
const MAX_ZERO: f64 = 8.0;

/// Generates the standard test scene for a seed: 40x40 true image, blurs
/// of sizes 1x2, 2x1, 2x2, 2x3, and the 43x44 observed image.
///
/// With `separable` set, the 2x2 and 2x3 kernels are outer products, whose
/// zero curves are constant; the default kernels are checked non-separable.
pub fn gen_test_scene(seed: u64, separable: bool) -> TestScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(blurs) = (if separable {
            draw_separable_kernels(&mut rng)
        } else {
            draw_default_kernels(&mut rng)
        }) else {
            continue;
        };
        if !curves_well_conditioned(&blurs) {
            continue;
        }
        let sum_product: f64 = blurs.iter().map(Image::sum).product();
        let f_max = (65535.0 / sum_product).floor().min(255.0) as u32;
        if f_max < 16 {
            continue;
        }
        let true_image = draw_true_image(&mut rng, f_max);
        if !leading_slices_safe(&true_image) {
            continue;
        }
        let mut observed = true_image.clone();
        for blur in &blurs {
            observed = observed.convolve(blur);
        }
        debug_assert!(observed.max_pixel() <= 65535.0);
        debug_assert!(
            (observed.sum() - true_image.sum() * sum_product).abs()
                <= 1e-12 * observed.sum().abs()
        );
        return TestScene {
            true_image,
            blurs,
            observed,
            seed,
            separable,
        };
    }
    panic!("scene generation did not converge for seed {seed}");
}

fn draw_true_image(rng: &mut ChaCha8Rng, f_max: u32) -> Image {
    let rows = (0..TRUE_SIZE)
        .map(|_| {
            (0..TRUE_SIZE)
                .map(|_| rng.gen_range(0..=f_max) as f64)
                .collect()
        })
        .collect();
    Image::from_rows(rows).expect("generated image is rectangular")
}

/// Default kernels:
///   h1 = [[a, 1]]              (1x2)
///   h2 = [[c], [1]]            (2x1)
///   h3 = [[p, q], [r, 1]]      (2x2, non-separable: p != q*r)
///   h4 = [[a0, a1, a2], [b0, b1, 1]]  (2x3, rows not proportional)
fn draw_default_kernels(rng: &mut ChaCha8Rng) -> Option<Vec<Image>> {
    let a = rng.gen_range(2..=3) as f64;
    let c = rng.gen_range(2..=3) as f64;
    let q = rng.gen_range(2..=3) as f64;
    let r = rng.gen_range(2..=3) as f64;
    let p = rng.gen_range(1..=5) as f64;
    let a2 = rng.gen_range(2..=4) as f64;
    let b0 = rng.gen_range(2..=3) as f64;
    let b1 = rng.gen_range(1..=2) as f64;
    let a0 = rng.gen_range(1..=3) as f64;
    let a1 = rng.gen_range(1..=3) as f64;

    // 2x2 must not factor into an outer product.
    if p == q * r {
        return None;
    }
    // 2x3 rows must not be proportional (all three 2x2 minors vanishing).
    if a0 * b1 == a1 * b0 && a1 == a2 * b1 && a0 == a2 * b0 {
        return None;
    }
    // The second-stage zero constants are the roots of the v-leading
    // polynomial (c+u)(q+u)(a2+u); keep them distinct.
    if c == q || c == a2 || q == a2 {
        return None;
    }
    build_kernels(a, c, [p, q, r], [a0, a1, a2, b0, b1], 2100.0)
}

/// Separable variant: h3 = (t + v)(s + u), h4 = (t0 + t1 v + v^2)(s' + u).
fn draw_separable_kernels(rng: &mut ChaCha8Rng) -> Option<Vec<Image>> {
    let a = rng.gen_range(2..=5) as f64;
    let c = rng.gen_range(2..=5) as f64;
    let s = rng.gen_range(2..=5) as f64;
    let t = rng.gen_range(2..=5) as f64;
    let s2 = rng.gen_range(2..=5) as f64;
    let t0 = rng.gen_range(2..=5) as f64;
    let t1 = rng.gen_range(1..=5) as f64;

    if a == t {
        return None;
    }
    if c == s || c == s2 || s == s2 {
        return None;
    }
    // v^2 + t1 v + t0 must not vanish at v = -1 (a unit-circle grid point).
    if t0 - t1 + 1.0 == 0.0 {
        return None;
    }
    build_kernels(a, c, [s * t, s, t], [s2 * t0, s2 * t1, s2, t0, t1], 4080.0)
}

fn build_kernels(a: f64, c: f64, h3: [f64; 3], h4: [f64; 5], budget: f64) -> Option<Vec<Image>> {
    let [p, q, r] = h3;
    let [a0, a1, a2, b0, b1] = h4;
    let kernels = vec![
        Image::from_rows(vec![vec![a, 1.0]]).ok()?,
        Image::from_rows(vec![vec![c], vec![1.0]]).ok()?,
        Image::from_rows(vec![vec![p, q], vec![r, 1.0]]).ok()?,
        Image::from_rows(vec![vec![a0, a1, a2], vec![b0, b1, 1.0]]).ok()?,
    ];
    // The product of kernel sums bounds the observed pixels (times the true
    // image's maximum); keeping it small preserves pixel head-room.
    let sum_product: f64 = kernels.iter().map(Image::sum).product();
    if sum_product > budget {
        return None;
    }
    Some(kernels)
}

/// All unit-circle angles the pipeline ever samples at: a dense 256-point
/// screen plus the exact DFT grids (43 rows, 40 target columns) and the
/// 64-angle detection sweep.
fn probe_angles() -> Vec<f64> {
    let mut angles = Vec::new();
    let tau = std::f64::consts::TAU;
    for n in [256usize, 43, 44, 40, 64] {
        for j in 0..n {
            angles.push(tau * j as f64 / n as f64);
        }
    }
    angles
}

/// Checks that the kernels' zero curves are separated, bounded, and slow
/// on the unit circle, for both slicing directions.
fn curves_well_conditioned(blurs: &[Image]) -> bool {
    let h1 = &blurs[0];
    let h3 = &blurs[2];
    let h4 = &blurs[3];
    let (a, c) = (h1.get(0, 0), blurs[1].get(0, 0));
    let (p, q, r) = (h3.get(0, 0), h3.get(0, 1), h3.get(1, 0));
    let (a0, a1, a2) = (h4.get(0, 0), h4.get(0, 1), h4.get(0, 2));
    let (b0, b1) = (h4.get(1, 0), h4.get(1, 1));

    // Zeros in v at fixed u on the unit circle.
    let beta1 = C64::new(-a, 0.0);
    let beta3 = |u: C64| (C64::new(p, 0.0) + u.scale(r)).neg().div(C64::new(q, 0.0) + u);
    let beta4 = |u: C64| {
        quad_roots(
            C64::new(a2, 0.0) + u,
            C64::new(a1, 0.0) + u.scale(b1),
            C64::new(a0, 0.0) + u.scale(b0),
        )
    };
    // Zeros in u at fixed v on the unit circle.
    let gamma2 = C64::new(-c, 0.0);
    let gamma3 = |v: C64| (C64::new(p, 0.0) + v.scale(q)).neg().div(C64::new(r, 0.0) + v);
    let gamma4 = |v: C64| {
        let num = C64::new(a0, 0.0) + v.scale(a1) + v.mul(v).scale(a2);
        let den = C64::new(b0, 0.0) + v.scale(b1) + v.mul(v);
        if den.abs() < 0.15 {
            return None;
        }
        Some(num.neg().div(den))
    };

    for theta in probe_angles() {
        let w = C64::new(theta.cos(), theta.sin());

        let b3 = beta3(w);
        let Some((b4a, b4b)) = beta4(w) else {
            return false;
        };
        let vals = [beta1, b3, b4a, b4b];
        if vals.iter().any(|z| z.abs() > MAX_ZERO) {
            return false;
        }
        // Branch pairs of distinct kernels must stay apart; the 2x3's own
        // pair has its own (smaller) floor.
        let cross = [
            beta1.sub(b3),
            beta1.sub(b4a),
            beta1.sub(b4b),
            b3.sub(b4a),
            b3.sub(b4b),
        ];
        if cross.iter().any(|d| d.abs() < CROSS_GAP) {
            return false;
        }
        if b4a.sub(b4b).abs() < PAIR_GAP {
            return false;
        }

        let g3 = gamma3(w);
        let Some(g4) = gamma4(w) else {
            return false;
        };
        let gvals = [gamma2, g3, g4];
        if gvals.iter().any(|z| z.abs() > MAX_ZERO) {
            return false;
        }
        if gamma2.sub(g3).abs() < CROSS_GAP
            || gamma2.sub(g4).abs() < CROSS_GAP
            || g3.sub(g4).abs() < CROSS_GAP
        {
            return false;
        }
    }

    // Velocity screen on the dense grid: no branch may jump more than
    // MAX_STEP between adjacent probe points.
    let tau = std::f64::consts::TAU;
    let mut prev: Option<(C64, C64, C64, C64, C64)> = None;
    for j in 0..=256usize {
        let theta = tau * (j % 256) as f64 / 256.0;
        let w = C64::new(theta.cos(), theta.sin());
        let b3 = beta3(w);
        let Some((mut b4a, mut b4b)) = beta4(w) else {
            return false;
        };
        let g3 = gamma3(w);
        let Some(g4) = gamma4(w) else { return false };
        if let Some((pb3, pb4a, pb4b, pg3, pg4)) = prev {
            // Pair the quadratic's two roots with the previous step's.
            if pb4a.sub(b4a).abs() + pb4b.sub(b4b).abs()
                > pb4a.sub(b4b).abs() + pb4b.sub(b4a).abs()
            {
                std::mem::swap(&mut b4a, &mut b4b);
            }
            let steps = [
                pb3.sub(b3),
                pb4a.sub(b4a),
                pb4b.sub(b4b),
                pg3.sub(g3),
                pg4.sub(g4),
            ];
            if steps.iter().any(|d| d.abs() > MAX_STEP) {
                return false;
            }
        }
        prev = Some((b3, b4a, b4b, g3, g4));
    }
    true
}

/// The true image's own boundary slices must not lose degree anywhere the
/// pipeline samples: its last column drives the leading coefficient of
/// every v-slice, its last row that of every u-slice.
fn leading_slices_safe(img: &Image) -> bool {
    let last_col: Vec<f64> = (0..img.rows()).map(|x| img.get(x, img.cols() - 1)).collect();
    let last_row: Vec<f64> = (0..img.cols()).map(|y| img.get(img.rows() - 1, y)).collect();
    for vec in [&last_col, &last_row] {
        let scale: f64 = vec.iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            return false;
        }
        for theta in probe_angles() {
            let w = C64::new(theta.cos(), theta.sin());
            let mut acc = C64::new(0.0, 0.0);
            let mut wp = C64::new(1.0, 0.0);
            for &coeff in vec.iter() {
                acc = acc + wp.scale(coeff);
                wp = wp.mul(w);
            }
            if acc.abs() < 1e-6 * scale {
                return false;
            }
        }
    }
    true
}

/// Minimal double-precision complex arithmetic for the generator's screens.
#[derive(Debug, Clone, Copy)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn scale(self, k: f64) -> Self {
        Self::new(self.re * k, self.im * k)
    }
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        Self::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    fn sqrt(self) -> Self {
        let r = self.abs().sqrt();
        let theta = self.im.atan2(self.re) / 2.0;
        Self::new(r * theta.cos(), r * theta.sin())
    }
}

impl std::ops::Add for C64 {
    type Output = C64;
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
}

/// Roots of `l·z² + m·z + n`; `None` when the leading coefficient is tiny.
fn quad_roots(l: C64, m: C64, n: C64) -> Option<(C64, C64)> {
    if l.abs() < 0.15 {
        return None;
    }
    let disc = m.mul(m).sub(l.mul(n).scale(4.0)).sqrt();
    // Pick the sign that avoids cancellation in -m ± disc.
    let s = if (m + disc).abs() >= m.sub(disc).abs() {
        m + disc
    } else {
        m.sub(disc)
    };
    if s.abs() == 0.0 {
        // m and disc both zero: double root at the vertex.
        let root = m.neg().div(l.scale(2.0));
        return Some((root, root));
    }
    let r1 = s.neg().div(l.scale(2.0));
    let r2 = n.div(l).div(r1);
    Some((r1, r2))
}

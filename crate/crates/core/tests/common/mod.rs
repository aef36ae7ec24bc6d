#![allow(dead_code)]

use rmls::instance::{generate_with_kappa, GeneratorConfig, InstanceMetadata, QlspInstance};
use rmls::linalg::{HermitianMatrix, StateVector, C64};

/// 40-digit reference values of `(κ, v_a, v_b, L*)`.
pub const V_BOUNDS: [(f64, f64, f64, f64); 4] = [
    (
        1.0,
        -0.881_373_587_019_543,
        0.881_373_587_019_543,
        3.514_188_685_361_28,
    ),
    (
        2.0,
        -0.949_300_947_316_44,
        1.485_459_699_395_30,
        4.494_446_828_829_83,
    ),
    (
        10.0,
        -0.978_898_176_840_96,
        3.380_672_461_514_15,
        6.770_535_752_391_57,
    ),
    (
        50.0,
        -0.980_203_522_511_94,
        5.559_606_566_417_36,
        9.046_624_675_953_32,
    ),
];

/// `∫₀¹ √2 / Δ*(s)^{3/2} ds = √2 κ (1 + κ)` and `∫₀¹ √2 / Δ*(s) ds = π κ / √2`.
pub const GAP_INTEGRALS: [(f64, f64, f64); 3] = [
    (2.0, 8.485_281_374_238_57, 4.442_882_938_158_37),
    (10.0, 155.563_491_861_040_5, 22.214_414_690_791_83),
    (50.0, 3_606.244_584_051_392, 111.072_073_453_959_2),
];

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40)
}

/// Random instance with `κ` within `tol` of `kappa`, `d = n`.
pub fn instance(n: u32, kappa: f64, tol: f64, seed: u64) -> QlspInstance {
    let mut cfg = GeneratorConfig::new(n, n as usize, kappa, seed);
    cfg.kappa_tol = tol;
    generate_with_kappa(&cfg).expect("instance generation")
}

/// Positive-definite instance `A²` built from a random instance; its condition
/// number is the square of the source's.
pub fn positive_definite_instance(n: u32, kappa_root: f64, seed: u64) -> QlspInstance {
    let src = instance(n, kappa_root, 0.5, seed);
    let a = src.a().matrix();
    let a2 = HermitianMatrix::hermitize(&(a * a));
    QlspInstance::new(a2, src.b().clone(), src.dim(), InstanceMetadata::default())
        .expect("A² is a valid instance")
}

pub fn identity_instance(n: u32) -> QlspInstance {
    let dim = 1usize << n;
    let b = StateVector::normalized(
        (0..dim)
            .map(|i| C64::new(1.0 + i as f64, -0.5 * i as f64))
            .collect(),
    )
    .unwrap();
    QlspInstance::new(
        HermitianMatrix::identity(dim),
        b,
        1,
        InstanceMetadata::default(),
    )
    .unwrap()
}

pub fn linspace(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            if i + 1 == points {
                1.0
            } else {
                i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

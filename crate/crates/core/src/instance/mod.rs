//! Random QLSP instances: sparse Hermitian `A` with `‖A‖ = 1`, sparse unit
//! `b`, post-selected on the condition number.

mod format;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, condition_number_from_eigenvalues, eigvalsh, norm, solve, HermitianMatrix,
    Matrix, StateVector, Tolerances, C64,
};
use crate::rng;

pub use format::{
    load_instance, parse_instance, save_instance, write_instance, INSTANCE_EXTENSION,
};

/// Tolerance on `‖A‖ = 1`.
pub const NORM_TOL: f64 = 1e-9;
/// Entries with modulus at or below this count as structural zeros.
pub const ZERO_ENTRY_TOL: f64 = 0.0;
/// Bound on `‖A x − b‖` for the classical reference solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

const ATTEMPT_BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    /// Number of system qubits; `N = 2^n`.
    pub n: u32,
    /// Maximum nonzeros per row of `A`.
    pub d: usize,
    pub kappa_target: f64,
    pub kappa_tol: f64,
    /// Number of nonzero amplitudes in `b`.
    pub b_sparsity: usize,
    pub max_attempts: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n: u32, d: usize, kappa_target: f64, seed: u64) -> Self {
        GeneratorConfig {
            n,
            d,
            kappa_target,
            kappa_tol: 1e-3,
            b_sparsity: d.min(1 << n),
            max_attempts: 2_000_000,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 12 {
            return Err(Error::invalid(format!(
                "n must be in 1..=12, got {}",
                self.n
            )));
        }
        if self.d == 0 || self.d > self.dim() {
            return Err(Error::invalid(format!(
                "d must be in 1..={}, got {}",
                self.dim(),
                self.d
            )));
        }
        if !(self.kappa_target >= 1.0) || !self.kappa_target.is_finite() {
            return Err(Error::invalid(format!(
                "kappa target must be >= 1, got {}",
                self.kappa_target
            )));
        }
        if !(self.kappa_tol >= 0.0) {
            return Err(Error::invalid("kappa tolerance must be >= 0"));
        }
        if self.b_sparsity == 0 || self.b_sparsity > self.dim() {
            return Err(Error::invalid(format!(
                "b sparsity must be in 1..={}, got {}",
                self.dim(),
                self.b_sparsity
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("max_attempts must be >= 1"));
        }
        Ok(())
    }
}

/// Provenance recorded alongside an instance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceMetadata {
    pub seed: Option<u64>,
    pub kappa_target: Option<f64>,
    pub kappa_tol: Option<f64>,
    pub b_sparsity: Option<usize>,
    pub attempts: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QlspInstance {
    n: u32,
    d: usize,
    a: HermitianMatrix,
    b: StateVector,
    kappa: f64,
    metadata: InstanceMetadata,
}

impl QlspInstance {
    /// Validates `‖A‖ = 1`, the row sparsity bound, invertibility and the
    /// dimensions, caching `κ`.
    pub fn new(
        a: HermitianMatrix,
        b: StateVector,
        d: usize,
        metadata: InstanceMetadata,
    ) -> Result<Self> {
        let dim = a.dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::invalid(format!(
                "dimension of A must be a power of two >= 2, got {dim}"
            )));
        }
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
        if d == 0 {
            return Err(Error::invalid("sparsity bound d must be >= 1"));
        }
        for row in 0..dim {
            let nonzeros = a.matrix().row_nonzeros(row, ZERO_ENTRY_TOL);
            if nonzeros > d {
                return Err(Error::SparsityExceeded { row, nonzeros, d });
            }
        }
        let vals = eigvalsh(&a)?;
        let spectral_norm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if (spectral_norm - 1.0).abs() > NORM_TOL {
            return Err(Error::BadNorm {
                norm: spectral_norm,
                tol: NORM_TOL,
            });
        }
        let kappa = condition_number_from_eigenvalues(&vals, Tolerances::default().singular)?;
        Ok(QlspInstance {
            n: dim.trailing_zeros(),
            d,
            a,
            b,
            kappa,
            metadata,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> &HermitianMatrix {
        &self.a
    }

    pub fn b(&self) -> &StateVector {
        &self.b
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigvalsh(&self.a)?[0])
    }
}

/// Random symmetric sparsity pattern with at most `d` entries per row,
/// complex entries with real and imaginary parts uniform in [−1, 1]
/// (real on the diagonal), scaled to unit spectral norm. Redrawn until
/// invertible.
pub fn random_sparse_hermitian<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> HermitianMatrix {
    loop {
        let m = draw_sparse_hermitian(cfg.dim(), cfg.d, rng);
        let h = HermitianMatrix::hermitize(&m);
        let vals = eigvalsh(&h).expect("tridiagonal QL converges");
        let max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if max > 0.0 && min > 1e-12 * max {
            return HermitianMatrix::hermitize(&m.scale_real(1.0 / max));
        }
    }
}

fn draw_sparse_hermitian<R: Rng + ?Sized>(dim: usize, d: usize, rng: &mut R) -> Matrix {
    let mut pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| (i..dim).map(move |j| (i, j)))
        .collect();
    pairs.shuffle(rng);
    let mut row_count = vec![0usize; dim];
    let mut m = Matrix::zeros(dim);
    for (i, j) in pairs {
        if i == j {
            if row_count[i] < d {
                row_count[i] += 1;
                m[(i, i)] = C64::new(nonzero_uniform(rng), 0.0);
            }
        } else if row_count[i] < d && row_count[j] < d {
            row_count[i] += 1;
            row_count[j] += 1;
            let z = C64::new(nonzero_uniform(rng), rng.gen_range(-1.0..=1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn nonzero_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.gen_range(-1.0..=1.0);
        if x != 0.0 {
            return x;
        }
    }
}

/// Unit vector with exactly `b_sparsity` nonzero amplitudes at uniformly
/// chosen positions.
pub fn random_sparse_b<R: Rng + ?Sized>(
    n: u32,
    b_sparsity: usize,
    rng: &mut R,
) -> Result<StateVector> {
    let dim = 1usize << n;
    if b_sparsity == 0 || b_sparsity > dim {
        return Err(Error::invalid(format!(
            "b sparsity must be in 1..={dim}, got {b_sparsity}"
        )));
    }
    let mut v = vec![C64::new(0.0, 0.0); dim];
    let mut idx = sample(rng, dim, b_sparsity).into_vec();
    idx.sort_unstable();
    for i in idx {
        v[i] = C64::new(nonzero_uniform(rng), rng.gen_range(-1.0..=1.0));
    }
    StateVector::normalized(v)
}

/// Rejection-samples matrices until `|κ − target| ≤ tol`. Attempt `i` draws
/// from its own derived stream and the lowest accepted index wins, so the
/// result does not depend on the worker count.
pub fn generate_with_kappa(cfg: &GeneratorConfig) -> Result<QlspInstance> {
    cfg.validate()?;
    let matrix_master = rng::derive_seed(cfg.seed, 0);
    let attempt_kappa = |i: usize| -> f64 {
        let mut r = rng::child_stream(matrix_master, i as u64);
        let a = random_sparse_hermitian(cfg, &mut r);
        condition_number(&a).unwrap_or(f64::INFINITY)
    };

    let mut closest = (f64::INFINITY, f64::NAN);
    let mut accepted = None;
    let mut start = 0;
    while start < cfg.max_attempts && accepted.is_none() {
        let end = (start + ATTEMPT_BATCH).min(cfg.max_attempts);
        let kappas: Vec<f64> = (start..end).into_par_iter().map(attempt_kappa).collect();
        for (offset, &k) in kappas.iter().enumerate() {
            let miss = (k - cfg.kappa_target).abs();
            if miss <= cfg.kappa_tol {
                accepted = Some(start + offset);
                break;
            }
            if miss < closest.0 {
                closest = (miss, k);
            }
        }
        start = end;
    }

    let index = accepted.ok_or(Error::PostSelection {
        attempts: cfg.max_attempts,
        closest_kappa: closest.1,
        target: cfg.kappa_target,
        tol: cfg.kappa_tol,
    })?;
    let a = random_sparse_hermitian(cfg, &mut rng::child_stream(matrix_master, index as u64));
    let b = random_sparse_b(
        cfg.n,
        cfg.b_sparsity,
        &mut rng::child_stream(rng::derive_seed(cfg.seed, 1), 0),
    )?;
    let metadata = InstanceMetadata {
        seed: Some(cfg.seed),
        kappa_target: Some(cfg.kappa_target),
        kappa_tol: Some(cfg.kappa_tol),
        b_sparsity: Some(cfg.b_sparsity),
        attempts: Some(index + 1),
    };
    QlspInstance::new(a, b, cfg.d, metadata)
}

/// `A⁻¹|b⟩` before normalization.
pub fn unnormalized_solution(inst: &QlspInstance) -> Result<Vec<C64>> {
    solve(inst.a().matrix(), inst.b().amplitudes())
}

/// `|x⟩ = A⁻¹|b⟩ / ‖A⁻¹|b⟩‖`.
pub fn exact_solution(inst: &QlspInstance) -> Result<StateVector> {
    Ok(exact_solution_with_residual(inst)?.0)
}

/// Normalized solution together with `‖A x − b‖` for the unnormalized `x`.
pub fn exact_solution_with_residual(inst: &QlspInstance) -> Result<(StateVector, f64)> {
    let x = unnormalized_solution(inst)?;
    let ax = inst.a().matrix().mul_vec(&x);
    let residual = norm(
        &ax.iter()
            .zip(inst.b().amplitudes())
            .map(|(p, q)| p - q)
            .collect::<Vec<_>>(),
    );
    Ok((StateVector::normalized(x)?, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn diag_instance(values: &[f64], b: Vec<C64>) -> QlspInstance {
        QlspInstance::new(
            HermitianMatrix::diagonal(values),
            StateVector::normalized(b).unwrap(),
            1,
            InstanceMetadata::default(),
        )
        .unwrap()
    }

    #[test]
    fn small_matrix_has_unit_norm() {
        let cfg = GeneratorConfig::new(1, 2, 2.0, 5);
        let a = random_sparse_hermitian(&cfg, &mut rng::stream(5));
        assert_eq!(a.dim(), 2);
        assert!((a.spectral_norm().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rows_respect_sparsity() {
        let cfg = GeneratorConfig::new(4, 4, 10.0, 9);
        for seed in 0..20 {
            let a = random_sparse_hermitian(&cfg, &mut rng::stream(seed));
            for r in 0..16 {
                assert!(a.matrix().row_nonzeros(r, 0.0) <= 4);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::new(3, 3, 4.0, 1);
        let a1 = random_sparse_hermitian(&cfg, &mut rng::stream(77));
        let a2 = random_sparse_hermitian(&cfg, &mut rng::stream(77));
        assert_eq!(a1, a2);
        let b1 = random_sparse_b(3, 3, &mut rng::stream(4)).unwrap();
        let b2 = random_sparse_b(3, 3, &mut rng::stream(4)).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn sparse_b_counts() {
        let b = random_sparse_b(3, 1, &mut rng::stream(0)).unwrap();
        let nz: Vec<_> = b.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 1);
        assert!((nz[0].norm() - 1.0).abs() < 1e-15);
        let dense = random_sparse_b(3, 8, &mut rng::stream(0)).unwrap();
        assert_eq!(
            dense.amplitudes().iter().filter(|z| z.norm() > 0.0).count(),
            8
        );
        assert!(random_sparse_b(2, 5, &mut rng::stream(0)).is_err());
    }

    #[test]
    fn kappa_post_selection_small() {
        let mut cfg = GeneratorConfig::new(2, 2, 3.0, 11);
        cfg.kappa_tol = 1e-2;
        let inst = generate_with_kappa(&cfg).unwrap();
        assert!((inst.kappa() - 3.0).abs() <= 1e-2);
        assert!(inst.metadata().attempts.unwrap() >= 1);
        let again = generate_with_kappa(&cfg).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn kappa_one_exhausts_attempts() {
        let mut cfg = GeneratorConfig::new(2, 2, 1.0, 3);
        cfg.kappa_tol = 0.0;
        cfg.max_attempts = 50;
        match generate_with_kappa(&cfg) {
            Err(Error::PostSelection {
                attempts,
                closest_kappa,
                ..
            }) => {
                assert_eq!(attempts, 50);
                assert!(closest_kappa > 1.0);
            }
            other => panic!("expected PostSelection, got {other:?}"),
        }
    }

    #[test]
    fn exact_solution_examples() {
        let b = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let id = diag_instance(&[1.0, 1.0], b.clone());
        let x = exact_solution(&id).unwrap();
        assert!(x.aligned_distance(id.b()) < 1e-15);

        // diag(1, 1/2) x = (1,1)/√2  →  x ∝ (1, 2)
        let inst = diag_instance(&[1.0, 0.5], vec![ONE, ONE]);
        let (x, residual) = exact_solution_with_residual(&inst).unwrap();
        let s5 = 5f64.sqrt();
        assert!((x.amplitudes()[0] - C64::new(1.0 / s5, 0.0)).norm() < 1e-15);
        assert!((x.amplitudes()[1] - C64::new(2.0 / s5, 0.0)).norm() < 1e-15);
        assert!(residual < 1e-15);
    }

    #[test]
    fn instance_validation() {
        let b = StateVector::plus();
        assert!(matches!(
            QlspInstance::new(
                HermitianMatrix::diagonal(&[1.1, 0.5]),
                b.clone(),
                1,
                Default::default()
            ),
            Err(Error::BadNorm { .. })
        ));
        assert!(matches!(
            QlspInstance::new(
                HermitianMatrix::diagonal(&[1.0, 0.0]),
                b.clone(),
                1,
                Default::default()
            ),
            Err(Error::Singular { .. })
        ));
        let full = HermitianMatrix::hermitize(&Matrix::from_fn(2, |_, _| C64::new(0.5, 0.0)));
        assert!(matches!(
            QlspInstance::new(full, b, 1, Default::default()),
            Err(Error::SparsityExceeded { .. })
        ));
    }
}

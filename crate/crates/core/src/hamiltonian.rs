//! The interpolating operator `A(s)`, the ground-state variant
//! `H(s) = A(s) P⊥ A(s)`, its gap-amplified square root
//! `H'(s) = σ⁺ ⊗ A(s)P⊥ + σ⁻ ⊗ P⊥A(s)`, and the zero-energy path `|x(s)⟩`.
//!
//! Ancilla qubits are leading tensor factors: `[amplification][embedding][system]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::QlspInstance;
use crate::linalg::{
    eigh, eigvalsh, inner, solve, HermitianMatrix, Matrix, StateVector, C64, ZERO,
};

/// Kernel/non-kernel split for eigenvalues, relative to the operator norm
/// and capped at half the gap bound.
pub const KERNEL_REL_TOL: f64 = 1e-7;

/// How `A` is embedded into an always-invertible `A(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmbeddingMode {
    /// `A(s) = (1−s) Z⊗𝟙 + s X⊗A` on one extra qubit.
    General,
    /// `A(s) = (1−s)𝟙 + sA`, valid only for `A > 0`.
    PositiveDefinite,
}

impl EmbeddingMode {
    pub fn embedding_qubits(self) -> u32 {
        match self {
            EmbeddingMode::General => 1,
            EmbeddingMode::PositiveDefinite => 0,
        }
    }
}

impl fmt::Display for EmbeddingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingMode::General => "general",
            EmbeddingMode::PositiveDefinite => "positive",
        })
    }
}

impl FromStr for EmbeddingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(EmbeddingMode::General),
            "positive" => Ok(EmbeddingMode::PositiveDefinite),
            other => Err(Error::invalid(format!(
                "unknown mode `{other}` (general|positive)"
            ))),
        }
    }
}

/// Which Hamiltonian variant is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Ground state of `H(s)`; gap bounded below by `Δ*(s)`.
    GroundState,
    /// Zero-energy middle-of-spectrum state of `H'(s)`; gap `√Δ*(s)`.
    GapAmplified,
}

impl Variant {
    pub fn extra_qubits(self) -> u32 {
        match self {
            Variant::GroundState => 0,
            Variant::GapAmplified => 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::GroundState => "ground",
            Variant::GapAmplified => "amplified",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground" => Ok(Variant::GroundState),
            "amplified" => Ok(Variant::GapAmplified),
            other => Err(Error::invalid(format!(
                "unknown variant `{other}` (ground|amplified)"
            ))),
        }
    }
}

/// Number of ancilla qubits traced out at the end of a run.
pub fn ancilla_qubits(mode: EmbeddingMode, variant: Variant) -> u32 {
    mode.embedding_qubits() + variant.extra_qubits()
}

/// `Δ*(s) = (1−s)² + (s/κ)²`.
pub fn gap_lower_bound(s: f64, kappa: f64) -> f64 {
    (1.0 - s).powi(2) + (s / kappa).powi(2)
}

/// A concrete `H(s)` or `H'(s)`.
#[derive(Clone, Debug)]
pub struct HamiltonianSlice {
    pub s: f64,
    pub mode: EmbeddingMode,
    pub variant: Variant,
    pub h: HermitianMatrix,
}

impl HamiltonianSlice {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// Diagnostics from one diagonalization of a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub s: f64,
    pub variant: Variant,
    pub kernel_dim: usize,
    /// Second-smallest eigenvalue (ground state) or smallest nonzero
    /// `|eigenvalue|` (amplified).
    pub gap: f64,
    /// `Δ*(s)` or `√Δ*(s)`.
    pub gap_bound: f64,
    /// `max |(Z⊗𝟙)H'(Z⊗𝟙) + H'|`; zero for the ground-state variant.
    pub symmetry_defect: f64,
    /// `max(0, −λ_min)`; zero for the amplified variant.
    pub psd_defect: f64,
}

impl SpectralReport {
    pub fn expected_kernel_dim(&self) -> usize {
        match self.variant {
            Variant::GroundState => 1,
            Variant::GapAmplified => 2,
        }
    }

    pub fn gap_ok(&self, tol: f64) -> bool {
        self.gap >= self.gap_bound - tol
    }
}

/// An instance bound to an embedding mode, with `|b̄⟩` precomputed.
#[derive(Clone, Debug)]
pub struct Embedding<'a> {
    inst: &'a QlspInstance,
    mode: EmbeddingMode,
    b_bar: StateVector,
}

impl<'a> Embedding<'a> {
    pub fn new(inst: &'a QlspInstance, mode: EmbeddingMode) -> Result<Self> {
        if mode == EmbeddingMode::PositiveDefinite {
            let min_eigenvalue = inst.min_eigenvalue()?;
            if !(min_eigenvalue > 0.0) {
                return Err(Error::NotPositiveDefinite { min_eigenvalue });
            }
        }
        Ok(Embedding {
            inst,
            mode,
            b_bar: barred_b(inst.b(), mode),
        })
    }

    pub fn instance(&self) -> &QlspInstance {
        self.inst
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    pub fn b_bar(&self) -> &StateVector {
        &self.b_bar
    }

    /// Dimension of `A(s)` and `H(s)`.
    pub fn dim(&self) -> usize {
        self.inst.dim() << self.mode.embedding_qubits()
    }

    pub fn a_of_s(&self, s: f64) -> Result<Matrix> {
        check_s(s)?;
        Ok(embed_unchecked(self.inst.a(), s, self.mode))
    }

    /// `A(s)|b̄⟩`.
    fn a_b_bar(&self, a_s: &Matrix) -> Vec<C64> {
        a_s.mul_vec(self.b_bar.amplitudes())
    }

    /// `B(s) = A(s) P⊥ = A(s) − A(s)|b̄⟩⟨b̄|`.
    pub fn b_of_s(&self, s: f64) -> Result<Matrix> {
        let a_s = self.a_of_s(s)?;
        let ab = self.a_b_bar(&a_s);
        Ok(&a_s - &Matrix::outer(&ab, self.b_bar.amplitudes()))
    }

    /// `H(s) = A(s) P⊥ A(s) = A(s)² − A(s)|b̄⟩⟨b̄|A(s)`.
    pub fn h(&self, s: f64) -> Result<HamiltonianSlice> {
        let a_s = self.a_of_s(s)?;
        let ab = self.a_b_bar(&a_s);
        let h = &(&a_s * &a_s) - &Matrix::outer(&ab, &ab);
        Ok(HamiltonianSlice {
            s,
            mode: self.mode,
            variant: Variant::GroundState,
            h: HermitianMatrix::hermitize(&h),
        })
    }

    /// `H'(s) = [[0, B], [B†, 0]]` with the amplification qubit leading.
    pub fn h_prime(&self, s: f64) -> Result<HamiltonianSlice> {
        let b = self.b_of_s(s)?;
        let n = b.dim();
        let h = Matrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, false) => b[(i, j - n)],
            (false, true) => b[(j, i - n)].conj(),
            _ => ZERO,
        });
        Ok(HamiltonianSlice {
            s,
            mode: self.mode,
            variant: Variant::GapAmplified,
            h: HermitianMatrix::hermitize(&h),
        })
    }

    pub fn slice(&self, s: f64, variant: Variant) -> Result<HamiltonianSlice> {
        match variant {
            Variant::GroundState => self.h(s),
            Variant::GapAmplified => self.h_prime(s),
        }
    }

    /// `|x(s)⟩ ∝ A(s)⁻¹|b̄⟩`, by a direct solve.
    pub fn eigenpath_state(&self, s: f64) -> Result<StateVector> {
        let a_s = self.a_of_s(s)?;
        StateVector::normalized(solve(&a_s, self.b_bar.amplitudes())?)
    }

    /// The state tracked by `variant` at `s`: `|x(s)⟩` or `|0⟩ ⊗ |x(s)⟩`.
    pub fn tracked_state(&self, s: f64, variant: Variant) -> Result<StateVector> {
        let x = self.eigenpath_state(s)?;
        Ok(match variant {
            Variant::GroundState => x,
            Variant::GapAmplified => StateVector::basis(2, 0).kron(&x),
        })
    }

    pub fn spectral_report(&self, s: f64, variant: Variant) -> Result<SpectralReport> {
        let slice = self.slice(s, variant)?;
        let vals = eigvalsh(&slice.h)?;
        let kappa = self.inst.kappa();
        let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let gap_bound = match variant {
            Variant::GroundState => gap_lower_bound(s, kappa),
            Variant::GapAmplified => gap_lower_bound(s, kappa).sqrt(),
        };
        let thresh = (KERNEL_REL_TOL * scale).min(0.5 * gap_bound);
        let kernel_dim = vals.iter().filter(|v| v.abs() <= thresh).count();
        Ok(match variant {
            Variant::GroundState => SpectralReport {
                s,
                variant,
                kernel_dim,
                gap: vals.get(1).copied().unwrap_or(f64::INFINITY),
                gap_bound,
                symmetry_defect: 0.0,
                psd_defect: (-vals[0]).max(0.0),
            },
            Variant::GapAmplified => SpectralReport {
                s,
                variant,
                kernel_dim,
                gap: vals
                    .iter()
                    .map(|v| v.abs())
                    .filter(|&v| v > thresh)
                    .fold(f64::INFINITY, f64::min),
                gap_bound,
                symmetry_defect: chiral_symmetry_defect(slice.h.matrix()),
                psd_defect: 0.0,
            },
        })
    }

    /// `|⟨0, x(s)| H'(s') |1, b̄⟩|`.
    pub fn no_transition_amplitude(&self, s: f64, s_prime: f64) -> Result<f64> {
        let left = self.tracked_state(s, Variant::GapAmplified)?;
        let right = StateVector::basis(2, 1).kron(&self.b_bar);
        let hp = self.h_prime(s_prime)?;
        let h_right = hp.h.matrix().mul_vec(right.amplitudes());
        Ok(inner(left.amplitudes(), &h_right).norm())
    }

    /// `max |(H')² − diag(H, P⊥A²P⊥)|`.
    pub fn block_square_defect(&self, s: f64) -> Result<f64> {
        let hp = self.h_prime(s)?;
        let sq = hp.h.matrix() * hp.h.matrix();
        let h = self.h(s)?;
        let b = self.b_of_s(s)?;
        let lower = &b.adjoint() * &b;
        let n = h.dim();
        let expected = Matrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => h.h[(i, j)],
            (false, false) => lower[(i - n, j - n)],
            _ => ZERO,
        });
        Ok(sq.max_abs_diff(&expected))
    }

    /// Largest mismatch between the sorted spectrum of `H'(s)` and
    /// `{0, 0} ∪ {±√γ_j}` for the nonzero eigenvalues `γ_j` of `H(s)`.
    pub fn amplified_spectrum_defect(&self, s: f64) -> Result<f64> {
        let gamma = eigvalsh(&self.h(s)?.h)?;
        let mut expected = vec![0.0, 0.0];
        for &g in &gamma[1..] {
            let r = g.max(0.0).sqrt();
            expected.push(r);
            expected.push(-r);
        }
        expected.sort_by(f64::total_cmp);
        let actual = eigvalsh(&self.h_prime(s)?.h)?;
        Ok(actual
            .iter()
            .zip(&expected)
            .map(|(a, e)| (a - e).abs())
            .fold(0.0, f64::max))
    }

    /// Largest mismatch between the nonzero spectra of `B†B` and `BB†`.
    pub fn isospectral_defect(&self, s: f64) -> Result<f64> {
        let b = self.b_of_s(s)?;
        let bb_dag = eigvalsh(&HermitianMatrix::hermitize(&(&b * &b.adjoint())))?;
        let b_dag_b = eigvalsh(&HermitianMatrix::hermitize(&(&b.adjoint() * &b)))?;
        // both have exactly one zero eigenvalue, the smallest
        Ok(bb_dag[1..]
            .iter()
            .zip(&b_dag_b[1..])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(())
}

fn embed_unchecked(a: &HermitianMatrix, s: f64, mode: EmbeddingMode) -> Matrix {
    let n = a.dim();
    let a = a.matrix();
    match mode {
        EmbeddingMode::General => Matrix::from_fn(2 * n, |i, j| {
            let (bi, bj) = (i / n, j / n);
            let (ri, rj) = (i % n, j % n);
            match (bi, bj) {
                (0, 0) if ri == rj => C64::new(1.0 - s, 0.0),
                (1, 1) if ri == rj => C64::new(-(1.0 - s), 0.0),
                (0, 1) | (1, 0) => a[(ri, rj)] * s,
                _ => ZERO,
            }
        }),
        EmbeddingMode::PositiveDefinite => Matrix::from_fn(n, |i, j| {
            let id = if i == j { 1.0 - s } else { 0.0 };
            a[(i, j)] * s + id
        }),
    }
}

/// `A(s)` for the given mode.
pub fn embed_a(a: &HermitianMatrix, s: f64, mode: EmbeddingMode) -> Result<HermitianMatrix> {
    check_s(s)?;
    if mode == EmbeddingMode::PositiveDefinite {
        let min_eigenvalue = eigvalsh(a)?[0];
        if !(min_eigenvalue > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
    }
    Ok(HermitianMatrix::hermitize(&embed_unchecked(a, s, mode)))
}

/// `|+⟩ ⊗ |b⟩` (general) or `|b⟩` (positive definite).
pub fn barred_b(b: &StateVector, mode: EmbeddingMode) -> StateVector {
    match mode {
        EmbeddingMode::General => StateVector::plus().kron(b),
        EmbeddingMode::PositiveDefinite => b.clone(),
    }
}

pub fn build_h(inst: &QlspInstance, s: f64, mode: EmbeddingMode) -> Result<HamiltonianSlice> {
    Embedding::new(inst, mode)?.h(s)
}

pub fn build_h_prime(inst: &QlspInstance, s: f64, mode: EmbeddingMode) -> Result<HamiltonianSlice> {
    Embedding::new(inst, mode)?.h_prime(s)
}

pub fn eigenpath_state(inst: &QlspInstance, s: f64, mode: EmbeddingMode) -> Result<StateVector> {
    Embedding::new(inst, mode)?.eigenpath_state(s)
}

pub fn spectral_report(
    inst: &QlspInstance,
    s: f64,
    mode: EmbeddingMode,
    variant: Variant,
) -> Result<SpectralReport> {
    Embedding::new(inst, mode)?.spectral_report(s, variant)
}

/// `max |(Z⊗𝟙) M (Z⊗𝟙) + M|` with `Z` on the leading qubit.
pub fn chiral_symmetry_defect(m: &Matrix) -> f64 {
    let half = m.dim() / 2;
    let sign = |i: usize| if i < half { 1.0 } else { -1.0 };
    let mut worst: f64 = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            worst = worst.max((m[(i, j)] * (sign(i) * sign(j)) + m[(i, j)]).norm());
        }
    }
    worst
}

/// Ground state of a slice by diagonalization, for cross-checks.
pub fn lowest_eigenvector(h: &HermitianMatrix) -> Result<StateVector> {
    let es = eigh(h)?;
    StateVector::normalized(es.vector(0))
}

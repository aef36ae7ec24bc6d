//! Dense complex linear algebra for the simulator.
//!
//! Everything here works on small square matrices (dimension ≤ a few hundred)
//! stored row-major. Qubit registers are laid out with the most significant
//! tensor factor first, so an operator `P ⊗ Q` on `|a⟩ ⊗ |b⟩` has row index
//! `a * dim(Q) + b`.

mod density;
mod eigen;
mod solve;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use density::{partial_trace_leading_qubits, trace_distance, DensityMatrix};
pub(crate) use eigen::condition_number_from_eigenvalues;
pub use eigen::{condition_number, eigh, eigvalsh, evolve, EigenSystem};
pub use solve::solve;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical tolerances used by the validating constructors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Max entrywise `|M[i][j] - conj(M[j][i])|` accepted as Hermitian.
    pub hermitian: f64,
    /// Max `| ‖ψ‖ - 1 |` accepted for a state vector.
    pub normalization: f64,
    /// Max `|tr ρ - 1|` for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue tolerated for a density matrix.
    pub psd: f64,
    /// Smallest `|λ|` for which a matrix counts as invertible.
    pub singular: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            normalization: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            singular: 1e-12,
        }
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    /// Builds a matrix from row-major data; `data.len()` must be a perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::invalid(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Matrix { dim, data })
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        Matrix::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn kron(&self, other: &Matrix) -> Self {
        let n = other.dim;
        Matrix::from_fn(self.dim * n, |i, j| {
            self[(i / n, j / n)] * other[(i % n, j % n)]
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise `|M[i][j] - conj(M[j][i])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Number of entries in row `i` with modulus above `tol`.
    pub fn row_nonzeros(&self, i: usize, tol: f64) -> usize {
        self.row(i).iter().filter(|z| z.norm() > tol).count()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(&rhs.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A square matrix known to be Hermitian within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(Matrix);

impl HermitianMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::new_with_tol(m, Tolerances::default().hermitian)
    }

    pub fn new_with_tol(m: Matrix, tol: f64) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::invalid("Hermitian matrix must have dim >= 1"));
        }
        let max_asymmetry = m.hermiticity_defect();
        if max_asymmetry > tol {
            return Err(Error::NotHermitian { max_asymmetry, tol });
        }
        Ok(HermitianMatrix(m))
    }

    /// Symmetrizes `m` as `(M + M†)/2`. Use only for matrices that are
    /// Hermitian in exact arithmetic and differ by rounding.
    pub fn hermitize(m: &Matrix) -> Self {
        HermitianMatrix(m.hermitian_part())
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(Matrix::identity(dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianMatrix(Matrix::diagonal(values))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let vals = eigvalsh(self)?;
        Ok(vals.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

/// Unit-norm complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::new_with_tol(amplitudes, Tolerances::default().normalization)
    }

    pub fn new_with_tol(amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state vector must have dim >= 1"));
        }
        let norm = norm(&amplitudes);
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm, tol });
        }
        Ok(StateVector(amplitudes))
    }

    /// Scales `v` to unit norm. Fails on the zero vector.
    pub fn normalized(mut v: Vec<C64>) -> Result<Self> {
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized {
                norm: n,
                tol: Tolerances::default().normalization,
            });
        }
        for z in v.iter_mut() {
            *z /= n;
        }
        Ok(StateVector(v))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        StateVector(v)
    }

    /// `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
    }

    /// `|−⟩ = (|0⟩ − |1⟩)/√2`.
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector(vec![C64::new(h, 0.0), C64::new(-h, 0.0)])
    }

    pub(crate) fn from_vec_unchecked(v: Vec<C64>) -> Self {
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.0, &other.0)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|self⟩ ⊗ |other⟩`, `self` as the leading factor.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.0 {
            for &b in &other.0 {
                out.push(a * b);
            }
        }
        StateVector(out)
    }

    /// Multiplies by the unit phase that makes `⟨reference|self⟩` real and
    /// non-negative.
    pub fn phase_aligned_to(&self, reference: &StateVector) -> StateVector {
        let overlap = reference.inner(self);
        if overlap.norm() == 0.0 {
            return self.clone();
        }
        let phase = overlap.conj() / overlap.norm();
        StateVector(self.0.iter().map(|&z| z * phase).collect())
    }

    /// Euclidean distance after phase alignment.
    pub fn aligned_distance(&self, other: &StateVector) -> f64 {
        let aligned = other.phase_aligned_to(self);
        norm(
            &self
                .0
                .iter()
                .zip(&aligned.0)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len(), "inner product dimension mismatch");
    u.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// Single-qubit Pauli X.
pub fn pauli_x() -> Matrix {
    Matrix::from_row_major(vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

/// Single-qubit Pauli Z.
pub fn pauli_z() -> Matrix {
    Matrix::diagonal(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_ordering_is_leading_factor_major() {
        let z = pauli_z();
        let id = Matrix::identity(3);
        let zi = z.kron(&id);
        assert_eq!(zi.dim(), 6);
        assert_eq!(zi[(0, 0)], ONE);
        assert_eq!(zi[(2, 2)], ONE);
        assert_eq!(zi[(3, 3)], -ONE);
        let plus_b = StateVector::plus().kron(&StateVector::basis(3, 1));
        assert!((plus_b.amplitudes()[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((plus_b.amplitudes()[4].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::from_row_major(vec![ONE, ONE, ZERO, ONE]).unwrap();
        match HermitianMatrix::new(m) {
            Err(Error::NotHermitian { max_asymmetry, .. }) => {
                assert!((max_asymmetry - 1.0).abs() < 1e-15)
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unnormalized_state() {
        assert!(matches!(
            StateVector::new(vec![ONE, ONE]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::normalized(vec![ZERO, ZERO]).is_err());
    }

    #[test]
    fn phase_alignment_removes_global_phase() {
        let psi = StateVector::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7)]).unwrap();
        let phase = C64::from_polar(1.0, 1.234);
        let rotated =
            StateVector::from_vec_unchecked(psi.amplitudes().iter().map(|z| z * phase).collect());
        assert!(psi.aligned_distance(&rotated) < 1e-15);
    }
}

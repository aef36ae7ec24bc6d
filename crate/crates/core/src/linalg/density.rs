use super::{eigvalsh, HermitianMatrix, Matrix, StateVector, Tolerances, C64, ZERO};
use crate::error::{Error, Result};

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::new_with_tol(m, &Tolerances::default())
    }

    pub fn new_with_tol(m: Matrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianMatrix::new_with_tol(m, tol.hermitian)?;
        let tr = h.matrix().trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidDensity(format!("trace = {tr}, expected 1")));
        }
        let min = eigvalsh(&h)?.first().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix(h.into_matrix()))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix(Matrix::outer(a, a))
    }

    /// `(1/n) Σ |ψ_i⟩⟨ψ_i|`, summed in iteration order.
    pub fn mixture<'a>(states: impl IntoIterator<Item = &'a StateVector>) -> Result<Self> {
        let mut acc: Option<Matrix> = None;
        let mut count = 0usize;
        for psi in states {
            let a = psi.amplitudes();
            let acc = acc.get_or_insert_with(|| Matrix::zeros(a.len()));
            if acc.dim() != a.len() {
                return Err(Error::DimensionMismatch {
                    expected: acc.dim(),
                    got: a.len(),
                });
            }
            for i in 0..a.len() {
                for j in 0..a.len() {
                    acc[(i, j)] += a[i] * a[j].conj();
                }
            }
            count += 1;
        }
        let acc = acc.ok_or_else(|| Error::invalid("mixture of zero states"))?;
        Ok(DensityMatrix(acc.scale_real(1.0 / count as f64)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let rho_psi = self.0.mul_vec(psi.amplitudes());
        super::inner(psi.amplitudes(), &rho_psi).re
    }
}

/// `½ Σ |eigenvalues of (ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let diff = HermitianMatrix::hermitize(&(rho.matrix() - sigma.matrix()));
    let vals = eigvalsh(&diff)?;
    Ok((0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Traces out the `k` leading qubits of `rho`.
pub fn partial_trace_leading_qubits(rho: &DensityMatrix, k: u32) -> Result<DensityMatrix> {
    let dim = rho.dim();
    let anc = 1usize
        .checked_shl(k)
        .filter(|&a| a <= dim && dim.is_multiple_of(a))
        .ok_or(Error::BadPartialTrace { k, dim })?;
    let sys = dim / anc;
    let m = rho.matrix();
    let out = Matrix::from_fn(sys, |i, j| {
        (0..anc).fold(ZERO, |acc: C64, a| acc + m[(a * sys + i, a * sys + j)])
    });
    Ok(DensityMatrix(out))
}

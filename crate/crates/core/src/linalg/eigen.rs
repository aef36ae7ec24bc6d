//! Dense Hermitian eigensolver.
//!
//! Householder reduction to Hermitian tridiagonal form, a diagonal phase
//! similarity that makes the off-diagonal real, then implicit-shift QL on the
//! real symmetric tridiagonal matrix (the EISPACK `tql2` scheme).

use super::{HermitianMatrix, Matrix, StateVector, Tolerances, C64, ZERO};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with orthonormal eigenvectors as the
/// columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, |i, j| {
            (0..n).fold(ZERO, |acc, k| {
                acc + self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj()
            })
        })
    }

    /// Applies `e^{-iHt}` to `psi` in place. `scratch` must have length `dim`.
    pub fn evolve_in_place(&self, psi: &mut [C64], t: f64, scratch: &mut [C64]) {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        assert_eq!(scratch.len(), n);
        // scratch = V† ψ
        scratch.fill(ZERO);
        for (i, &amp) in psi.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            for (c, v) in scratch.iter_mut().zip(self.vectors.row(i)) {
                *c += v.conj() * amp;
            }
        }
        for (c, &lambda) in scratch.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -lambda * t);
        }
        // ψ = V scratch
        for (i, out) in psi.iter_mut().enumerate() {
            *out = self
                .vectors
                .row(i)
                .iter()
                .zip(scratch.iter())
                .fold(ZERO, |acc, (v, c)| acc + v * c);
        }
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let mut out = psi.amplitudes().to_vec();
        let mut scratch = vec![ZERO; self.dim()];
        self.evolve_in_place(&mut out, t, &mut scratch);
        Ok(StateVector::from_vec_unchecked(out))
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(m: &HermitianMatrix) -> Result<EigenSystem> {
    let (values, vectors) = decompose(m.matrix(), true)?;
    Ok(EigenSystem {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(decompose(m.matrix(), false)?.0)
}

/// `e^{-iHt} ψ` via the spectral decomposition of `H`.
pub fn evolve(psi: &StateVector, h: &HermitianMatrix, t: f64) -> Result<StateVector> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi.dim(),
        });
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    eigh(h)?.evolve(psi, t)
}

/// `max|λ| / min|λ|`.
pub fn condition_number(a: &HermitianMatrix) -> Result<f64> {
    let vals = eigvalsh(a)?;
    condition_number_from_eigenvalues(&vals, Tolerances::default().singular)
}

pub(crate) fn condition_number_from_eigenvalues(vals: &[f64], singular_tol: f64) -> Result<f64> {
    let max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if !(min > singular_tol) {
        return Err(Error::Singular {
            min_abs_eigenvalue: min,
        });
    }
    Ok(max / min)
}

fn decompose(m: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = m.dim();
    let mut a = m.clone();
    let mut q = want_vectors.then(|| Matrix::identity(n));

    householder_tridiagonalize(&mut a, q.as_mut());

    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    // phases[k] such that D† T D is real with D = diag(phases)
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let e = a[(k + 1, k)];
        let r = e.norm();
        off[k] = r;
        phases[k + 1] = if r > 0.0 {
            phases[k] * (e / r)
        } else {
            phases[k]
        };
    }

    // rows of `zt` are the eigenvectors of the real tridiagonal matrix
    let mut zt = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tql2(&mut diag, &mut off, zt.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values: Vec<f64> = order.iter().map(|&k| diag[k]).collect();

    let vectors = match (q, zt) {
        (Some(q), Some(zt)) => {
            // V = Q D Z; column c of V uses row order[c] of zt
            let mut qd = q;
            for i in 0..n {
                for k in 0..n {
                    qd[(i, k)] *= phases[k];
                }
            }
            let mut v = Matrix::zeros(n);
            for i in 0..n {
                let qrow = qd.row(i).to_vec();
                for (c, &src) in order.iter().enumerate() {
                    let zrow = &zt[src * n..(src + 1) * n];
                    v[(i, c)] = qrow
                        .iter()
                        .zip(zrow)
                        .fold(ZERO, |acc, (qik, &z)| acc + qik * z);
                }
            }
            Some(v)
        }
        _ => None,
    };
    Ok((values, vectors))
}

/// Reduces `a` in place to Hermitian tridiagonal form `T = Q† A Q`,
/// accumulating `Q` when provided.
fn householder_tridiagonalize(a: &mut Matrix, mut q: Option<&mut Matrix>) {
    let n = a.dim();
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>();
        if norm_x == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;

        v.fill(ZERO);
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[k + 1..].iter_mut() {
            *z /= vnorm;
        }

        // A <- (I - 2vv†) A : rows k+1.. change
        w.fill(ZERO);
        for (i, vi) in v.iter().enumerate().skip(k + 1) {
            let vi = vi.conj();
            for (wj, &aij) in w[k..].iter_mut().zip(&a.row(i)[k..]) {
                *wj += vi * aij;
            }
        }
        for i in k + 1..n {
            let f = v[i] * 2.0;
            for j in k..n {
                let wj = w[j];
                a[(i, j)] -= f * wj;
            }
        }
        // A <- A (I - 2vv†) : columns k+1.. change
        apply_right_reflector(a, &v, k + 1, k);
        if let Some(q) = q.as_deref_mut() {
            apply_right_reflector(q, &v, k + 1, 0);
        }

        // exact zeros below the subdiagonal
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
    }
}

/// `M <- M (I - 2vv†)` where `v` is supported on `start..`, touching rows `row_start..`.
fn apply_right_reflector(m: &mut Matrix, v: &[C64], start: usize, row_start: usize) {
    let n = m.dim();
    for i in row_start..n {
        let row = &m.row(i)[start..];
        let u = row
            .iter()
            .zip(&v[start..])
            .fold(ZERO, |acc, (mij, vj)| acc + mij * vj)
            * 2.0;
        for j in start..n {
            m[(i, j)] -= u * v[j].conj();
        }
    }
}

/// Implicit-shift QL on the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e[i]` (between `i` and `i+1`; `e[n-1]` ignored).
/// When `zt` is given its rows are rotated alongside.
fn tql2(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..n].iter_mut() {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (head, tail) = z.split_at_mut((i + 1) * n);
                        let zi = &mut head[i * n..];
                        let zi1 = &mut tail[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, ONE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::hermitize(&m)
    }

    fn check_decomposition(h: &HermitianMatrix) {
        let n = h.dim();
        let es = eigh(h).unwrap();
        for w in es.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for k in 0..n {
            let v = es.vector(k);
            let hv = h.matrix().mul_vec(&v);
            let resid = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * es.values[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-9 * n as f64, "residual {resid} for k={k}");
        }
        let vvh = &es.vectors * &es.vectors.adjoint();
        assert!(vvh.max_abs_diff(&Matrix::identity(n)) < 1e-10);
        let tr: f64 = es.values.iter().sum();
        assert!((tr - h.matrix().trace().re).abs() < 1e-9 * n as f64);
    }

    #[test]
    fn diagonal_matrix() {
        let es = eigh(&HermitianMatrix::diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(es.values, vec![1.0, 3.0]);
        assert!((es.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((es.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let es = eigh(&HermitianMatrix::new(pauli_x()).unwrap()).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-15);
        assert!((es.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_8x8_reconstructs() {
        let h = random_hermitian(8, 7);
        let es = eigh(&h).unwrap();
        assert!(es.reconstruct().max_abs_diff(h.matrix()) < 1e-9);
        check_decomposition(&h);
    }

    #[test]
    fn many_sizes_including_degenerate() {
        for n in [1, 2, 3, 5, 16, 33, 64] {
            check_decomposition(&random_hermitian(n, n as u64));
        }
        // degenerate spectrum: projector
        let v: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0)).collect();
        let nv = crate::linalg::norm(&v);
        let v: Vec<C64> = v.iter().map(|z| z / nv).collect();
        let p = &Matrix::identity(6) - &Matrix::outer(&v, &v);
        check_decomposition(&HermitianMatrix::hermitize(&p));
        check_decomposition(&HermitianMatrix::identity(4));
        check_decomposition(&HermitianMatrix::new(Matrix::zeros(3)).unwrap());
    }

    #[test]
    fn eigvalsh_matches_eigh() {
        let h = random_hermitian(20, 3);
        let a = eigvalsh(&h).unwrap();
        let b = eigh(&h).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_identity_at_zero_time() {
        let h = random_hermitian(4, 1);
        let psi = StateVector::normalized(vec![ONE, C64::new(0.0, 1.0), ONE, ONE]).unwrap();
        let out = evolve(&psi, &h, 0.0).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn evolve_z_half_pi_flips_plus_to_minus() {
        // e^{-iπZ/2} = diag(-i, i) = -i Z, and Z|+⟩ = |−⟩
        let h = HermitianMatrix::new(pauli_z()).unwrap();
        let out = evolve(&StateVector::plus(), &h, PI / 2.0).unwrap();
        assert!((out.inner(&StateVector::minus()).norm() - 1.0).abs() < 1e-14);
        assert!((out.amplitudes()[0] - C64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-14);
    }

    #[test]
    fn evolve_group_property_and_norm() {
        let h = random_hermitian(6, 11);
        let psi =
            StateVector::normalized((0..6).map(|i| C64::new(1.0, i as f64)).collect()).unwrap();
        let a = evolve(&evolve(&psi, &h, 0.7).unwrap(), &h, 1.9).unwrap();
        let b = evolve(&psi, &h, 2.6).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-9);
        }
        assert!((a.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolve_rejects_bad_input() {
        let h = HermitianMatrix::identity(3);
        assert!(matches!(
            evolve(&StateVector::plus(), &h, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let h2 = HermitianMatrix::identity(2);
        assert!(evolve(&StateVector::plus(), &h2, -1.0).is_err());
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(
            condition_number(&HermitianMatrix::identity(5)).unwrap(),
            1.0
        );
        assert!(
            (condition_number(&HermitianMatrix::diagonal(&[1.0, 0.5])).unwrap() - 2.0).abs()
                < 1e-14
        );
        assert!(
            (condition_number(&HermitianMatrix::diagonal(&[1.0, -0.1, 0.5])).unwrap() - 10.0).abs()
                < 1e-12
        );
        match condition_number(&HermitianMatrix::diagonal(&[1.0, 0.0])) {
            Err(Error::Singular { min_abs_eigenvalue }) => assert_eq!(min_abs_eigenvalue, 0.0),
            other => panic!("expected Singular, got {other:?}"),
        }
    }
}

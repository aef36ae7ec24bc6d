use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M[i][j] - conj(M[j][i])| = {max_asymmetry:.3e} (tolerance {tol:.1e})")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("vector is not normalized: norm = {norm:.17} (tolerance {tol:.1e})")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular: min |eigenvalue| = {min_abs_eigenvalue:.3e}")]
    Singular { min_abs_eigenvalue: f64 },

    #[error("cannot trace out {k} qubits from a space of dimension {dim}")]
    BadPartialTrace { k: u32, dim: usize },

    #[error("eigensolver failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("spectral norm of A is {norm:.17}, expected 1 (tolerance {tol:.1e})")]
    BadNorm { norm: f64, tol: f64 },

    #[error("row {row} of A has {nonzeros} nonzero entries, exceeding sparsity bound d = {d}")]
    SparsityExceeded {
        row: usize,
        nonzeros: usize,
        d: usize,
    },

    #[error("A is not positive definite: min eigenvalue = {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error(
        "post-selection failed after {attempts} attempts: closest kappa {closest_kappa:.9} \
         (target {target} ± {tol})"
    )]
    PostSelection {
        attempts: usize,
        closest_kappa: f64,
        target: f64,
        tol: f64,
    },

    #[error("kappa {kappa:.6} exceeds the configured ceiling {ceiling}")]
    KappaCeiling { kappa: f64, ceiling: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use super::{Matrix, C64, ZERO};
use crate::error::{Error, Result};

/// Solves `M x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve(m: &Matrix, rhs: &[C64]) -> Result<Vec<C64>> {
    let n = m.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut a = m.clone();
    let mut b = rhs.to_vec();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        if pivot_abs <= 1e-14 * scale {
            return Err(Error::Singular {
                min_abs_eigenvalue: pivot_abs,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[(col, col)];
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
            let bc = b[col];
            b[r] -= factor * bc;
        }
    }

    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(b[i], |acc, j| acc - a[(i, j)] * x[j]);
        x[i] = s / a[(i, i)];
    }
    Ok(x)
}

//! Small numerical helpers shared across modules.

use ndarray::{ArrayView1, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest entry magnitude of a matrix.
pub(crate) fn max_abs(m: &ArrayView2<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}

/// Largest entry magnitude of a vector.
pub(crate) fn max_abs_vec(v: &ArrayView1<Complex64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.norm()))
}

/// Solves the dense complex system `a x = b` by Gaussian elimination with
/// partial pivoting. `a` is consumed as a row-major `n*n` buffer.
pub(crate) fn solve_dense(
    mut a: Vec<Complex64>,
    mut b: Vec<Complex64>,
) -> Result<Vec<Complex64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .norm()
                    .partial_cmp(&a[j * n + col].norm())
                    .unwrap()
            })
            .unwrap();
        if a[pivot * n + col].norm() < 1e-300 {
            return Err(Error::InvalidParams(
                "singular Jacobian in Newton step".into(),
            ));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[row * n + k] -= factor * t;
            }
            let t = b[col];
            b[row] -= factor * t;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_complex_system() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // [[1, i], [i, 2]] x = [1+i, 3]
        let a = vec![one, i, i, 2.0 * one];
        let b = vec![one + i, 3.0 * one];
        let x = solve_dense(a.clone(), b.clone()).unwrap();
        let r0 = a[0] * x[0] + a[1] * x[1] - b[0];
        let r1 = a[2] * x[0] + a[3] * x[1] - b[1];
        assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
    }
}

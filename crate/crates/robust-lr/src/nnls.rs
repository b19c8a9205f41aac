//! Nonnegative least squares by the Lawson–Hanson active-set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dual tolerance for optimality of the active set.
pub const NNLS_TOL: f64 = 1e-10;

/// Solve `min ‖A x - b‖₂` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::InvalidInput("nnls: dimension mismatch".into()));
    }
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = 1.0 + a.amax() * (1.0 + b.amax());
    let max_iter = 30 * (n + 1);
    for _ in 0..max_iter {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(j) if w[j] > NNLS_TOL * scale => passive[j] = true,
            _ => return Ok(x),
        }
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = restricted_lstsq(a, b, &idx);
            if idx.iter().zip(z.iter()).all(|(_, &v)| v > 0.0) {
                x.fill(0.0);
                for (&j, &v) in idx.iter().zip(z.iter()) {
                    x[j] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &v) in idx.iter().zip(z.iter()) {
                if v <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - v));
                }
            }
            for (&j, &v) in idx.iter().zip(z.iter()) {
                x[j] += alpha * (v - x[j]);
                if x[j] <= 1e-15 * scale {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Err(Error::NonConvergence("nnls iteration cap".into()))
}

/// Minimum-norm least squares restricted to the columns in `idx`.
fn restricted_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let cols: Vec<_> = idx.iter().map(|&j| a.column(j).into_owned()).collect();
    let sub = DMatrix::from_columns(&cols);
    let svd = sub.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(1e-300);
    svd.solve(b, tol).unwrap_or_else(|_| DVector::zeros(idx.len()))
}

//! Thin wrappers over nalgebra's dense factorizations.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Solve `J x = rhs` for square `J` by LU with partial pivoting.
pub fn solve_square(j: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let x = j.clone().lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
}

/// Minimum-norm least-squares solution of `J x ≈ rhs` via SVD.
pub fn least_squares(j: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd.solve(&b, smax * 1e-14).ok()?;
    x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
}

/// Ratio of extreme singular values (infinite when rank deficient).
pub fn condition_number(j: &DMatrix<f64>) -> f64 {
    let sv = j.clone().singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Central-difference Jacobian of `f` at `x`, step `h·max(1, |xₖ|)`.
pub fn fd_jacobian<E>(
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    x: &[f64],
    rows: usize,
    h: f64,
) -> Result<DMatrix<f64>, E> {
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let step = h * x[k].abs().max(1.0);
        xp[k] = x[k] + step;
        let fp = f(&xp)?;
        xp[k] = x[k] - step;
        let fm = f(&xp)?;
        xp[k] = x[k];
        for r in 0..rows {
            jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    Ok(jac)
}

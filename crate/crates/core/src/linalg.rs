//! Thin wrappers over `faer` dense kernels with the checks used throughout
//! the crate (singular shifts, failed eigensolves).

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

pub type CMat = Mat<Complex64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (pivot ratio {ratio:.3e})")]
    Singular { ratio: f64 },
    #[error("eigendecomposition did not converge")]
    EigenFailed,
    #[error("singular value decomposition did not converge")]
    SvdFailed,
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Inverse by partially pivoted LU. Rejects matrices whose smallest pivot is
/// below `64 n eps` relative to the largest entry.
pub fn inverse(a: MatRef<'_, Complex64>) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let scale = a.norm_max();
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let mut min_pivot = f64::INFINITY;
    for i in 0..n {
        min_pivot = min_pivot.min(u[(i, i)].norm());
    }
    let ratio = if scale > 0.0 { min_pivot / scale } else { 0.0 };
    if !(ratio > 64.0 * n as f64 * f64::EPSILON) {
        return Err(LinalgError::Singular { ratio });
    }
    let inv = lu.inverse();
    if !inv.norm_max().is_finite() {
        return Err(LinalgError::Singular { ratio });
    }
    Ok(inv)
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eigen(a: MatRef<'_, Complex64>) -> Result<(Vec<Complex64>, CMat), LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let e = a.eigen().map_err(|_| LinalgError::EigenFailed)?;
    let s = e.S();
    let vals = (0..n).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: MatRef<'_, Complex64>) -> Result<(Vec<f64>, CMat), LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::EigenFailed)?;
    let s = e.S();
    let vals = (0..n).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

/// Eigenvalues (ascending) of a real symmetric matrix.
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>, LinalgError> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LinalgError::EigenFailed)
}

/// Spectral norm (largest singular value).
pub fn opnorm2(a: MatRef<'_, Complex64>) -> Result<f64, LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a.singular_values().map_err(|_| LinalgError::SvdFailed)?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Spectral norm of a real matrix.
pub fn real_opnorm2(a: MatRef<'_, f64>) -> Result<f64, LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a.singular_values().map_err(|_| LinalgError::SvdFailed)?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Singular values in descending order.
pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>, LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = a.singular_values().map_err(|_| LinalgError::SvdFailed)?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// `acc += a * m`.
pub fn add_scaled(acc: &mut CMat, a: Complex64, m: &CMat) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc[(i, j)] += a * m[(i, j)];
        }
    }
}

/// Frobenius norm.
pub fn frobenius(a: MatRef<'_, Complex64>) -> f64 {
    a.norm_l2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diagonal() {
        let a = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new(i as f64 + 1.0, 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let inv = inverse(a.as_ref()).unwrap();
        let prod = &a * &inv;
        assert!((&prod - identity(3)).norm_max() < 1e-14);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Mat::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(inverse(a.as_ref()), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn opnorm_of_rank_one() {
        let a = Mat::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0));
        assert!((opnorm2(a.as_ref()).unwrap() - 2.0).abs() < 1e-14);
    }
}

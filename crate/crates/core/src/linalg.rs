//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Dense real matrix. Every system in this crate is small (n ≤ 10).
pub type Mat = DMatrix<f64>;
/// Dense real column vector.
pub type Vector = DVector<f64>;

/// Tolerance used when checking symmetry and semidefiniteness.
pub const PSD_TOL: f64 = 1e-9;

/// Diagonal jitter added when a semidefinite covariance needs a Cholesky factor.
pub const CHOLESKY_JITTER: f64 = 1e-12;

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= tol
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Checks that `m` is a symmetric positive semidefinite covariance.
pub fn check_covariance(name: &str, m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_symmetric(m, PSD_TOL) {
        return Err(Error::Domain(format!("{name} is not symmetric")));
    }
    let min = min_eigenvalue(m);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// Symmetric square root `H` of a PSD matrix, so that `H·H = S`.
///
/// Computed from the eigendecomposition `S = V Λ Vᵀ` as `V Λ^{1/2} Vᵀ`.
/// Eigenvalues in `[-1e-9, 0)` are treated as round-off and clamped to zero.
pub fn mat_sqrt_sym(s: &Mat) -> Result<Mat> {
    check_covariance("matrix", s)?;
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let h = v * Mat::from_diagonal(&roots) * v.transpose();
    // Symmetrize away the last ulp of asymmetry from the triple product.
    Ok((&h + h.transpose()) * 0.5)
}

/// Lower-triangular factor `F` with `F Fᵀ ≈ S` for sampling `N(0, S)`.
///
/// A zero matrix yields a zero factor so noiseless models stay exact. A
/// semidefinite `S` that Cholesky rejects is retried with `1e-12·I` added.
pub fn noise_factor(s: &Mat) -> Result<Mat> {
    check_covariance("covariance", s)?;
    if s.iter().all(|v| *v == 0.0) {
        return Ok(Mat::zeros(s.nrows(), s.ncols()));
    }
    if let Some(ch) = s.clone().cholesky() {
        return Ok(ch.l());
    }
    let jittered = s + Mat::identity(s.nrows(), s.ncols()) * CHOLESKY_JITTER;
    jittered
        .cholesky()
        .map(|ch| ch.l())
        .ok_or_else(|| Error::Conditioning("Cholesky failed even with jitter".into()))
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(m: &Mat) -> Result<Mat> {
    let inv = m
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or_else(|| Error::Conditioning("matrix is not positive definite".into()))?;
    Ok((&inv + inv.transpose()) * 0.5)
}

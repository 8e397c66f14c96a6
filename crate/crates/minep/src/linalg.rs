//! Small dense linear-algebra helpers shared by the certification routines.

use nalgebra::{DMatrix, DVector};

/// Smallest eigenvalue of the symmetrized part of `a`.
pub fn lambda_min_sym(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of the symmetrized part of `a`.
pub fn lambda_max_sym(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral norm (largest singular value) of a rectangular matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = a.transpose() * a;
    lambda_max_sym(&gram).max(0.0).sqrt()
}

/// Spectral radius of a general square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Maximum off-symmetry |a - a^T| entry.
pub fn symmetry_residual(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).abs().max()
}

pub fn euclidean(x: &DVector<f64>) -> f64 {
    x.norm()
}

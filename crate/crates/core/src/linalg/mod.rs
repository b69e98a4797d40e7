//! Dense linear algebra over the ambient Euclidean space.
//!
//! Everything here works on plain `Vec<f64>` / `&[f64]` vectors. Dimensions are
//! small (desk scale), so storage is dense and all routines are sequential and
//! deterministic.

mod dataset;
mod eigen;
mod subspace;

pub use dataset::{Dataset, ExperienceVector};
pub use eigen::{spectrum, top_eigenpair, EigenOptions, EigenPair, SymMatrix};
pub use subspace::{
    intersect, orthonormalize, residual_covariance, residual_span, Intersection,
    ResidualCovariance, Subspace,
};

pub(crate) use eigen::jacobi_eigen;

/// Default numerical rank threshold for unit-scale data.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

/// Flips `v` so that its first coordinate with magnitude above `tol` is positive.
pub fn apply_sign_convention(v: &mut [f64], tol: f64) {
    if let Some(first) = v.iter().find(|x| x.abs() > tol) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

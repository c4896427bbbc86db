//! Symmetric positive-definite matrices under the affine-invariant metric.
//!
//! Tangent coordinates at `P` are the Mandel vector of the whitened
//! logarithm `logm(P^-1/2 Q P^-1/2)`, so their Euclidean norm is the
//! affine-invariant distance. In ambient terms the tangent matrix is
//! `P^1/2 V P^1/2`, which is the form `P^1/2 logm(P^-1/2 Q P^-1/2) P^1/2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    from_mandel, from_row_major, max_abs, min_eigenvalue, sqrt_and_inv_sqrt, sym_apply,
    symmetrize, to_mandel, to_row_major,
};

/// Eigenvalue floor used when projecting onto the SPD cone.
pub const EPS_SPD: f64 = 1e-10;

pub fn log(m: usize, p: &[f64], q: &[f64]) -> Vec<f64> {
    let (_, p_isqrt) = sqrt_and_inv_sqrt(&from_row_major(p, m));
    let w = &p_isqrt * from_row_major(q, m) * &p_isqrt;
    to_mandel(&sym_apply(&w, f64::ln))
}

pub fn exp(m: usize, p: &[f64], v: &[f64]) -> Vec<f64> {
    let (p_sqrt, _) = sqrt_and_inv_sqrt(&from_row_major(p, m));
    let half = sym_apply(&from_mandel(v, m), |x| (0.5 * x).exp());
    // (P^1/2 e^(V/2)) (P^1/2 e^(V/2))ᵀ is symmetric by construction.
    let b = p_sqrt * half;
    to_row_major(&(&b * b.transpose()))
}

/// Tangent coordinates at `p` expressed as an ambient symmetric matrix.
pub fn to_ambient(m: usize, p: &[f64], v: &[f64]) -> DMatrix<f64> {
    let (p_sqrt, _) = sqrt_and_inv_sqrt(&from_row_major(p, m));
    symmetrize(&(&p_sqrt * from_mandel(v, m) * &p_sqrt))
}

pub fn project(m: usize, raw: &[f64]) -> Result<Vec<f64>> {
    let a = from_row_major(raw, m);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("non-finite matrix entry".into()));
    }
    Ok(to_row_major(&sym_apply(&a, |x| x.max(EPS_SPD))))
}

pub fn symmetry_residual(m: usize, a: &[f64]) -> f64 {
    let a = from_row_major(a, m);
    max_abs(&(&a - a.transpose()))
}

pub fn min_eig(m: usize, a: &[f64]) -> f64 {
    min_eigenvalue(&from_row_major(a, m))
}

/// `log det` of an SPD matrix via Cholesky.
pub fn log_det(a: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(symmetrize(a))
        .ok_or_else(|| Error::NonSpdInput("Cholesky factorisation failed".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

//! Special orthogonal group SO(m), points stored as row-major m x m matrices.
//!
//! Both maps use the right-trivialised form `Log_{R1}(R2) = log(R2 R1ᵀ)` and
//! `Exp_{R1}(v) = exp([v]) R1`. SO(2) and SO(3) use closed forms; larger
//! groups go through the real Schur form for the log and Padé
//! scaling-and-squaring for the exp.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Schur, SymmetricEigen, Vector3, SVD};

use crate::error::{Error, Result};
use crate::linalg::{coords_to_skew, from_row_major, hat3, skew_to_coords, to_row_major, vee3};

fn mat3(d: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(d)
}

fn row_major3(m: &Matrix3<f64>) -> Vec<f64> {
    (0..3).flat_map(|i| (0..3).map(move |j| m[(i, j)])).collect()
}

/// Axis-angle vector of a rotation matrix, angle in [0, π].
pub fn so3_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = vee3(&(r - r.transpose())) * 0.5;
    let s = w.norm();
    let theta = s.atan2(cos);
    if cos >= 0.0 {
        if s == 0.0 {
            return Vector3::zeros();
        }
        return w * (theta / s);
    }
    // Past π/2 the axis comes from the symmetric part, which stays well
    // conditioned up to and including θ = π where sin θ vanishes.
    let b = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
    let nn = b / (1.0 - cos);
    let k = (0..3)
        .max_by(|&i, &j| nn[(i, i)].total_cmp(&nn[(j, j)]))
        .unwrap_or(0);
    let mut n: Vector3<f64> = nn.column(k) / nn[(k, k)].max(0.0).sqrt();
    n /= n.norm();
    if s > 1e-14 {
        if n.dot(&w) < 0.0 {
            n = -n;
        }
    } else {
        let big = (0..3)
            .max_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs()))
            .unwrap_or(0);
        if n[big] < 0.0 {
            n = -n;
        }
    }
    n * theta
}

/// Rodrigues formula.
pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat3(w);
    if theta < 1e-8 {
        return Matrix3::identity() + k + k * k * 0.5;
    }
    let (s, c) = theta.sin_cos();
    Matrix3::identity() + k * (s / theta) + k * k * ((1.0 - c) / (theta * theta))
}

/// `acos(c) / sqrt(1 - c²)`, i.e. `θ / sin θ` for `c = cos θ`.
fn theta_over_sin(c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    if c > 1.0 - 1e-8 {
        1.0 + (1.0 - c) / 3.0
    } else {
        c.acos() / (1.0 - c * c).sqrt()
    }
}

/// Skew-symmetric logarithm of an orthogonal matrix with det +1.
///
/// The symmetric part `S` and skew part `A` of `R` commute, and on each
/// eigenspace of `S` with eigenvalue `cos θ` the logarithm is
/// `(θ / sin θ) A`. Rotations with a plane angle close to π fall back to
/// the real Schur form.
pub fn logm_orthogonal(r: &DMatrix<f64>) -> DMatrix<f64> {
    let s = (r + r.transpose()) * 0.5;
    let a = (r - r.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.min() > -1.0 + 1e-6 {
        let v = &eig.eigenvectors;
        let g = v * DMatrix::from_diagonal(&eig.eigenvalues.map(theta_over_sin)) * v.transpose();
        let l = &a * g;
        return (&l - l.transpose()) * 0.5;
    }
    match Schur::try_new(r.clone(), f64::EPSILON, 10_000) {
        Some(schur) => logm_schur(schur),
        None => {
            let v = &eig.eigenvectors;
            let g = v * DMatrix::from_diagonal(&eig.eigenvalues.map(theta_over_sin)) * v.transpose();
            let l = &a * g;
            (&l - l.transpose()) * 0.5
        }
    }
}

fn logm_schur(schur: Schur<f64, nalgebra::Dyn>) -> DMatrix<f64> {
    let (q, t) = schur.unpack();
    let m = t.nrows();
    let mut l = DMatrix::zeros(m, m);
    let mut i = 0;
    let mut pending_minus_one: Option<usize> = None;
    while i < m {
        let block2 = i + 1 < m && t[(i + 1, i)].abs() > 1e-13;
        if block2 {
            let c = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let s = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = s.atan2(c);
            l[(i + 1, i)] = theta;
            l[(i, i + 1)] = -theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                // Eigenvalues -1 come in pairs; each pair is a rotation by π.
                match pending_minus_one.take() {
                    Some(j) => {
                        l[(i, j)] = PI;
                        l[(j, i)] = -PI;
                    }
                    None => pending_minus_one = Some(i),
                }
            }
            i += 1;
        }
    }
    let full = &q * l * q.transpose();
    (&full - full.transpose()) * 0.5
}

pub fn log(m: usize, r1: &[f64], r2: &[f64]) -> Vec<f64> {
    match m {
        2 => {
            let r = from_row_major(r2, 2) * from_row_major(r1, 2).transpose();
            let s = 0.5 * (r[(1, 0)] - r[(0, 1)]);
            let c = 0.5 * (r[(0, 0)] + r[(1, 1)]);
            vec![s.atan2(c)]
        }
        3 => {
            let r = mat3(r2) * mat3(r1).transpose();
            so3_log(&r).iter().copied().collect()
        }
        _ => {
            let r = from_row_major(r2, m) * from_row_major(r1, m).transpose();
            skew_to_coords(&logm_orthogonal(&r))
        }
    }
}

pub fn exp(m: usize, r1: &[f64], v: &[f64]) -> Vec<f64> {
    match m {
        2 => {
            let (s, c) = v[0].sin_cos();
            let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
            to_row_major(&(rot * from_row_major(r1, 2)))
        }
        3 => {
            let e = so3_exp(&Vector3::new(v[0], v[1], v[2]));
            row_major3(&(e * mat3(r1)))
        }
        _ => {
            let e = coords_to_skew(v, m).exp();
            to_row_major(&(e * from_row_major(r1, m)))
        }
    }
}

/// Nearest rotation: polar factor `U Vᵀ` with the determinant fixed to +1.
pub fn project(m: usize, raw: &[f64]) -> Result<Vec<f64>> {
    let a = from_row_major(raw, m);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("non-finite matrix entry".into()));
    }
    let svd = SVD::new(a, true, true);
    let min_sv = svd.singular_values.min();
    if min_sv < 1e-12 {
        return Err(Error::DegenerateInput(format!("singular value {min_sv:e} below 1e-12")));
    }
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut r = &u * &v_t;
    if r.determinant() < 0.0 {
        let k = svd.singular_values.imin();
        let mut col = u.column_mut(k);
        col.neg_mut();
        r = &u * &v_t;
    }
    Ok(to_row_major(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_log_at_pi_uses_positive_axis() {
        // Rotation by π about (0, -1, 0): the axis sign is normalised.
        let r = so3_exp(&Vector3::new(0.0, -PI, 0.0));
        let w = so3_log(&r);
        assert!((w - Vector3::new(0.0, PI, 0.0)).norm() < 1e-12, "{w}");
        let r = so3_exp(&(Vector3::new(1.0, 2.0, -2.0).normalize() * PI));
        let w = so3_log(&r);
        assert!((w.norm() - PI).abs() < 1e-12);
        assert!((so3_exp(&w) - r).norm() < 1e-12);
    }

    #[test]
    fn so3_log_near_pi_keeps_sign() {
        let w0 = Vector3::new(0.3, -0.4, 0.5).normalize() * (PI - 1e-6);
        let w = so3_log(&so3_exp(&w0));
        assert!((w - w0).norm() < 1e-8, "{w} vs {w0}");
    }

    #[test]
    fn so4_log_exp() {
        let c = [0.3, -1.1, 0.4, 0.9, 0.2, -0.5];
        let s = coords_to_skew(&c, 4);
        let r = s.clone().exp();
        let l = logm_orthogonal(&r);
        assert!((l - s).norm() < 1e-10);
    }

    #[test]
    fn project_fixes_reflection() {
        let raw = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0];
        let r = project(3, &raw).unwrap();
        let rm = from_row_major(&r, 3);
        assert!((rm.determinant() - 1.0).abs() < 1e-12);
        assert!(matches!(project(2, &[0.0; 4]), Err(Error::DegenerateInput(_))));
    }
}

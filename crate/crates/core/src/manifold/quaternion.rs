//! Unit quaternions `[w, x, y, z]` with tangent vectors in R^3.
//!
//! `Log_U(Q) = log(Q * conj(U))` and `Exp_U(v) = exp(v) * U`, where the
//! quaternion log returns `acos(w) * u / ‖u‖`: the half-angle convention, so
//! the tangent norm is half the rotation angle and equals the great-circle
//! distance on S^3. `Q` is sign-flipped before the log whenever `⟨U, Q⟩ < 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Quat = [f64; 4];

pub fn mul(a: &[f64], b: &[f64]) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn conj(q: &[f64]) -> Quat {
    [q[0], -q[1], -q[2], -q[3]]
}

/// Returns `q` or `-q`, whichever lies in the hemisphere of `reference`.
pub fn align(reference: &[f64], q: &[f64]) -> Quat {
    let d: f64 = reference.iter().zip(q).map(|(a, b)| a * b).sum();
    if d < 0.0 {
        [-q[0], -q[1], -q[2], -q[3]]
    } else {
        [q[0], q[1], q[2], q[3]]
    }
}

/// `q * conj(u)`, grouped so that `q == u` gives exactly the identity
/// vector part.
fn relative(q: &[f64], u: &[f64]) -> Quat {
    let cross = [q[2] * u[3] - q[3] * u[2], q[3] * u[1] - q[1] * u[3], q[1] * u[2] - q[2] * u[1]];
    [
        q[0] * u[0] + q[1] * u[1] + q[2] * u[2] + q[3] * u[3],
        (u[0] * q[1] - q[0] * u[1]) - cross[0],
        (u[0] * q[2] - q[0] * u[2]) - cross[1],
        (u[0] * q[3] - q[0] * u[3]) - cross[2],
    ]
}

pub fn log(u: &[f64], q: &[f64]) -> Vec<f64> {
    let q = align(u, q);
    let r = relative(&q, u);
    let un = (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
    if un == 0.0 {
        return vec![0.0; 3];
    }
    // atan2 equals acos(w) for a unit quaternion but keeps full precision
    // near the identity.
    let angle = un.atan2(r[0]);
    vec![angle * r[1] / un, angle * r[2] / un, angle * r[3] / un]
}

pub fn exp(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n >= PI {
        return Err(Error::InjectivityExceeded { norm: n, limit: PI });
    }
    if n == 0.0 {
        return Ok(u.to_vec());
    }
    let (s, c) = n.sin_cos();
    let r = [c, s * v[0] / n, s * v[1] / n, s * v[2] / n];
    Ok(mul(&r, u).to_vec())
}

/// Rotation matrix (row-major) of a unit quaternion.
pub fn to_rotation(q: &[f64]) -> [f64; 9] {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    [
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ]
}

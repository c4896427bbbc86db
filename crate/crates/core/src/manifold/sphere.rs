//! Unit m-sphere embedded in R^(m+1), tangent vectors in ambient coordinates.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Below this norm the component of `q` orthogonal to `u` is treated as zero.
const ORTHO_EPS: f64 = 1e-12;

pub fn log(u: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    let c = dot(u, q);
    let w: Vec<f64> = q.iter().zip(u).map(|(qi, ui)| qi - c * ui).collect();
    let wn = norm(&w);
    if wn < ORTHO_EPS {
        if c < 0.0 {
            return Err(Error::InjectivityExceeded { norm: PI, limit: PI });
        }
        return Ok(vec![0.0; u.len()]);
    }
    let theta = wn.atan2(c);
    Ok(w.iter().map(|x| x * theta / wn).collect())
}

/// Exponential map. Any component of `v` along `u` is removed first, so that
/// coordinates carried over from a neighbouring base point stay usable.
pub fn exp(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let along = dot(u, v);
    let t: Vec<f64> = v.iter().zip(u).map(|(vi, ui)| vi - along * ui).collect();
    let n = norm(&t);
    if n >= PI {
        return Err(Error::InjectivityExceeded { norm: n, limit: PI });
    }
    if n == 0.0 {
        return Ok(u.to_vec());
    }
    let (s, c) = n.sin_cos();
    Ok(u.iter().zip(&t).map(|(ui, ti)| c * ui + s * ti / n).collect())
}

pub fn project(raw: &[f64]) -> Result<Vec<f64>> {
    let n = norm(raw);
    if n < 1e-12 || !n.is_finite() {
        return Err(Error::DegenerateInput(format!("cannot normalise vector of norm {n:e}")));
    }
    Ok(raw.iter().map(|x| x / n).collect())
}

pub fn unit_norm_residual(x: &[f64]) -> f64 {
    norm(x) - 1.0
}

//! Riemannian manifolds: exp/log maps, distances, geodesics, validation and
//! projection.
//!
//! Every operation exists in two forms. The slice-level methods on
//! [`ManifoldDescriptor`] (`log`, `exp`, `dist`) work on raw storage and are
//! what the integrators use in their inner loops. The free functions
//! ([`log_map`], [`exp_map`], [`distance`], ...) take typed, validated points.

mod descriptor;
mod point;
pub mod quaternion;
pub mod rotation;
pub mod sphere;
pub mod spd;

pub use descriptor::ManifoldDescriptor;
pub use point::{identity_data, ManifoldPoint, TangentVector};

use crate::error::{Error, Result};
use crate::linalg::{self, norm};

/// Tolerance for point invariants (unit norm, orthogonality, symmetry).
pub const VALIDATION_TOL: f64 = 1e-9;

impl ManifoldDescriptor {
    fn check_len(&self, what: usize, expected: usize) -> Result<()> {
        if what != expected {
            return Err(Error::DimensionMismatch { expected, found: what });
        }
        Ok(())
    }

    /// Log map on raw storage: tangent coordinates at `p` pointing to `q`.
    pub fn log(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len(), self.ambient_dim())?;
        self.check_len(q.len(), self.ambient_dim())?;
        let mut out = Vec::with_capacity(self.tangent_dim());
        self.log_into(p, q, &mut out)?;
        Ok(out)
    }

    fn log_into(&self, p: &[f64], q: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match self {
            ManifoldDescriptor::Euclidean(_) => out.extend(q.iter().zip(p).map(|(a, b)| a - b)),
            ManifoldDescriptor::Sphere(_) => out.extend(sphere::log(p, q)?),
            ManifoldDescriptor::UnitQuaternion => out.extend(quaternion::log(p, q)),
            ManifoldDescriptor::SpecialOrthogonal(m) => out.extend(rotation::log(*m, p, q)),
            ManifoldDescriptor::Spd(m) => out.extend(spd::log(*m, p, q)),
            ManifoldDescriptor::Product(parts) => {
                let mut off = 0;
                for d in parts.iter() {
                    let n = d.ambient_dim();
                    d.log_into(&p[off..off + n], &q[off..off + n], out)?;
                    off += n;
                }
            }
        }
        Ok(())
    }

    /// Exp map on raw storage.
    pub fn exp(&self, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len(), self.ambient_dim())?;
        self.check_len(v.len(), self.tangent_dim())?;
        let mut out = Vec::with_capacity(self.ambient_dim());
        self.exp_into(p, v, &mut out)?;
        Ok(out)
    }

    fn exp_into(&self, p: &[f64], v: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match self {
            ManifoldDescriptor::Euclidean(_) => out.extend(p.iter().zip(v).map(|(a, b)| a + b)),
            ManifoldDescriptor::Sphere(_) => out.extend(sphere::exp(p, v)?),
            ManifoldDescriptor::UnitQuaternion => out.extend(quaternion::exp(p, v)?),
            ManifoldDescriptor::SpecialOrthogonal(m) => out.extend(rotation::exp(*m, p, v)),
            ManifoldDescriptor::Spd(m) => out.extend(spd::exp(*m, p, v)),
            ManifoldDescriptor::Product(parts) => {
                let (mut pa, mut ta) = (0, 0);
                for d in parts.iter() {
                    let (n, k) = (d.ambient_dim(), d.tangent_dim());
                    d.exp_into(&p[pa..pa + n], &v[ta..ta + k], out)?;
                    pa += n;
                    ta += k;
                }
            }
        }
        Ok(())
    }

    /// Geodesic distance on raw storage, `‖log(p, q)‖`.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        Ok(norm(&self.log(p, q)?))
    }

    /// Per-component distances of a product (a single entry otherwise).
    pub fn component_dists(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        let v = self.log(p, q)?;
        let mut off = 0;
        Ok(self
            .components()
            .iter()
            .map(|d| {
                let k = d.tangent_dim();
                let n = norm(&v[off..off + k]);
                off += k;
                n
            })
            .collect())
    }
}

fn same_descriptor(a: &ManifoldDescriptor, b: &ManifoldDescriptor) -> Result<()> {
    if a != b {
        return Err(Error::DescriptorMismatch {
            expected: a.to_string(),
            found: b.to_string(),
        });
    }
    Ok(())
}

/// Tangent vector at `p` pointing along the geodesic to `q`; its norm is
/// the geodesic distance.
pub fn log_map(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
    same_descriptor(p.descriptor(), q.descriptor())?;
    let coords = p.descriptor().log(p.data(), q.data())?;
    Ok(TangentVector { base: p.clone(), coords })
}

/// Follows the geodesic from `p` with initial velocity `v`.
pub fn exp_map(p: &ManifoldPoint, v: &[f64]) -> Result<ManifoldPoint> {
    let d = p.descriptor();
    let data = d.exp(p.data(), v)?;
    Ok(ManifoldPoint::new_unchecked(d.clone(), data))
}

pub fn distance(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<f64> {
    Ok(log_map(p, q)?.norm())
}

/// Point at fraction `t` of the geodesic from `p` to `q`.
///
/// For quaternions the result at `t = 1` is the hemisphere-aligned
/// representative of `q`, i.e. possibly `-q`.
pub fn geodesic_interpolate(p: &ManifoldPoint, q: &ManifoldPoint, t: f64) -> Result<ManifoldPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("interpolation parameter {t} outside [0, 1]")));
    }
    let v = log_map(p, q)?;
    let scaled: Vec<f64> = v.coords.iter().map(|x| x * t).collect();
    exp_map(p, &scaled)
}

/// A single failed invariant and how far off it is.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every invariant of `d` on raw storage at tolerance `tol`.
pub fn validate(d: &ManifoldDescriptor, data: &[f64], tol: f64) -> Validation {
    let mut report = Validation::default();
    if data.len() != d.ambient_dim() {
        report.violations.push(Violation {
            invariant: format!("length {}", d.ambient_dim()),
            residual: data.len() as f64 - d.ambient_dim() as f64,
        });
        return report;
    }
    validate_into(d, data, tol, "", &mut report.violations);
    report
}

fn validate_into(d: &ManifoldDescriptor, data: &[f64], tol: f64, prefix: &str, out: &mut Vec<Violation>) {
    let mut push = |name: &str, residual: f64| {
        out.push(Violation { invariant: format!("{prefix}{name}"), residual });
    };
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        push("finite entries", *bad);
        return;
    }
    match d {
        ManifoldDescriptor::Euclidean(_) => {}
        ManifoldDescriptor::Sphere(_) | ManifoldDescriptor::UnitQuaternion => {
            let r = sphere::unit_norm_residual(data);
            if r.abs() > tol {
                push("unit norm", r);
            }
        }
        ManifoldDescriptor::SpecialOrthogonal(m) => {
            let r = linalg::from_row_major(data, *m);
            let ortho = linalg::max_abs(&(r.transpose() * &r - nalgebra::DMatrix::identity(*m, *m)));
            if ortho > tol {
                push("orthogonality RᵀR = I", ortho);
            }
            let det = r.determinant() - 1.0;
            if det.abs() > tol {
                push("determinant +1", det);
            }
        }
        ManifoldDescriptor::Spd(m) => {
            let sym = spd::symmetry_residual(*m, data);
            if sym > tol {
                push("symmetry", sym);
            }
            let min = spd::min_eig(*m, data);
            if min <= 0.0 {
                push("positive definiteness (min eigenvalue)", min);
            }
        }
        ManifoldDescriptor::Product(parts) => {
            let mut off = 0;
            for (i, p) in parts.iter().enumerate() {
                let n = p.ambient_dim();
                validate_into(p, &data[off..off + n], tol, &format!("{prefix}component {i}: "), out);
                off += n;
            }
        }
    }
}

/// Nearest valid point to `raw`: normalisation for spheres, polar factor for
/// rotations, eigenvalue clamping at [`spd::EPS_SPD`] for SPD matrices.
pub fn project(raw: &[f64], d: &ManifoldDescriptor) -> Result<ManifoldPoint> {
    if raw.len() != d.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: d.ambient_dim(), found: raw.len() });
    }
    let data = project_raw(raw, d)?;
    Ok(ManifoldPoint::new_unchecked(d.clone(), data))
}

fn project_raw(raw: &[f64], d: &ManifoldDescriptor) -> Result<Vec<f64>> {
    match d {
        ManifoldDescriptor::Euclidean(_) => {
            if raw.iter().any(|x| !x.is_finite()) {
                return Err(Error::DegenerateInput("non-finite coordinate".into()));
            }
            Ok(raw.to_vec())
        }
        ManifoldDescriptor::Sphere(_) | ManifoldDescriptor::UnitQuaternion => sphere::project(raw),
        ManifoldDescriptor::SpecialOrthogonal(m) => rotation::project(*m, raw),
        ManifoldDescriptor::Spd(m) => spd::project(*m, raw),
        ManifoldDescriptor::Product(parts) => {
            let mut out = Vec::with_capacity(raw.len());
            let mut off = 0;
            for p in parts.iter() {
                let n = p.ambient_dim();
                out.extend(project_raw(&raw[off..off + n], p)?);
                off += n;
            }
            Ok(out)
        }
    }
}

/// Cartesian product descriptor; see [`ManifoldDescriptor::product`].
pub fn product_descriptor(parts: Vec<ManifoldDescriptor>) -> Result<ManifoldDescriptor> {
    ManifoldDescriptor::product(parts)
}

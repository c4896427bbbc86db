use serde::{Deserialize, Serialize};

use super::{validate, ManifoldDescriptor, VALIDATION_TOL};
use crate::error::{Error, Result};

/// A point on a manifold: flat storage in the layout fixed by its descriptor.
///
/// Construction through [`ManifoldPoint::new`] checks every invariant of the
/// descriptor at [`VALIDATION_TOL`], so a `ManifoldPoint` in hand is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPoint {
    descriptor: ManifoldDescriptor,
    data: Vec<f64>,
}

impl ManifoldPoint {
    pub fn new(descriptor: ManifoldDescriptor, data: Vec<f64>) -> Result<Self> {
        if data.len() != descriptor.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: descriptor.ambient_dim(),
                found: data.len(),
            });
        }
        let report = validate(&descriptor, &data, VALIDATION_TOL);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(Error::InvalidPoint {
                invariant: v.invariant,
                residual: v.residual,
            });
        }
        Ok(ManifoldPoint { descriptor, data })
    }

    /// Skips validation. Callers guarantee the invariants hold, e.g. because
    /// `data` came out of an exp map.
    pub(crate) fn new_unchecked(descriptor: ManifoldDescriptor, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), descriptor.ambient_dim());
        ManifoldPoint { descriptor, data }
    }

    pub fn identity(descriptor: &ManifoldDescriptor) -> Self {
        ManifoldPoint::new_unchecked(descriptor.clone(), identity_data(descriptor))
    }

    pub fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Splits a product point into its component points.
    pub fn components(&self) -> Vec<ManifoldPoint> {
        let parts = self.descriptor.components();
        let mut offset = 0;
        parts
            .into_iter()
            .map(|d| {
                let n = d.ambient_dim();
                let p = ManifoldPoint::new_unchecked(d, self.data[offset..offset + n].to_vec());
                offset += n;
                p
            })
            .collect()
    }

    /// Stacks component points into a point on their product manifold.
    pub fn stack(parts: &[ManifoldPoint]) -> Result<ManifoldPoint> {
        let d = ManifoldDescriptor::product(parts.iter().map(|p| p.descriptor.clone()).collect())?;
        let data = parts.iter().flat_map(|p| p.data.iter().copied()).collect();
        Ok(ManifoldPoint::new_unchecked(d, data))
    }
}

/// The canonical base point: origin, north pole `e_(m+1)`, identity
/// quaternion, identity matrix.
pub fn identity_data(d: &ManifoldDescriptor) -> Vec<f64> {
    match d {
        ManifoldDescriptor::Euclidean(m) => vec![0.0; *m],
        ManifoldDescriptor::Sphere(m) => {
            let mut v = vec![0.0; m + 1];
            v[*m] = 1.0;
            v
        }
        ManifoldDescriptor::UnitQuaternion => vec![1.0, 0.0, 0.0, 0.0],
        ManifoldDescriptor::SpecialOrthogonal(m) | ManifoldDescriptor::Spd(m) => {
            let mut v = vec![0.0; m * m];
            for i in 0..*m {
                v[i * m + i] = 1.0;
            }
            v
        }
        ManifoldDescriptor::Product(parts) => parts.iter().flat_map(identity_data).collect(),
    }
}

/// Tangent coordinates anchored at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ManifoldPoint,
    pub coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, coords: Vec<f64>) -> Result<Self> {
        let n = base.descriptor().tangent_dim();
        if coords.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: coords.len() });
        }
        Ok(TangentVector { base, coords })
    }

    pub fn descriptor(&self) -> &ManifoldDescriptor {
        self.base.descriptor()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.coords)
    }
}

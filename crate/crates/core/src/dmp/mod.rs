//! Geometry-aware dynamic movement primitives.
//!
//! The transformation system runs in tangent coordinates:
//!
//! ```text
//! τ ż = α_z (β_z Log_Y(G) − z) + F(x)
//! τ Ẏ = z                     (integrated as Y ← Exp_Y(z δt / τ))
//! τ ẋ = −α_x x
//! F(x) = diag(d) · (Σ w_i Ψ_i(x) / Σ Ψ_i(x)) · x,   d = Log_{Y_1}(G)
//! ```
//!
//! `z` is a plain coordinate array carried from step to step; tangent spaces
//! at successive points are identified componentwise, with no parallel
//! transport.

mod fit;
mod rollout;

pub use fit::{estimate_derivatives, fit, fit_with, forcing_targets, WeightSolver, RIDGE_LAMBDA};
pub use rollout::{
    composite_model, goal_switch_step, lyapunov_value, reproduce, rollout, rollout_step,
    GoalSwitch, Rollout, RolloutState, PHASE_FLOOR,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldDescriptor, ManifoldPoint};

/// Positive gains of the transformation, canonical and goal systems.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DmpGains {
    pub alpha_z: f64,
    pub beta_z: f64,
    pub alpha_x: f64,
    pub alpha_g: f64,
    /// Motion duration in seconds.
    pub tau: f64,
}

impl DmpGains {
    /// Phase decay that leaves `x(τ) ≈ 0.01`.
    pub const DEFAULT_ALPHA_X: f64 = 4.6052;

    /// Critically damped defaults: `β_z = α_z / 4`, `α_g = α_z / 2`.
    pub fn new(alpha_z: f64, tau: f64) -> Result<Self> {
        let g = DmpGains {
            alpha_z,
            beta_z: alpha_z / 4.0,
            alpha_x: Self::DEFAULT_ALPHA_X,
            alpha_g: alpha_z / 2.0,
            tau,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("alpha_z", self.alpha_z),
            ("beta_z", self.beta_z),
            ("alpha_x", self.alpha_x),
            ("alpha_g", self.alpha_g),
            ("tau", self.tau),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidGain { name, value });
            }
        }
        Ok(())
    }
}

/// Phase at time `t`: `exp(−α_x t / τ)`.
pub fn canonical_phase(t: f64, gains: &DmpGains) -> f64 {
    (-gains.alpha_x * t / gains.tau).exp()
}

/// Gaussian basis functions placed along the phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
}

impl BasisSet {
    /// `c_i = exp(−α_x (i−1)/(N−1))`, `h_i = 1/(c_{i+1} − c_i)²`, `h_N = h_{N−1}`.
    pub fn new(n: usize, alpha_x: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidBasisCount(n));
        }
        let centers: Vec<f64> = (0..n)
            .map(|i| (-alpha_x * i as f64 / (n - 1) as f64).exp())
            .collect();
        let mut widths: Vec<f64> = centers.windows(2).map(|w| 1.0 / (w[1] - w[0]).powi(2)).collect();
        widths.push(widths[n - 2]);
        Ok(BasisSet { centers, widths })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `Ψ_i(x) = exp(−h_i (x − c_i)²)`.
    pub fn activations(&self, x: f64) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.widths)
            .map(|(c, h)| (-h * (x - c).powi(2)).exp())
            .collect()
    }

    /// `Ψ(x) / ΣΨ(x) · x`, the regressors of the forcing term. Normalised in
    /// log space so that far-out phases cannot underflow to 0/0.
    pub fn features(&self, x: f64) -> Vec<f64> {
        let expo: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, h)| -h * (x - c).powi(2))
            .collect();
        let top = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = expo.iter().map(|e| (e - top).exp()).collect();
        let sum: f64 = w.iter().sum();
        w.into_iter().map(|v| v / sum * x).collect()
    }
}

/// A learned primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct GaDmpModel {
    pub descriptor: ManifoldDescriptor,
    pub gains: DmpGains,
    pub basis: BasisSet,
    /// `tangent_dim x N`.
    pub weights: DMatrix<f64>,
    pub start: ManifoldPoint,
    pub goal: ManifoldPoint,
    /// Diagonal of the start-to-goal scaling; masked entries hold 1.
    pub scaling: Vec<f64>,
    pub scaling_mask: Vec<bool>,
}

impl GaDmpModel {
    /// `diag(d) · W · features(x)`.
    pub fn forcing(&self, x: f64) -> Vec<f64> {
        let phi = self.basis.features(x.max(PHASE_FLOOR));
        let mut f = vec![0.0; self.weights.nrows()];
        for (j, fj) in f.iter_mut().enumerate() {
            let row = self.weights.row(j);
            let s: f64 = row.iter().zip(&phi).map(|(w, p)| w * p).sum();
            *fj = self.scaling[j] * s;
        }
        f
    }

    /// Structural consistency check, used when loading models from disk.
    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        let k = self.descriptor.tangent_dim();
        let n = self.basis.len();
        if n < 2 {
            return Err(Error::InvalidBasisCount(n));
        }
        if self.basis.widths.len() != n || self.basis.widths.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Format("basis widths must be positive, one per center".into()));
        }
        if self.weights.shape() != (k, n) {
            return Err(Error::Format(format!(
                "weights are {:?}, expected {k} x {n}",
                self.weights.shape()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Format("non-finite weight".into()));
        }
        if self.scaling.len() != k || self.scaling_mask.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: self.scaling.len() });
        }
        for p in [&self.start, &self.goal] {
            if p.descriptor() != &self.descriptor {
                return Err(Error::DescriptorMismatch {
                    expected: self.descriptor.to_string(),
                    found: p.descriptor().to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Time-stamped points sharing one descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldTrajectory {
    descriptor: ManifoldDescriptor,
    times: Vec<f64>,
    points: Vec<ManifoldPoint>,
}

impl ManifoldTrajectory {
    pub fn new(descriptor: ManifoldDescriptor, times: Vec<f64>, points: Vec<ManifoldPoint>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: points.len() });
        }
        if let Some(i) = (1..times.len()).find(|&i| !(times[i] > times[i - 1])) {
            return Err(Error::NonMonotonicTime { index: i });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Format("non-finite timestamp".into()));
        }
        if let Some(p) = points.iter().find(|p| p.descriptor() != &descriptor) {
            return Err(Error::DescriptorMismatch {
                expected: descriptor.to_string(),
                found: p.descriptor().to_string(),
            });
        }
        Ok(ManifoldTrajectory { descriptor, times, points })
    }

    /// Builds from raw rows, validating every point.
    pub fn from_raw(descriptor: ManifoldDescriptor, times: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let points = rows
            .into_iter()
            .map(|r| ManifoldPoint::new(descriptor.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(descriptor, times, points)
    }

    pub fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Option<&ManifoldPoint> {
        self.points.first()
    }

    pub fn last(&self) -> Option<&ManifoldPoint> {
        self.points.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// The common step, if all steps agree to 1e-9 relative.
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.duration() / (self.times.len() - 1) as f64;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0))
            .then_some(dt)
    }

    /// Sum of geodesic distances between consecutive samples.
    pub fn geodesic_length(&self) -> Result<f64> {
        self.points.windows(2).try_fold(0.0, |acc, w| {
            Ok(acc + self.descriptor.dist(w[0].data(), w[1].data())?)
        })
    }

    /// Splits a product trajectory into one trajectory per component.
    pub fn components(&self) -> Vec<ManifoldTrajectory> {
        let parts = self.descriptor.components();
        let split: Vec<Vec<ManifoldPoint>> = self.points.iter().map(|p| p.components()).collect();
        parts
            .into_iter()
            .enumerate()
            .map(|(i, d)| ManifoldTrajectory {
                descriptor: d,
                times: self.times.clone(),
                points: split.iter().map(|c| c[i].clone()).collect(),
            })
            .collect()
    }
}

/// Per-sample geodesic distances between two equally long trajectories.
pub fn pointwise_distances(a: &ManifoldTrajectory, b: &ManifoldTrajectory) -> Result<Vec<f64>> {
    if a.descriptor() != b.descriptor() {
        return Err(Error::DescriptorMismatch {
            expected: a.descriptor().to_string(),
            found: b.descriptor().to_string(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| a.descriptor().dist(p.data(), q.data()))
        .collect()
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(alpha_x: f64) -> DmpGains {
        DmpGains { alpha_x, ..DmpGains::new(25.0, 1.0).unwrap() }
    }

    #[test]
    fn phase_closed_form() {
        let g = gains(4.6052);
        assert_eq!(canonical_phase(0.0, &g), 1.0);
        assert!((canonical_phase(g.tau, &g) - 0.01).abs() < 1e-5);
        let far = canonical_phase(1e4, &g);
        assert!(far >= 0.0 && far < 1e-300);
    }

    #[test]
    fn default_gains() {
        let g = DmpGains::new(60.0, 2.0).unwrap();
        assert_eq!(g.beta_z, 15.0);
        assert_eq!(g.alpha_g, 30.0);
        assert!(DmpGains::new(-1.0, 1.0).is_err());
        assert!(DmpGains::new(1.0, 0.0).is_err());
    }

    #[test]
    fn basis_layout() {
        assert!(matches!(BasisSet::new(1, 4.6052), Err(Error::InvalidBasisCount(1))));
        let b = BasisSet::new(60, 4.6052).unwrap();
        assert_eq!(b.len(), 60);
        assert_eq!(b.centers[0], 1.0);
        assert!((b.centers[59] - (-4.6052f64).exp()).abs() < 1e-15);
        assert!(b.centers.windows(2).all(|w| w[1] < w[0]));
        assert!(b.widths.iter().all(|h| *h > 0.0));
        assert_eq!(b.widths[59], b.widths[58]);
    }

    #[test]
    fn activations() {
        let b = BasisSet::new(10, 3.0).unwrap();
        for i in 0..10 {
            assert_eq!(b.activations(b.centers[i])[i], 1.0);
        }
        // Pick x so that h_0 (x − c_0)² = 10.
        let x = b.centers[0] - (10.0 / b.widths[0]).sqrt();
        assert!((b.activations(x)[0] - (-10f64).exp()).abs() < 1e-15);
        for k in 1..=100 {
            let x = k as f64 / 100.0;
            let a = b.activations(x);
            assert!(a.iter().all(|v| *v >= 0.0 && *v <= 1.0));
            assert!(a.iter().sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn features_survive_underflow() {
        let b = BasisSet::new(400, 4.6052).unwrap();
        let phi = b.features(PHASE_FLOOR);
        assert!(phi.iter().all(|v| v.is_finite()));
        assert!((phi.iter().sum::<f64>() - PHASE_FLOOR).abs() < 1e-20);
    }

    fn model_with_weights(w: DMatrix<f64>, basis: BasisSet) -> GaDmpModel {
        let d = ManifoldDescriptor::Euclidean(1);
        GaDmpModel {
            descriptor: d.clone(),
            gains: gains(4.6052),
            basis,
            weights: w,
            start: ManifoldPoint::new(d.clone(), vec![0.0]).unwrap(),
            goal: ManifoldPoint::new(d, vec![2.0]).unwrap(),
            scaling: vec![2.0],
            scaling_mask: vec![false],
        }
    }

    #[test]
    fn forcing_zero_weights_and_vanishing_phase() {
        let b = BasisSet::new(5, 4.6052).unwrap();
        let m = model_with_weights(DMatrix::zeros(1, 5), b.clone());
        assert_eq!(m.forcing(0.5), vec![0.0]);
        let m = model_with_weights(DMatrix::from_element(1, 5, 3.0), b);
        assert!(m.forcing(1e-9)[0].abs() < 1e-7);
    }

    #[test]
    fn forcing_equal_weights_collapse_to_single_basis() {
        // With every weight equal the normalised average is that weight, so
        // F = d · w · x exactly as a lone basis function would give.
        let b = BasisSet::new(2, 4.6052).unwrap();
        let m = model_with_weights(DMatrix::from_element(1, 2, 1.5), b);
        for x in [1.0, 0.4, 0.05] {
            assert!((m.forcing(x)[0] - 2.0 * 1.5 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn trajectory_checks() {
        let d = ManifoldDescriptor::Euclidean(1);
        let pts = |n: usize| (0..n).map(|i| vec![i as f64]).collect::<Vec<_>>();
        assert!(matches!(
            ManifoldTrajectory::from_raw(d.clone(), vec![0.0, 1.0, 1.0], pts(3)),
            Err(Error::NonMonotonicTime { index: 2 })
        ));
        let t = ManifoldTrajectory::from_raw(d, vec![0.0, 0.5, 1.0], pts(3)).unwrap();
        assert_eq!(t.uniform_dt(), Some(0.5));
        assert_eq!(t.geodesic_length().unwrap(), 2.0);
    }
}

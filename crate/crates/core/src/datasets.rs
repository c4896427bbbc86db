//! Benchmark trajectories: planar handwriting-style fixtures, their lift onto
//! curved manifolds, and designed SPD profiles.

use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::dmp::ManifoldTrajectory;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::manifold::{geodesic_interpolate, ManifoldDescriptor, ManifoldPoint};
use crate::sim::{self, PlanarArm};

/// One planar sample. Velocity and acceleration are optional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarSample {
    pub t: f64,
    pub p: [f64; 2],
    pub v: Option<[f64; 2]>,
    pub a: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTrajectory {
    samples: Vec<PlanarSample>,
}

impl PlanarTrajectory {
    pub fn new(samples: Vec<PlanarSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            let finite = s.t.is_finite()
                && s.p.iter().chain(s.v.iter().flatten()).chain(s.a.iter().flatten()).all(|x| x.is_finite());
            if !finite {
                return Err(Error::Format(format!("non-finite value in sample {i}")));
            }
            if i > 0 && !(s.t > samples[i - 1].t) {
                return Err(Error::NonMonotonicTime { index: i });
            }
        }
        Ok(PlanarTrajectory { samples })
    }

    pub fn from_positions(times: &[f64], positions: &[[f64; 2]]) -> Result<Self> {
        if times.len() != positions.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: positions.len() });
        }
        Self::new(
            times
                .iter()
                .zip(positions)
                .map(|(&t, &p)| PlanarSample { t, p, v: None, a: None })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[PlanarSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| s.p).collect()
    }

    pub fn path_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].p[0] - w[0].p[0]).hypot(w[1].p[1] - w[0].p[1]))
            .sum()
    }

    /// `p ↦ scale·p + offset`, with derivatives scaled alike.
    pub fn transformed(&self, scale: f64, offset: [f64; 2]) -> PlanarTrajectory {
        let sc = |v: [f64; 2]| [scale * v[0], scale * v[1]];
        PlanarTrajectory {
            samples: self
                .samples
                .iter()
                .map(|s| PlanarSample {
                    t: s.t,
                    p: [scale * s.p[0] + offset[0], scale * s.p[1] + offset[1]],
                    v: s.v.map(sc),
                    a: s.a.map(sc),
                })
                .collect(),
        }
    }

    /// Euclidean(2) trajectory of the positions.
    pub fn to_manifold(&self) -> Result<ManifoldTrajectory> {
        ManifoldTrajectory::from_raw(
            ManifoldDescriptor::Euclidean(2),
            self.times(),
            self.samples.iter().map(|s| s.p.to_vec()).collect(),
        )
    }
}

const FIXTURES: [(&str, &str); 4] = [
    ("gshape", include_str!("../fixtures/gshape.csv")),
    ("sshape", include_str!("../fixtures/sshape.csv")),
    ("wshape", include_str!("../fixtures/wshape.csv")),
    ("jshape", include_str!("../fixtures/jshape.csv")),
];

/// Names of the bundled planar fixtures.
pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

/// A bundled fixture: 200 samples, at rest at both ends, ending at the origin.
pub fn fixture(name: &str) -> Result<PlanarTrajectory> {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown fixture '{name}' (have {})", fixture_names().join(", "))))?;
    crate::io::parse_planar_csv(text.as_bytes())
}

/// `[x, y] ↦ [x, y, (x + y) / 2]`.
pub fn add_z_axis(traj: &PlanarTrajectory) -> Vec<[f64; 3]> {
    traj.samples.iter().map(|s| [s.p[0], s.p[1], 0.5 * (s.p[0] + s.p[1])]).collect()
}

/// How a 3-D curve is read as tangent vectors and mapped onto a manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftConfig {
    pub base: ManifoldPoint,
    pub scale: f64,
    pub target: ManifoldDescriptor,
}

impl LiftConfig {
    /// Identity base and [`default_lift_scale`].
    pub fn for_curve(target: ManifoldDescriptor, curve: &[[f64; 3]]) -> Result<Self> {
        check_lift_target(&target)?;
        Ok(LiftConfig {
            base: ManifoldPoint::identity(&target),
            scale: default_lift_scale(&target, curve)?,
            target,
        })
    }
}

fn check_lift_target(target: &ManifoldDescriptor) -> Result<()> {
    match target {
        ManifoldDescriptor::UnitQuaternion
        | ManifoldDescriptor::SpecialOrthogonal(3)
        | ManifoldDescriptor::Sphere(3)
        | ManifoldDescriptor::Spd(2)
        | ManifoldDescriptor::Euclidean(3) => Ok(()),
        other => Err(Error::InvalidArgument(format!(
            "lift target must be quat, so:3, sphere:3, spd:2 or euclidean:3, got {other}"
        ))),
    }
}

/// Scale that puts the farthest sample at 0.45 of the injectivity radius.
/// Any two lifted samples are then closer than 0.9 of the radius, so logs
/// between them stay inside one chart. Targets without a finite radius
/// (SPD, Euclidean) use π in its place.
pub fn default_lift_scale(target: &ManifoldDescriptor, curve: &[[f64; 3]]) -> Result<f64> {
    check_lift_target(target)?;
    let radius = target.injectivity_radius().unwrap_or(PI);
    let max = curve.iter().map(|v| norm(v)).fold(0.0, f64::max);
    Ok(if max > 0.0 { 0.45 * radius / max } else { 1.0 })
}

/// `Y_l = Exp_base(scale · v_l)`.
pub fn lift_to_manifold(times: &[f64], curve: &[[f64; 3]], cfg: &LiftConfig) -> Result<ManifoldTrajectory> {
    check_lift_target(&cfg.target)?;
    if cfg.base.descriptor() != &cfg.target {
        return Err(Error::DescriptorMismatch {
            expected: cfg.target.to_string(),
            found: cfg.base.descriptor().to_string(),
        });
    }
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("lift scale must be positive, got {}", cfg.scale)));
    }
    if times.len() != curve.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: curve.len() });
    }
    let limit = cfg.target.injectivity_radius().unwrap_or(f64::INFINITY);
    let base = cfg.base.data();
    let points = curve
        .iter()
        .map(|v| {
            let v = v.map(|c| c * cfg.scale);
            let n = norm(&v);
            if n >= limit {
                return Err(Error::InjectivityExceeded { norm: n, limit });
            }
            let coords = match cfg.target {
                // Tangent space at a point of S³ in ambient coordinates: embed
                // the 3-vector orthogonally to the base.
                ManifoldDescriptor::Sphere(3) => {
                    let basis = tangent_basis_s3(base);
                    (0..4).map(|i| (0..3).map(|k| v[k] * basis[k][i]).sum()).collect()
                }
                _ => v.to_vec(),
            };
            let data = cfg.target.exp(base, &coords)?;
            ManifoldPoint::new(cfg.target.clone(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    ManifoldTrajectory::new(cfg.target.clone(), times.to_vec(), points)
}

/// Orthonormal basis of the tangent space of S³ at `p`, obtained by
/// Gram-Schmidt on the first three standard axes. At the north pole this is
/// exactly `e1, e2, e3`.
fn tangent_basis_s3(p: &[f64]) -> [[f64; 4]; 3] {
    let mut out: Vec<[f64; 4]> = Vec::with_capacity(3);
    let mut axis = 0;
    while out.len() < 3 {
        let mut e = [0.0; 4];
        e[axis] = 1.0;
        let proj: f64 = (0..4).map(|i| e[i] * p[i]).sum();
        for i in 0..4 {
            e[i] -= proj * p[i];
        }
        for b in &out {
            let d: f64 = (0..4).map(|i| e[i] * b[i]).sum();
            for i in 0..4 {
                e[i] -= d * b[i];
            }
        }
        let n = norm(&e);
        if n > 1e-6 {
            out.push(e.map(|x| x / n));
        }
        axis += 1;
    }
    [out[0], out[1], out[2]]
}

/// `K_l = R(θ_l)ᵀ K R(θ_l)` with `θ_l` evenly spaced from 0 to `total_angle`.
pub fn rotating_stiffness_profile(
    k_start: &ManifoldPoint,
    total_angle: f64,
    samples: usize,
    dt: f64,
) -> Result<ManifoldTrajectory> {
    if k_start.descriptor() != &ManifoldDescriptor::Spd(2) {
        return Err(Error::DescriptorMismatch { expected: "spd:2".into(), found: k_start.descriptor().to_string() });
    }
    if samples < 2 {
        return Err(Error::TooShort { len: samples, min: 2 });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let k = Matrix2::from_row_slice(k_start.data());
    let points = (0..samples)
        .map(|l| {
            let theta = total_angle * l as f64 / (samples - 1) as f64;
            let (s, c) = theta.sin_cos();
            let r = Matrix2::new(c, -s, s, c);
            let m = r.transpose() * k * r;
            let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
            ManifoldPoint::new(ManifoldDescriptor::Spd(2), vec![m[(0, 0)], off, off, m[(1, 1)]])
        })
        .collect::<Result<Vec<_>>>()?;
    let times = (0..samples).map(|l| l as f64 * dt).collect();
    ManifoldTrajectory::new(ManifoldDescriptor::Spd(2), times, points)
}

/// Manipulability `(J Jᵀ)^†` along an inverse-kinematics track of `traj`.
/// Each IK solve is warm-started from the previous solution. Returns the
/// joint path alongside the profile.
pub fn manipulability_profile(
    arm: &PlanarArm,
    traj: &PlanarTrajectory,
    q_init: &[f64],
) -> Result<(Vec<Vec<f64>>, ManifoldTrajectory)> {
    let mut q = q_init.to_vec();
    let mut joints = Vec::with_capacity(traj.len());
    let mut points = Vec::with_capacity(traj.len());
    for s in traj.samples() {
        q = sim::inverse_kinematics(arm, s.p, &q)?;
        points.push(sim::manipulability(&arm.jacobian(&q)));
        joints.push(q.clone());
    }
    Ok((joints, ManifoldTrajectory::new(ManifoldDescriptor::Spd(2), traj.times(), points)?))
}

/// Straight geodesic from `start` to `goal` with minimum-jerk timing, at rest
/// at both ends.
pub fn min_jerk_geodesic(
    start: &ManifoldPoint,
    goal: &ManifoldPoint,
    duration: f64,
    samples: usize,
) -> Result<ManifoldTrajectory> {
    if samples < 2 {
        return Err(Error::TooShort { len: samples, min: 2 });
    }
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    let mut times = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    for l in 0..samples {
        let u = l as f64 / (samples - 1) as f64;
        let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        times.push(u * duration);
        points.push(geodesic_interpolate(start, goal, s)?);
    }
    ManifoldTrajectory::new(start.descriptor().clone(), times, points)
}

/// Pointwise mean of time-aligned demonstrations by iterated geodesic
/// midpoints: the running mean moves `1/k` of the way toward the k-th
/// demonstration. Exact on Euclidean spaces.
pub fn pointwise_mean(demos: &[ManifoldTrajectory]) -> Result<ManifoldTrajectory> {
    let first = demos.first().ok_or(Error::TooShort { len: 0, min: 1 })?;
    for d in &demos[1..] {
        if d.descriptor() != first.descriptor() {
            return Err(Error::DescriptorMismatch {
                expected: first.descriptor().to_string(),
                found: d.descriptor().to_string(),
            });
        }
        if d.len() != first.len() {
            return Err(Error::DimensionMismatch { expected: first.len(), found: d.len() });
        }
    }
    let mut mean = first.points().to_vec();
    for (k, demo) in demos.iter().enumerate().skip(1) {
        for (m, p) in mean.iter_mut().zip(demo.points()) {
            *m = geodesic_interpolate(m, p, 1.0 / (k + 1) as f64)?;
        }
    }
    ManifoldTrajectory::new(first.descriptor().clone(), first.times().to_vec(), mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{distance, log_map};

    #[test]
    fn z_axis_examples() {
        let t = PlanarTrajectory::from_positions(&[0.0, 1.0, 2.0], &[[2.0, 4.0], [0.0, 0.0], [1.0, -1.0]]).unwrap();
        assert_eq!(add_z_axis(&t), vec![[2.0, 4.0, 3.0], [0.0, 0.0, 0.0], [1.0, -1.0, 0.0]]);
    }

    #[test]
    fn fixtures_load() {
        for name in fixture_names() {
            let f = fixture(name).unwrap();
            assert_eq!(f.len(), 200);
            let last = f.samples().last().unwrap();
            assert!(norm(&last.p) < 1e-9);
            assert_eq!(f.samples()[0].v, Some([0.0, 0.0]));
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn planar_validation() {
        assert!(matches!(
            PlanarTrajectory::from_positions(&[0.0, 0.0], &[[0.0; 2]; 2]),
            Err(Error::NonMonotonicTime { index: 1 })
        ));
        assert!(PlanarTrajectory::from_positions(&[0.0, 1.0], &[[0.0, f64::NAN], [0.0; 2]]).is_err());
    }

    #[test]
    fn zero_sample_lifts_to_base() {
        for target in [ManifoldDescriptor::UnitQuaternion, ManifoldDescriptor::SpecialOrthogonal(3), ManifoldDescriptor::Sphere(3)] {
            let cfg = LiftConfig { base: ManifoldPoint::identity(&target), scale: 0.3, target };
            let t = lift_to_manifold(&[0.0], &[[0.0; 3]], &cfg).unwrap();
            assert_eq!(t.points()[0], cfg.base);
        }
        let s3 = ManifoldPoint::identity(&ManifoldDescriptor::Sphere(3));
        assert_eq!(s3.data(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn lift_round_trip_on_fixtures() {
        for name in fixture_names() {
            let f = fixture(name).unwrap();
            let curve = add_z_axis(&f);
            for target in [ManifoldDescriptor::UnitQuaternion, ManifoldDescriptor::SpecialOrthogonal(3), ManifoldDescriptor::Sphere(3)] {
                let cfg = LiftConfig::for_curve(target.clone(), &curve).unwrap();
                let lifted = lift_to_manifold(&f.times(), &curve, &cfg).unwrap();
                for (p, v) in lifted.points().iter().zip(&curve) {
                    let back = log_map(&cfg.base, p).unwrap().coords;
                    let back3 = if target == ManifoldDescriptor::Sphere(3) { &back[..3] } else { &back[..] };
                    for (b, c) in back3.iter().zip(v) {
                        assert!((b - cfg.scale * c).abs() < 1e-8, "{name} {target}");
                    }
                }
            }
        }
    }

    #[test]
    fn lift_rejects_large_scale() {
        let cfg = LiftConfig {
            base: ManifoldPoint::identity(&ManifoldDescriptor::UnitQuaternion),
            scale: 1.0,
            target: ManifoldDescriptor::UnitQuaternion,
        };
        let err = lift_to_manifold(&[0.0], &[[2.0, 0.0, 0.0]], &cfg).unwrap_err();
        assert!(matches!(err, Error::InjectivityExceeded { .. }));
        let cfg = LiftConfig { target: ManifoldDescriptor::Spd(2), ..cfg };
        assert!(lift_to_manifold(&[0.0], &[[0.0; 3]], &cfg).is_err());
    }

    #[test]
    fn radial_segment_length_is_preserved() {
        // A straight radial tangent segment lifts to a geodesic.
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let dir = [0.3, -0.5, 0.2];
        let curve: Vec<[f64; 3]> = times.iter().map(|t| dir.map(|d| d * t / 49.0)).collect();
        let tangent_len = norm(&dir);
        for target in [ManifoldDescriptor::UnitQuaternion, ManifoldDescriptor::SpecialOrthogonal(3), ManifoldDescriptor::Sphere(3)] {
            let cfg = LiftConfig::for_curve(target, &curve).unwrap();
            let lifted = lift_to_manifold(&times, &curve, &cfg).unwrap();
            assert!((lifted.geodesic_length().unwrap() - cfg.scale * tangent_len).abs() < 1e-6);
        }
    }

    #[test]
    fn stiffness_rotation() {
        let k = ManifoldPoint::new(ManifoldDescriptor::Spd(2), vec![622.9934, 39.9577, 39.9577, 79.5444]).unwrap();
        let prof = rotating_stiffness_profile(&k, PI / 2.0, 101, 0.01).unwrap();
        assert_eq!(prof.points()[0].data(), k.data());
        let end = prof.last().unwrap().data();
        let expected = [79.5444, -39.9577, -39.9577, 622.9934];
        for (a, b) in end.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{end:?}");
        }
        let det0 = 622.9934 * 79.5444 - 39.9577f64.powi(2);
        for p in prof.points() {
            let d = p.data();
            let det = d[0] * d[3] - d[1] * d[2];
            assert!(((det - det0) / det0).abs() < 1e-9);
            assert!(((d[0] + d[3]) - (622.9934 + 79.5444)).abs() < 1e-9);
        }
        assert!(matches!(rotating_stiffness_profile(&k, 1.0, 1, 0.1), Err(Error::TooShort { .. })));
    }

    #[test]
    fn min_jerk_endpoints_and_rest() {
        let d = ManifoldDescriptor::UnitQuaternion;
        let a = ManifoldPoint::new(d.clone(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = ManifoldPoint::new(d, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let t = min_jerk_geodesic(&a, &b, 2.0, 101).unwrap();
        assert!(distance(t.first().unwrap(), &a).unwrap() < 1e-12);
        assert!(distance(t.last().unwrap(), &b).unwrap() < 1e-12);
        let p = t.points();
        assert!(distance(&p[0], &p[1]).unwrap() < 1e-4);
        assert!((t.geodesic_length().unwrap() - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn mean_of_euclidean_demos() {
        let d = ManifoldDescriptor::Euclidean(1);
        let mk = |v: f64| ManifoldTrajectory::from_raw(d.clone(), vec![0.0, 1.0], vec![vec![v], vec![2.0 * v]]).unwrap();
        let m = pointwise_mean(&[mk(1.0), mk(2.0), mk(6.0)]).unwrap();
        assert!((m.points()[0].data()[0] - 3.0).abs() < 1e-12);
        assert!((m.points()[1].data()[0] - 6.0).abs() < 1e-12);
    }
}

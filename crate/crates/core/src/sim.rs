//! Desk-scale simulations driven by primitive rollouts: a redundant planar
//! arm that tracks a path while following a manipulability profile in its
//! null space, and a planar mass-spring-damper with variable stiffness.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::datasets::PlanarTrajectory;
use crate::dmp::ManifoldTrajectory;
use crate::error::{Error, Result};
use crate::linalg::from_row_major;
use crate::manifold::{spd, ManifoldDescriptor, ManifoldPoint};

/// Eigenvalue floor of the damped inversions.
pub const EIG_FLOOR: f64 = 1e-10;
/// Central-difference step of the cost gradient.
pub const GRADIENT_STEP: f64 = 1e-6;

pub const IK_DAMPING: f64 = 1e-3;
pub const IK_MAX_ITER: usize = 500;
pub const IK_TOL: f64 = 1e-8;
/// Residual above which an IK solve counts as failed.
pub const IK_FAIL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarArm {
    link_lengths: Vec<f64>,
    joint_limits: Option<Vec<(f64, f64)>>,
}

impl PlanarArm {
    pub fn new(link_lengths: Vec<f64>) -> Result<Self> {
        if link_lengths.is_empty() || link_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument("link lengths must be positive".into()));
        }
        Ok(PlanarArm { link_lengths, joint_limits: None })
    }

    pub fn with_joint_limits(mut self, limits: Vec<(f64, f64)>) -> Result<Self> {
        if limits.len() != self.link_lengths.len() || limits.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidArgument("need one (lo, hi) pair with lo < hi per joint".into()));
        }
        self.joint_limits = Some(limits);
        Ok(self)
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn joint_limits(&self) -> Option<&[(f64, f64)]> {
        self.joint_limits.as_deref()
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn clamp(&self, q: &mut [f64]) {
        if let Some(lim) = &self.joint_limits {
            for (qi, (lo, hi)) in q.iter_mut().zip(lim) {
                *qi = qi.clamp(*lo, *hi);
            }
        }
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> [f64; 2] {
        let mut phi = 0.0;
        let mut p = [0.0, 0.0];
        for (l, qi) in self.link_lengths.iter().zip(q) {
            phi += qi;
            p[0] += l * phi.cos();
            p[1] += l * phi.sin();
        }
        p
    }

    /// 2 × n position Jacobian.
    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let n = self.dof();
        let mut phi = Vec::with_capacity(n);
        let mut acc = 0.0;
        for qi in q.iter().take(n) {
            acc += qi;
            phi.push(acc);
        }
        let mut j = DMatrix::zeros(2, n);
        // Column k sums the contributions of links k..n.
        let (mut sx, mut sy) = (0.0, 0.0);
        for k in (0..n).rev() {
            sx -= self.link_lengths[k] * phi[k].sin();
            sy += self.link_lengths[k] * phi[k].cos();
            j[(0, k)] = sx;
            j[(1, k)] = sy;
        }
        j
    }

    fn check_reachable(&self, p: [f64; 2]) -> Result<()> {
        let reach = self.reach();
        if !(p[0].hypot(p[1]) < reach - 1e-6) {
            return Err(Error::Unreachable { x: p[0], y: p[1], reach });
        }
        Ok(())
    }
}

/// Which ellipsoid [`manipulability_with`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EllipsoidForm {
    /// `(J Jᵀ)^†`.
    #[default]
    Inverse,
    /// `J Jᵀ`, floored to stay SPD.
    Direct,
}

/// `(J Jᵀ)^†` with eigenvalues of `J Jᵀ` floored at [`EIG_FLOOR`].
pub fn manipulability(j: &DMatrix<f64>) -> ManifoldPoint {
    manipulability_with(j, EllipsoidForm::Inverse)
}

pub fn manipulability_with(j: &DMatrix<f64>, form: EllipsoidForm) -> ManifoldPoint {
    let jjt = j * j.transpose();
    let eig = SymmetricEigen::new(Matrix2::new(jjt[(0, 0)], jjt[(0, 1)], jjt[(1, 0)], jjt[(1, 1)]));
    let vals = eig.eigenvalues.map(|l| match form {
        EllipsoidForm::Inverse => 1.0 / l.max(EIG_FLOOR),
        EllipsoidForm::Direct => l.max(EIG_FLOOR),
    });
    let m = eig.eigenvectors * Matrix2::from_diagonal(&vals) * eig.eigenvectors.transpose();
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    ManifoldPoint::new_unchecked(ManifoldDescriptor::Spd(2), vec![m[(0, 0)], off, off, m[(1, 1)]])
}

/// `Jᵀ (J Jᵀ)^†` with the floored inversion.
pub fn pseudo_inverse(j: &DMatrix<f64>) -> DMatrix<f64> {
    let ups = manipulability(j);
    j.transpose() * from_row_major(ups.data(), 2)
}

/// `I − J^† J`.
pub fn null_space_projector(j: &DMatrix<f64>) -> DMatrix<f64> {
    let n = j.ncols();
    DMatrix::identity(n, n) - pseudo_inverse(j) * j
}

/// `log det((A + B)/2) − ½ log det(A B)`.
pub fn stein_cost(a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
    if a.descriptor() != b.descriptor() || !matches!(a.descriptor(), ManifoldDescriptor::Spd(_)) {
        return Err(Error::DescriptorMismatch { expected: a.descriptor().to_string(), found: b.descriptor().to_string() });
    }
    let m = a.descriptor().size_param().unwrap_or(0);
    stein_cost_matrices(&from_row_major(a.data(), m), &from_row_major(b.data(), m))
}

pub fn stein_cost_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let mid = (a + b) * 0.5;
    let cost = spd::log_det(&mid)? - 0.5 * (spd::log_det(a)? + spd::log_det(b)?);
    Ok(cost.max(0.0))
}

/// Damped least-squares IK from `q_init`.
pub fn inverse_kinematics(arm: &PlanarArm, target: [f64; 2], q_init: &[f64]) -> Result<Vec<f64>> {
    arm.check_reachable(target)?;
    if q_init.len() != arm.dof() {
        return Err(Error::DimensionMismatch { expected: arm.dof(), found: q_init.len() });
    }
    let mut q = q_init.to_vec();
    let lambda2 = IK_DAMPING * IK_DAMPING;
    let mut residual = f64::INFINITY;
    for _ in 0..IK_MAX_ITER {
        let p = arm.forward_kinematics(&q);
        let e = Vector2::new(target[0] - p[0], target[1] - p[1]);
        residual = e.norm();
        if residual < IK_TOL {
            return Ok(q);
        }
        let j = arm.jacobian(&q);
        let jjt = &j * j.transpose();
        let m = Matrix2::new(jjt[(0, 0)] + lambda2, jjt[(0, 1)], jjt[(1, 0)], jjt[(1, 1)] + lambda2);
        let y = m.try_inverse().ok_or(Error::IkDiverged { residual })? * e;
        let dq = j.transpose() * nalgebra::DVector::from_column_slice(y.as_slice());
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi += d;
        }
        arm.clamp(&mut q);
    }
    let p = arm.forward_kinematics(&q);
    residual = residual.min((target[0] - p[0]).hypot(target[1] - p[1]));
    if residual <= IK_FAIL {
        Ok(q)
    } else {
        Err(Error::IkDiverged { residual })
    }
}

/// Output of [`track_with_manipulability`].
#[derive(Debug, Clone)]
pub struct TrackingRun {
    pub times: Vec<f64>,
    pub joints: Vec<Vec<f64>>,
    pub positions: Vec<[f64; 2]>,
    pub manipulability: ManifoldTrajectory,
    /// Stein cost between achieved and desired manipulability per sample.
    pub costs: Vec<f64>,
    pub position_errors: Vec<f64>,
}

impl TrackingRun {
    pub fn mean_cost(&self) -> f64 {
        self.costs.iter().sum::<f64>() / self.costs.len() as f64
    }

    pub fn final_error(&self) -> f64 {
        *self.position_errors.last().unwrap_or(&0.0)
    }
}

fn manip_cost(arm: &PlanarArm, q: &[f64], desired: &DMatrix<f64>) -> Result<f64> {
    let ups = manipulability(&arm.jacobian(q));
    stein_cost_matrices(&from_row_major(ups.data(), 2), desired)
}

/// Central-difference gradient of `q ↦ g(Υ(q), desired)`.
pub fn manipulability_cost_gradient(arm: &PlanarArm, q: &[f64], desired: &ManifoldPoint) -> Result<Vec<f64>> {
    let des = from_row_major(desired.data(), 2);
    let mut qq = q.to_vec();
    (0..q.len())
        .map(|i| {
            qq[i] = q[i] + GRADIENT_STEP;
            let up = manip_cost(arm, &qq, &des)?;
            qq[i] = q[i] - GRADIENT_STEP;
            let down = manip_cost(arm, &qq, &des)?;
            qq[i] = q[i];
            Ok((up - down) / (2.0 * GRADIENT_STEP))
        })
        .collect()
}

/// Joint velocity `J^† ṗ − (I − J^† J) α ∇g`.
pub fn tracking_velocity(
    arm: &PlanarArm,
    q: &[f64],
    p_dot: [f64; 2],
    desired: &ManifoldPoint,
    alpha: f64,
) -> Result<Vec<f64>> {
    let j = arm.jacobian(q);
    let pinv = pseudo_inverse(&j);
    let mut qd = &pinv * nalgebra::DVector::from_column_slice(&p_dot);
    if alpha != 0.0 {
        let grad = nalgebra::DVector::from_vec(manipulability_cost_gradient(arm, q, desired)?);
        let n = arm.dof();
        let proj = DMatrix::identity(n, n) - &pinv * &j;
        qd -= proj * grad * alpha;
    }
    Ok(qd.iter().copied().collect())
}

/// Velocity-level tracking of `p_des` with a null-space pull toward
/// `ups_des`. The commanded task velocity closes the loop on position:
/// `ṗ = (p_des[k+1] − p(q_k)) / δt`.
pub fn track_with_manipulability(
    arm: &PlanarArm,
    p_des: &PlanarTrajectory,
    ups_des: &ManifoldTrajectory,
    alpha: f64,
    q0: &[f64],
) -> Result<TrackingRun> {
    let n = arm.dof();
    if n <= 2 {
        return Err(Error::InvalidArgument(format!("tracking needs a redundant arm, got {n} joints")));
    }
    if q0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q0.len() });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {alpha}")));
    }
    if ups_des.descriptor() != &ManifoldDescriptor::Spd(2) {
        return Err(Error::DescriptorMismatch { expected: "spd:2".into(), found: ups_des.descriptor().to_string() });
    }
    if ups_des.len() != p_des.len() {
        return Err(Error::DimensionMismatch { expected: p_des.len(), found: ups_des.len() });
    }
    if p_des.len() < 2 {
        return Err(Error::TooShort { len: p_des.len(), min: 2 });
    }
    let samples = p_des.samples();
    for s in samples {
        arm.check_reachable(s.p)?;
    }
    let p0 = arm.forward_kinematics(q0);
    let e0 = (p0[0] - samples[0].p[0]).hypot(p0[1] - samples[0].p[1]);
    if e0 > 1e-3 {
        return Err(Error::InvalidArgument(format!("initial configuration is {e0} m from the path start")));
    }

    let times = p_des.times();
    let mut q = q0.to_vec();
    let mut joints = Vec::with_capacity(samples.len());
    let mut positions = Vec::with_capacity(samples.len());
    let mut achieved = Vec::with_capacity(samples.len());
    let mut costs = Vec::with_capacity(samples.len());
    let mut errors = Vec::with_capacity(samples.len());
    for k in 0..samples.len() {
        let p = arm.forward_kinematics(&q);
        let ups = manipulability(&arm.jacobian(&q));
        costs.push(stein_cost(&ups, &ups_des.points()[k])?);
        errors.push((p[0] - samples[k].p[0]).hypot(p[1] - samples[k].p[1]));
        positions.push(p);
        achieved.push(ups);
        joints.push(q.clone());
        if k + 1 == samples.len() {
            break;
        }
        let dt = times[k + 1] - times[k];
        let target = samples[k + 1].p;
        let p_dot = [(target[0] - p[0]) / dt, (target[1] - p[1]) / dt];
        let qd = tracking_velocity(arm, &q, p_dot, &ups_des.points()[k + 1], alpha)?;
        for (qi, v) in q.iter_mut().zip(&qd) {
            *qi += v * dt;
        }
        arm.clamp(&mut q);
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::IkDiverged { residual: f64::INFINITY });
        }
    }
    Ok(TrackingRun {
        manipulability: ManifoldTrajectory::new(ManifoldDescriptor::Spd(2), times.clone(), achieved)?,
        times,
        joints,
        positions,
        costs,
        position_errors: errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsdState {
    pub p: [f64; 2],
    pub v: [f64; 2],
    pub mass: f64,
}

impl MsdState {
    pub fn at_rest(p: [f64; 2], mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
        }
        Ok(MsdState { p, v: [0.0, 0.0], mass })
    }
}

fn check_spd_gain(name: &str, m: &Matrix2<f64>) -> Result<()> {
    let sym = (m - m.transpose()).abs().max();
    if !(sym <= 1e-9 * m.abs().max().max(1.0)) {
        return Err(Error::NonSpdGain(format!("{name} is not symmetric")));
    }
    if nalgebra::Cholesky::new(*m).is_none() {
        return Err(Error::NonSpdGain(format!("{name} is not positive definite")));
    }
    Ok(())
}

/// `D = 2 (m K)^{1/2}`, critical damping along each principal axis of `K`.
pub fn critical_damping(k: &Matrix2<f64>, mass: f64) -> Matrix2<f64> {
    let eig = SymmetricEigen::new(*k * mass);
    let s = eig.eigenvalues.map(|l| 2.0 * l.max(0.0).sqrt());
    eig.eigenvectors * Matrix2::from_diagonal(&s) * eig.eigenvectors.transpose()
}

/// One semi-implicit Euler step under `f = K(p_des − p) + D(v_des − v)`.
/// Returns the new state and the spring force `K(p_des − p)` before the step.
pub fn msd_step(
    state: &MsdState,
    k: &Matrix2<f64>,
    d: &Matrix2<f64>,
    p_des: [f64; 2],
    v_des: [f64; 2],
    dt: f64,
) -> Result<(MsdState, [f64; 2])> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    check_spd_gain("K", k)?;
    check_spd_gain("D", d)?;
    let p = Vector2::from(state.p);
    let v = Vector2::from(state.v);
    let spring = k * (Vector2::from(p_des) - p);
    let f = spring + d * (Vector2::from(v_des) - v);
    let v_new = v + f / state.mass * dt;
    let p_new = p + v_new * dt;
    Ok((
        MsdState { p: [p_new[0], p_new[1]], v: [v_new[0], v_new[1]], mass: state.mass },
        [spring[0], spring[1]],
    ))
}

/// Output of [`simulate_msd`].
#[derive(Debug, Clone)]
pub struct MsdRun {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub forces: Vec<[f64; 2]>,
    pub errors: Vec<f64>,
}

impl MsdRun {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().unwrap_or(&0.0)
    }
}

/// Drives a mass-spring-damper along a reference with per-sample stiffness
/// and critical damping. `reference` holds `(p_des, v_des)` per sample.
pub fn simulate_msd(
    times: &[f64],
    reference: &[([f64; 2], [f64; 2])],
    stiffness: &ManifoldTrajectory,
    mass: f64,
    start: [f64; 2],
) -> Result<MsdRun> {
    if stiffness.descriptor() != &ManifoldDescriptor::Spd(2) {
        return Err(Error::DescriptorMismatch { expected: "spd:2".into(), found: stiffness.descriptor().to_string() });
    }
    if reference.len() != times.len() || stiffness.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: reference.len().min(stiffness.len()) });
    }
    let mut state = MsdState::at_rest(start, mass)?;
    let mut run = MsdRun { times: times.to_vec(), positions: vec![], velocities: vec![], forces: vec![], errors: vec![] };
    for (l, &(p_des, v_des)) in reference.iter().enumerate() {
        let k = Matrix2::from_row_slice(stiffness.points()[l].data());
        let d = critical_damping(&k, mass);
        let spring = k * (Vector2::from(p_des) - Vector2::from(state.p));
        run.positions.push(state.p);
        run.velocities.push(state.v);
        run.forces.push([spring[0], spring[1]]);
        run.errors.push((state.p[0] - p_des[0]).hypot(state.p[1] - p_des[1]));
        if l + 1 < times.len() {
            state = msd_step(&state, &k, &d, p_des, v_des, times[l + 1] - times[l])?.0;
        }
    }
    Ok(run)
}

/// Per-run summary written next to simulation traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub final_error: f64,
    pub mean_cost: Option<f64>,
    pub steps: usize,
    pub dt: f64,
}

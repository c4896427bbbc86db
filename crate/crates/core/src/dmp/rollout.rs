use nalgebra::DMatrix;

use super::{BasisSet, DmpGains, GaDmpModel, ManifoldTrajectory};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::manifold::{ManifoldDescriptor, ManifoldPoint};

/// Lower bound on the phase during integration.
pub const PHASE_FLOOR: f64 = 1e-10;

/// Integrator state. `z` is the scaled velocity in tangent coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutState {
    pub y: ManifoldPoint,
    pub z: Vec<f64>,
    pub x: f64,
    /// Live goal; moved by goal switching.
    pub goal: ManifoldPoint,
    pub t: f64,
}

impl RolloutState {
    /// At rest at `y`, phase 1, aiming at the model's goal.
    pub fn at_rest(model: &GaDmpModel, y: ManifoldPoint) -> Self {
        RolloutState {
            y,
            z: vec![0.0; model.descriptor.tangent_dim()],
            x: 1.0,
            goal: model.goal.clone(),
            t: 0.0,
        }
    }
}

/// One semi-implicit Euler step: `z` first from the current point, then the
/// point along the new `z`; the phase uses its exact exponential decay.
pub fn rollout_step(state: &RolloutState, model: &GaDmpModel, dt: f64) -> Result<RolloutState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let mut z = state.z.clone();
    let y = step_raw(model, state.y.data(), &mut z, state.x, state.goal.data(), dt)?;
    Ok(RolloutState {
        y: ManifoldPoint::new_unchecked(model.descriptor.clone(), y),
        z,
        x: advance_phase(state.x, &model.gains, dt),
        goal: state.goal.clone(),
        t: state.t + dt,
    })
}

fn advance_phase(x: f64, gains: &DmpGains, dt: f64) -> f64 {
    (x * (-gains.alpha_x * dt / gains.tau).exp()).max(PHASE_FLOOR)
}

fn step_raw(model: &GaDmpModel, y: &[f64], z: &mut [f64], x: f64, goal: &[f64], dt: f64) -> Result<Vec<f64>> {
    let g = &model.gains;
    let d = &model.descriptor;
    let to_goal = d.log(y, goal)?;
    let forcing = model.forcing(x);
    for j in 0..z.len() {
        let zdot = (g.alpha_z * (g.beta_z * to_goal[j] - z[j]) + forcing[j]) / g.tau;
        z[j] += zdot * dt;
    }
    let v: Vec<f64> = z.iter().map(|zj| zj * dt / g.tau).collect();
    d.exp(y, &v)
}

/// `G ← Exp_G((α_g/τ) Log_G(G_new) δt)`.
pub fn goal_switch_step(
    current: &ManifoldPoint,
    target: &ManifoldPoint,
    gains: &DmpGains,
    dt: f64,
) -> Result<ManifoldPoint> {
    let d = current.descriptor();
    if d != target.descriptor() {
        return Err(Error::DescriptorMismatch { expected: d.to_string(), found: target.descriptor().to_string() });
    }
    let data = goal_step_raw(d, current.data(), target.data(), gains, dt)?;
    Ok(ManifoldPoint::new_unchecked(d.clone(), data))
}

fn goal_step_raw(d: &ManifoldDescriptor, g: &[f64], target: &[f64], gains: &DmpGains, dt: f64) -> Result<Vec<f64>> {
    let rate = gains.alpha_g / gains.tau * dt;
    let v: Vec<f64> = d.log(g, target)?.into_iter().map(|x| x * rate).collect();
    d.exp(g, &v)
}

/// `dist²(Y, G) + ‖z‖² / (α_z β_z)`, measured against the live goal.
pub fn lyapunov_value(state: &RolloutState, model: &GaDmpModel) -> Result<f64> {
    let dist = model.descriptor.dist(state.y.data(), state.goal.data())?;
    Ok(dist * dist + dot(&state.z, &state.z) / (model.gains.alpha_z * model.gains.beta_z))
}

/// A goal change scheduled at `time` (seconds since the rollout started).
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSwitch {
    pub time: f64,
    pub goal: ManifoldPoint,
}

/// Output of [`rollout`].
#[derive(Debug, Clone)]
pub struct Rollout {
    pub trajectory: ManifoldTrajectory,
    /// Tangent velocity `z / τ` per sample.
    pub velocities: Vec<Vec<f64>>,
    /// Live goal per sample.
    pub goals: Vec<ManifoldPoint>,
    pub phases: Vec<f64>,
    /// Where the live goal is heading at the end: the last scheduled goal,
    /// or the model goal when nothing was scheduled.
    pub target: ManifoldPoint,
}

impl Rollout {
    pub fn final_point(&self) -> &ManifoldPoint {
        self.trajectory.last().expect("rollouts hold at least one sample")
    }

    pub fn final_distance(&self) -> Result<f64> {
        self.trajectory
            .descriptor()
            .dist(self.final_point().data(), self.target.data())
    }
}

/// Integrates the primitive from rest at `start` for `duration` seconds,
/// producing `⌈duration/dt⌉ + 1` samples.
///
/// Each schedule entry becomes the goal-switch target once the rollout time
/// reaches it; from then on the live goal flows toward it every step.
pub fn rollout(
    model: &GaDmpModel,
    start: &ManifoldPoint,
    duration: f64,
    dt: f64,
    schedule: &[GoalSwitch],
) -> Result<Rollout> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    if schedule.windows(2).any(|w| w[1].time < w[0].time) {
        return Err(Error::InvalidArgument("goal switch times must be sorted".into()));
    }
    let d = &model.descriptor;
    for p in std::iter::once(start).chain(schedule.iter().map(|s| &s.goal)) {
        if p.descriptor() != d {
            return Err(Error::DescriptorMismatch { expected: d.to_string(), found: p.descriptor().to_string() });
        }
    }
    let steps = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
    step_many(model, start, std::iter::repeat_n(dt, steps), schedule)
}

/// Integrates on the timestamps of `reference`, one step per interval, so
/// that the result can be compared sample by sample with a demonstration.
pub fn reproduce(model: &GaDmpModel, reference: &ManifoldTrajectory) -> Result<ManifoldTrajectory> {
    let start = reference.first().ok_or(Error::TooShort { len: 0, min: 1 })?;
    let dts: Vec<f64> = reference.times().windows(2).map(|w| w[1] - w[0]).collect();
    let out = step_many(model, start, dts.into_iter(), &[])?;
    let t0 = reference.times()[0];
    let times = out.trajectory.times().iter().map(|t| t + t0).collect();
    ManifoldTrajectory::new(reference.descriptor().clone(), times, out.trajectory.points().to_vec())
}

fn step_many(
    model: &GaDmpModel,
    start: &ManifoldPoint,
    dts: impl Iterator<Item = f64>,
    schedule: &[GoalSwitch],
) -> Result<Rollout> {
    let d = model.descriptor.clone();
    let g = &model.gains;
    let mut y = start.data().to_vec();
    let mut z = vec![0.0; d.tangent_dim()];
    let mut x = 1.0;
    let mut t = 0.0;
    let mut goal = model.goal.data().to_vec();
    let mut target: Option<&ManifoldPoint> = None;
    let mut next_switch = 0;

    let mut times = vec![0.0];
    let mut points = vec![start.clone()];
    let mut velocities = vec![z.clone()];
    let mut goals = vec![model.goal.clone()];
    let mut phases = vec![x];

    for dt in dts {
        while next_switch < schedule.len() && schedule[next_switch].time <= t + 1e-12 {
            target = Some(&schedule[next_switch].goal);
            next_switch += 1;
        }
        y = step_raw(model, &y, &mut z, x, &goal, dt)?;
        x = advance_phase(x, g, dt);
        if let Some(target) = target {
            goal = goal_step_raw(&d, &goal, target.data(), g, dt)?;
        }
        t += dt;
        times.push(t);
        points.push(ManifoldPoint::new_unchecked(d.clone(), y.clone()));
        velocities.push(z.iter().map(|v| v / g.tau).collect());
        goals.push(ManifoldPoint::new_unchecked(d.clone(), goal.clone()));
        phases.push(x);
    }
    let target = schedule.last().map(|s| s.goal.clone()).unwrap_or_else(|| model.goal.clone());
    Ok(Rollout {
        trajectory: ManifoldTrajectory::new(d, times, points)?,
        velocities,
        goals,
        phases,
        target,
    })
}

/// Stacks primitives that share gains and basis into one primitive on the
/// product manifold. Its rollout is the concatenation of the parts' rollouts.
pub fn composite_model(parts: &[GaDmpModel]) -> Result<GaDmpModel> {
    let first = parts.first().ok_or(Error::EmptyProduct)?;
    if parts.iter().any(|p| p.gains != first.gains) {
        return Err(Error::GainMismatch);
    }
    if parts.iter().any(|p| p.basis != first.basis) {
        return Err(Error::BasisMismatch);
    }
    let descriptor = ManifoldDescriptor::product(parts.iter().map(|p| p.descriptor.clone()).collect())?;
    let rows: usize = parts.iter().map(|p| p.weights.nrows()).sum();
    let n = first.basis.len();
    let mut weights = DMatrix::zeros(rows, n);
    let mut r = 0;
    for p in parts {
        weights.rows_mut(r, p.weights.nrows()).copy_from(&p.weights);
        r += p.weights.nrows();
    }
    let start = ManifoldPoint::stack(&parts.iter().map(|p| p.start.clone()).collect::<Vec<_>>())?;
    let goal = ManifoldPoint::stack(&parts.iter().map(|p| p.goal.clone()).collect::<Vec<_>>())?;
    Ok(GaDmpModel {
        descriptor,
        gains: first.gains,
        basis: BasisSet::clone(&first.basis),
        weights,
        start,
        goal,
        scaling: parts.iter().flat_map(|p| p.scaling.iter().copied()).collect(),
        scaling_mask: parts.iter().flat_map(|p| p.scaling_mask.iter().copied()).collect(),
    })
}

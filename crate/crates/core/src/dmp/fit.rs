use nalgebra::DMatrix;

use super::{canonical_phase, BasisSet, DmpGains, GaDmpModel, ManifoldTrajectory};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;

/// Ridge penalty of the default weight solve.
pub const RIDGE_LAMBDA: f64 = 1e-8;

/// Scaling entries below this fraction of the largest one are masked.
const SCALING_REL_MIN: f64 = 1e-6;
/// Start-goal offsets below this norm count as zero.
const SCALING_ABS_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSolver {
    /// One global regularised least-squares problem over all samples.
    Ridge { lambda: f64 },
    /// Independent weighted regression per basis function.
    LocallyWeighted,
}

impl Default for WeightSolver {
    fn default() -> Self {
        WeightSolver::Ridge { lambda: RIDGE_LAMBDA }
    }
}

/// First and second time derivatives of a demonstration in tangent
/// coordinates, by backward differences. The first sample of each is zero.
pub fn estimate_derivatives(traj: &ManifoldTrajectory) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if traj.len() < 3 {
        return Err(Error::TooShort { len: traj.len(), min: 3 });
    }
    let d = traj.descriptor();
    let k = d.tangent_dim();
    let t = traj.times();
    let pts = traj.points();
    let mut vel = vec![vec![0.0; k]];
    for l in 1..pts.len() {
        let dt = t[l] - t[l - 1];
        let v = d.log(pts[l - 1].data(), pts[l].data())?;
        vel.push(v.into_iter().map(|x| x / dt).collect());
    }
    let mut acc = vec![vec![0.0; k]];
    for l in 1..pts.len() {
        let dt = t[l] - t[l - 1];
        acc.push(vel[l].iter().zip(&vel[l - 1]).map(|(a, b)| (a - b) / dt).collect());
    }
    Ok((vel, acc))
}

/// Learns a primitive from one demonstration with the default ridge solver.
///
/// `goal` defaults to the last sample. The motion duration is taken from
/// `gains.tau`.
pub fn fit(
    traj: &ManifoldTrajectory,
    goal: Option<&ManifoldPoint>,
    gains: &DmpGains,
    n_basis: usize,
) -> Result<GaDmpModel> {
    fit_with(traj, goal, gains, n_basis, WeightSolver::default())
}

pub fn fit_with(
    traj: &ManifoldTrajectory,
    goal: Option<&ManifoldPoint>,
    gains: &DmpGains,
    n_basis: usize,
    solver: WeightSolver,
) -> Result<GaDmpModel> {
    gains.validate()?;
    let basis = BasisSet::new(n_basis, gains.alpha_x)?;
    if traj.len() < 3 {
        return Err(Error::TooShort { len: traj.len(), min: 3 });
    }
    let desc = traj.descriptor().clone();
    let start = traj.first().expect("length checked").clone();
    let goal = goal.cloned().unwrap_or_else(|| traj.last().expect("length checked").clone());
    if goal.descriptor() != &desc {
        return Err(Error::DescriptorMismatch {
            expected: desc.to_string(),
            found: goal.descriptor().to_string(),
        });
    }

    let (scaling, scaling_mask) = start_goal_scaling(&desc.log(start.data(), goal.data())?);
    let (phases, raw) = forcing_targets(traj, &goal, gains)?;
    let mut features = DMatrix::zeros(traj.len(), n_basis);
    let mut targets = DMatrix::zeros(traj.len(), desc.tangent_dim());
    for (l, (x, f)) in phases.iter().zip(&raw).enumerate() {
        for (i, v) in basis.features(*x).into_iter().enumerate() {
            features[(l, i)] = v;
        }
        for (j, v) in f.iter().enumerate() {
            targets[(l, j)] = v / scaling[j];
        }
    }

    let weights = match solver {
        WeightSolver::Ridge { lambda } => solve_ridge(&features, &targets, lambda)?,
        WeightSolver::LocallyWeighted => solve_lwr(&basis, &phases, &targets),
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::SingularScaling);
    }

    Ok(GaDmpModel {
        descriptor: desc,
        gains: *gains,
        basis,
        weights,
        start,
        goal,
        scaling,
        scaling_mask,
    })
}

/// Phases `x_l` and unscaled forcing targets
/// `τ² ÿ_l − α_z (β_z Log_{Y_l}(G) − τ ẏ_l)` of a demonstration.
pub fn forcing_targets(
    traj: &ManifoldTrajectory,
    goal: &ManifoldPoint,
    gains: &DmpGains,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (vel, acc) = estimate_derivatives(traj)?;
    let desc = traj.descriptor();
    let t0 = traj.times()[0];
    let tau = gains.tau;
    let mut phases = Vec::with_capacity(traj.len());
    let mut targets = Vec::with_capacity(traj.len());
    for (l, y) in traj.points().iter().enumerate() {
        phases.push(canonical_phase(traj.times()[l] - t0, gains));
        let to_goal = desc.log(y.data(), goal.data())?;
        targets.push(
            (0..to_goal.len())
                .map(|j| tau * tau * acc[l][j] - gains.alpha_z * (gains.beta_z * to_goal[j] - tau * vel[l][j]))
                .collect(),
        );
    }
    Ok((phases, targets))
}

/// `d = Log_{Y_1}(G)`, with near-zero entries replaced by 1 and flagged.
fn start_goal_scaling(d: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let top = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = SCALING_REL_MIN * top;
    d.iter()
        .map(|&v| if top < SCALING_ABS_MIN || v.abs() < floor { (1.0, true) } else { (v, false) })
        .unzip()
}

/// `W = Fᵀ Φ (ΦᵀΦ + λI)⁻¹`.
fn solve_ridge(features: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let n = features.ncols();
    let gram = features.transpose() * features + DMatrix::identity(n, n) * lambda;
    let rhs = features.transpose() * targets;
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::SingularScaling)?;
    Ok(chol.solve(&rhs).transpose())
}

fn solve_lwr(basis: &BasisSet, phases: &[f64], targets: &DMatrix<f64>) -> DMatrix<f64> {
    let k = targets.ncols();
    let mut w = DMatrix::zeros(k, basis.len());
    let acts: Vec<Vec<f64>> = phases.iter().map(|&x| basis.activations(x)).collect();
    for i in 0..basis.len() {
        let den: f64 = phases.iter().zip(&acts).map(|(x, a)| a[i] * x * x).sum();
        for j in 0..k {
            let num: f64 = phases
                .iter()
                .zip(&acts)
                .enumerate()
                .map(|(l, (x, a))| a[i] * x * targets[(l, j)])
                .sum();
            w[(j, i)] = if den > 0.0 { num / den } else { 0.0 };
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{exp_map, ManifoldDescriptor};

    fn line(n: usize, dt: f64, v: f64) -> ManifoldTrajectory {
        let d = ManifoldDescriptor::Euclidean(1);
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let rows = times.iter().map(|t| vec![v * t]).collect();
        ManifoldTrajectory::from_raw(d, times, rows).unwrap()
    }

    #[test]
    fn derivatives_of_a_line() {
        let (vel, acc) = estimate_derivatives(&line(20, 0.1, 2.5)).unwrap();
        assert_eq!(vel[0], vec![0.0]);
        for l in 1..20 {
            assert!((vel[l][0] - 2.5).abs() < 1e-12);
        }
        for a in &acc[2..] {
            assert!(a[0].abs() < 1e-9);
        }
    }

    #[test]
    fn derivatives_of_a_constant() {
        let d = ManifoldDescriptor::UnitQuaternion;
        let q = vec![0.5, 0.5, 0.5, 0.5];
        let t = ManifoldTrajectory::from_raw(d, vec![0.0, 0.1, 0.3, 0.4], vec![q; 4]).unwrap();
        let (vel, acc) = estimate_derivatives(&t).unwrap();
        assert!(vel.iter().chain(&acc).flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn derivatives_on_a_great_circle() {
        let d = ManifoldDescriptor::Sphere(2);
        let base = ManifoldPoint::new(d.clone(), vec![0.0, 0.0, 1.0]).unwrap();
        let dt = 1e-3;
        let speed = 0.8;
        let times: Vec<f64> = (0..500).map(|i| i as f64 * dt).collect();
        let pts = times
            .iter()
            .map(|t| exp_map(&base, &[speed * t, 0.0, 0.0]).unwrap())
            .collect();
        let traj = ManifoldTrajectory::new(d, times, pts).unwrap();
        let (vel, _) = estimate_derivatives(&traj).unwrap();
        for v in &vel[1..] {
            assert!((crate::linalg::norm(v) - speed).abs() < 1e-6);
        }
    }

    #[test]
    fn too_short() {
        assert!(matches!(estimate_derivatives(&line(2, 0.1, 1.0)), Err(Error::TooShort { .. })));
    }

    #[test]
    fn demonstration_at_goal_learns_nothing() {
        let d = ManifoldDescriptor::Spd(2);
        let k = vec![3.0, 0.5, 0.5, 2.0];
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
        let t = ManifoldTrajectory::from_raw(d, times, vec![k; 50]).unwrap();
        let m = fit(&t, None, &DmpGains::new(25.0, 1.0).unwrap(), 20).unwrap();
        assert!(m.weights.norm() < 1e-6, "{}", m.weights.norm());
        assert!(m.scaling_mask.iter().all(|&b| b));
    }

    #[test]
    fn scaling_mask_rule() {
        let (d, mask) = start_goal_scaling(&[2.0, 1e-9, -0.5]);
        assert_eq!(d, vec![2.0, 1.0, -0.5]);
        assert_eq!(mask, vec![false, true, false]);
        let (d, mask) = start_goal_scaling(&[0.0, 1e-16]);
        assert_eq!(d, vec![1.0, 1.0]);
        assert_eq!(mask, vec![true, true]);
    }
}

use std::f64::consts::PI;
use std::path::Path;

use gadmp::datasets::{self, LiftConfig, PlanarTrajectory};
use gadmp::dmp::{self, DmpGains, GaDmpModel, GoalSwitch, ManifoldTrajectory, Rollout, WeightSolver};
use gadmp::io;
use gadmp::manifold::{ManifoldDescriptor, ManifoldPoint};
use gadmp::plot::{self, LineChart};
use gadmp::sim::{self, EllipsoidForm, PlanarArm, SimSummary};
use gadmp::{Error, Result};

use crate::parse;
use crate::{Ellipsoid, EvalArgs, GenDatasetArgs, RolloutArgs, RunArgs, SimArgs, SimMode, Solver, TrainArgs};

const QUAT_START: [f64; 4] = [-0.0092, -0.7126, 0.7015, 0.0090];
const QUAT_GOAL: [f64; 4] = [0.8104, 0.3364, 0.2141, 0.4293];
const STIFFNESS_START: [f64; 4] = [622.9934, 39.9577, 39.9577, 79.5444];
const LINE_END: [f64; 2] = [0.3, 0.2];
const TEACHER_LINKS: [f64; 3] = [1.0, 1.0, 1.0];
/// Point files within this distance of the manifold are projected onto it.
const POINT_TOL: f64 = 1e-4;

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn composite() -> ManifoldDescriptor {
    ManifoldDescriptor::Product(vec![ManifoldDescriptor::Euclidean(2), ManifoldDescriptor::Spd(2)].into())
}

fn samples_for(tau: f64, dt: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("need positive tau and dt, got {tau} and {dt}")));
    }
    Ok((tau / dt).round() as usize + 1)
}

fn unit_quat(q: [f64; 4]) -> Result<ManifoldPoint> {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    ManifoldPoint::new(ManifoldDescriptor::UnitQuaternion, q.iter().map(|x| x / n).collect())
}

fn stack_rows(positions: &[[f64; 2]], second: &ManifoldTrajectory) -> Result<ManifoldTrajectory> {
    let points = positions
        .iter()
        .zip(second.points())
        .map(|(p, s)| {
            let e = ManifoldPoint::new(ManifoldDescriptor::Euclidean(2), p.to_vec())?;
            ManifoldPoint::stack(&[e, s.clone()])
        })
        .collect::<Result<Vec<_>>>()?;
    ManifoldTrajectory::new(composite(), second.times().to_vec(), points)
}

fn quat_demo(tau: f64, dt: f64) -> Result<ManifoldTrajectory> {
    datasets::min_jerk_geodesic(&unit_quat(QUAT_START)?, &unit_quat(QUAT_GOAL)?, tau, samples_for(tau, dt)?)
}

fn stiffness_demo(tau: f64, dt: f64) -> Result<ManifoldTrajectory> {
    let n = samples_for(tau, dt)?;
    let step = tau / (n - 1) as f64;
    let k0 = ManifoldPoint::new(ManifoldDescriptor::Spd(2), STIFFNESS_START.to_vec())?;
    let stiffness = datasets::rotating_stiffness_profile(&k0, PI / 2.0, n, step)?;
    let p0 = ManifoldPoint::new(ManifoldDescriptor::Euclidean(2), vec![0.0, 0.0])?;
    let p1 = ManifoldPoint::new(ManifoldDescriptor::Euclidean(2), LINE_END.to_vec())?;
    let line = datasets::min_jerk_geodesic(&p0, &p1, tau, n)?;
    let positions: Vec<[f64; 2]> = line.points().iter().map(|p| [p.data()[0], p.data()[1]]).collect();
    stack_rows(&positions, &stiffness)
}

/// S-shape scaled into the workspace of a 3-link arm, with the arm's
/// manipulability along an inverse-kinematics track.
fn manipulability_demo(form: Ellipsoid) -> Result<ManifoldTrajectory> {
    let path = datasets::fixture("sshape")?.transformed(0.02, [1.0, -0.45]);
    let teacher = PlanarArm::new(TEACHER_LINKS.to_vec())?;
    let (joints, profile) = datasets::manipulability_profile(&teacher, &path, &[0.0, 0.8, 0.8])?;
    let profile = match form {
        Ellipsoid::Inverse => profile,
        Ellipsoid::Direct => {
            let points = joints
                .iter()
                .map(|q| sim::manipulability_with(&teacher.jacobian(q), EllipsoidForm::Direct))
                .collect();
            ManifoldTrajectory::new(ManifoldDescriptor::Spd(2), path.times(), points)?
        }
    };
    stack_rows(&path.positions(), &profile)
}

fn lift_planar(planar: &PlanarTrajectory, a: &GenDatasetArgs) -> Result<ManifoldTrajectory> {
    let target = parse::descriptor(&a.manifold)?;
    if target == ManifoldDescriptor::Euclidean(2) {
        let scaled = match a.scale {
            Some(s) => planar.transformed(s, [0.0, 0.0]),
            None => planar.clone(),
        };
        return scaled.to_manifold();
    }
    let curve = datasets::add_z_axis(planar);
    let mut cfg = LiftConfig::for_curve(target, &curve)?;
    if let Some(s) = a.scale {
        cfg.scale = s;
    }
    datasets::lift_to_manifold(&planar.times(), &curve, &cfg)
}

fn write_chart(out: &Path, traj: &ManifoldTrajectory, title: &str) -> Result<()> {
    write_text(&parse::sibling(out, ".svg"), &plot::trajectory_chart(traj, title).to_svg())
}

pub fn gen_dataset(a: &GenDatasetArgs) -> Result<()> {
    let traj = match (&a.fixture, &a.input) {
        (Some(name), None) => match name.as_str() {
            "quat-demo" => quat_demo(a.tau.unwrap_or(1.0), a.dt)?,
            "stiffness" => stiffness_demo(a.tau.unwrap_or(2.0), a.dt)?,
            "manipulability" => manipulability_demo(a.ellipsoid)?,
            letter => lift_planar(&datasets::fixture(letter)?, a)?,
        },
        (None, Some(path)) => lift_planar(&io::read_planar_csv(path)?, a)?,
        _ => return Err(Error::InvalidArgument("pass one of --fixture or --input".into())),
    };
    io::write_trajectory(&a.out, &traj)?;
    if a.plot {
        write_chart(&a.out, &traj, &format!("dataset on {}", traj.descriptor()))?;
    }
    println!("manifold={}", traj.descriptor());
    println!("samples={}", traj.len());
    println!("geodesic_length={}", traj.geodesic_length()?);
    Ok(())
}

fn optional_descriptor(s: &Option<String>) -> Result<Option<ManifoldDescriptor>> {
    s.as_deref().map(parse::descriptor).transpose()
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let d = optional_descriptor(&a.manifold)?;
    let demo = io::read_trajectory(&a.input, d.as_ref())?;
    let g = &a.gains;
    let gains = DmpGains {
        alpha_z: g.alpha_z,
        beta_z: g.beta_z.unwrap_or(g.alpha_z / 4.0),
        alpha_x: g.alpha_x,
        alpha_g: g.alpha_g.unwrap_or(g.alpha_z / 2.0),
        tau: a.tau.unwrap_or_else(|| demo.duration()),
    };
    gains.validate()?;
    let goal = a.goal.as_deref().map(|p| io::read_point_near(p, demo.descriptor(), POINT_TOL)).transpose()?;
    let solver = match a.solver {
        Solver::Ridge => WeightSolver::default(),
        Solver::Lwr => WeightSolver::LocallyWeighted,
    };
    let model = dmp::fit_with(&demo, goal.as_ref(), &gains, a.n_basis, solver)?;
    let repro = dmp::reproduce(&model, &demo)?;
    let rms = dmp::rms(&dmp::pointwise_distances(&demo, &repro)?);
    io::save_model(&a.out, &model)?;
    println!("fit_rms={rms}");
    println!("weights_norm={}", model.weights.norm());
    Ok(())
}

/// Applies gain overrides and the goal schedule, then integrates.
fn run_model(model: &mut GaDmpModel, r: &RunArgs) -> Result<Rollout> {
    if let Some(tau) = r.tau {
        model.gains.tau = tau;
    }
    if let Some(alpha_g) = r.alpha_g {
        model.gains.alpha_g = alpha_g;
    }
    model.gains.validate()?;
    let tau = model.gains.tau;
    let duration = match &r.duration {
        Some(s) => parse::time(s, tau)?,
        None => tau,
    };
    let schedule = r
        .goal_switch
        .iter()
        .map(|s| {
            let (time, path) = parse::goal_switch(s, tau)?;
            Ok(GoalSwitch { time, goal: io::read_point_near(&path, &model.descriptor, POINT_TOL)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let start = match &r.start {
        Some(p) => io::read_point_near(p, &model.descriptor, POINT_TOL)?,
        None => model.start.clone(),
    };
    dmp::rollout(model, &start, duration, r.dt, &schedule)
}

pub fn rollout(a: &RolloutArgs) -> Result<()> {
    let mut model = io::load_model(&a.model)?;
    let out = run_model(&mut model, &a.run)?;
    io::write_trajectory(&a.out, &out.trajectory)?;
    if a.plot {
        write_chart(&a.out, &out.trajectory, &format!("rollout on {}", model.descriptor))?;
    }
    println!("samples={}", out.trajectory.len());
    println!("final_dist={}", out.final_distance()?);
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let d = optional_descriptor(&a.manifold)?;
    let reference = io::read_trajectory(&a.reference, d.as_ref())?;
    let candidate = io::read_trajectory(&a.candidate, Some(reference.descriptor()))?;
    let dists = dmp::pointwise_distances(&reference, &candidate)?;
    let max = dists.iter().copied().fold(0.0, f64::max);
    let last = *dists.last().expect("trajectories are non-empty");
    println!("rms={}", dmp::rms(&dists));
    println!("max={max}");
    println!("final={last}");
    println!("path_length={}", reference.geodesic_length()?);
    // Quaternion error in the full-angle convention e_Q = 2 Log.
    let quat = reference.descriptor() == &ManifoldDescriptor::UnitQuaternion;
    if quat {
        println!("e_q_rms={}", 2.0 * dmp::rms(&dists));
        println!("e_q_max={}", 2.0 * max);
        println!("e_q_final={}", 2.0 * last);
    }
    if let Some(out) = &a.out {
        let mut header = vec!["t".to_string(), "dist".to_string()];
        if quat {
            header.push("e_q".into());
        }
        let rows: Vec<Vec<f64>> = reference
            .times()
            .iter()
            .zip(&dists)
            .map(|(t, e)| if quat { vec![*t, *e, 2.0 * e] } else { vec![*t, *e] })
            .collect();
        io::write_table(out, &header, &rows)?;
    }
    Ok(())
}

fn backward_velocities(times: &[f64], positions: &[[f64; 2]]) -> Vec<[f64; 2]> {
    (0..positions.len())
        .map(|l| {
            if l == 0 {
                return [0.0, 0.0];
            }
            let dt = times[l] - times[l - 1];
            [(positions[l][0] - positions[l - 1][0]) / dt, (positions[l][1] - positions[l - 1][1]) / dt]
        })
        .collect()
}

fn write_summary(out: &Path, summary: &SimSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&parse::sibling(out, ".summary.json"), &(text + "\n"))
}

fn add_ellipses(chart: &mut LineChart, spd: &ManifoldTrajectory) {
    let glyphs = plot::trajectory_chart(spd, "");
    chart.ellipses = glyphs.ellipses;
}

pub fn sim(a: &SimArgs) -> Result<()> {
    let traj = match (&a.model, &a.input) {
        (Some(path), _) => {
            let mut model = io::load_model(path)?;
            if model.descriptor != composite() {
                return Err(Error::DescriptorMismatch { expected: composite().to_string(), found: model.descriptor.to_string() });
            }
            run_model(&mut model, &a.run)?.trajectory
        }
        (None, Some(path)) => io::read_trajectory(path, Some(&composite()))?,
        (None, None) => return Err(Error::InvalidArgument("pass --model or --input".into())),
    };
    let parts = traj.components();
    let times = traj.times().to_vec();
    let positions: Vec<[f64; 2]> = parts[0].points().iter().map(|p| [p.data()[0], p.data()[1]]).collect();
    let dt = traj.uniform_dt().unwrap_or(traj.duration() / (traj.len().max(2) - 1) as f64);

    let summary = match a.mode {
        SimMode::Msd => {
            let velocities = backward_velocities(&times, &positions);
            let reference: Vec<([f64; 2], [f64; 2])> = positions.iter().copied().zip(velocities).collect();
            let run = sim::simulate_msd(&times, &reference, &parts[1], a.mass, positions[0])?;
            let header: Vec<String> = ["t", "x", "y", "vx", "vy", "fx", "fy", "x_des", "y_des", "error"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<f64>> = (0..times.len())
                .map(|l| {
                    let (p, v, f, d) = (run.positions[l], run.velocities[l], run.forces[l], positions[l]);
                    vec![times[l], p[0], p[1], v[0], v[1], f[0], f[1], d[0], d[1], run.errors[l]]
                })
                .collect();
            io::write_table(&a.out, &header, &rows)?;
            if a.plot {
                let mut chart = LineChart::new("mass-spring-damper tracking", times.clone());
                chart.add_series("x", run.positions.iter().map(|p| p[0]).collect());
                chart.add_series("y", run.positions.iter().map(|p| p[1]).collect());
                chart.add_series("x_des", positions.iter().map(|p| p[0]).collect());
                chart.add_series("y_des", positions.iter().map(|p| p[1]).collect());
                add_ellipses(&mut chart, &parts[1]);
                write_text(&parse::sibling(&a.out, ".svg"), &chart.to_svg())?;
            }
            SimSummary { final_error: run.final_error(), mean_cost: None, steps: times.len() - 1, dt }
        }
        SimMode::Manipulability => {
            let arm = PlanarArm::new(parse::floats(&a.links, "links")?)?;
            let p_des = PlanarTrajectory::from_positions(&times, &positions)?;
            let q0 = match &a.q0 {
                Some(s) => parse::floats(s, "q0")?,
                None => {
                    let guess: Vec<f64> = (0..arm.dof()).map(|i| if i == 0 { 0.2 } else { 0.3 }).collect();
                    sim::inverse_kinematics(&arm, positions[0], &guess)?
                }
            };
            let run = sim::track_with_manipulability(&arm, &p_des, &parts[1], a.alpha, &q0)?;
            let mut header = vec!["t".to_string()];
            header.extend((0..arm.dof()).map(|i| format!("q{i}")));
            header.extend(["x", "y", "x_des", "y_des", "error", "cost"].iter().map(|s| s.to_string()));
            let rows: Vec<Vec<f64>> = (0..times.len())
                .map(|l| {
                    let mut row = vec![times[l]];
                    row.extend(&run.joints[l]);
                    let (p, d) = (run.positions[l], positions[l]);
                    row.extend([p[0], p[1], d[0], d[1], run.position_errors[l], run.costs[l]]);
                    row
                })
                .collect();
            io::write_table(&a.out, &header, &rows)?;
            if a.plot {
                let mut chart = LineChart::new(format!("manipulability tracking, alpha = {}", a.alpha), times.clone());
                chart.add_series("stein cost", run.costs.clone());
                chart.add_series("position error", run.position_errors.clone());
                add_ellipses(&mut chart, &run.manipulability);
                write_text(&parse::sibling(&a.out, ".svg"), &chart.to_svg())?;
            }
            SimSummary { final_error: run.final_error(), mean_cost: Some(run.mean_cost()), steps: times.len() - 1, dt }
        }
    };
    write_summary(&a.out, &summary)?;
    println!("final_error={}", summary.final_error);
    if let Some(c) = summary.mean_cost {
        println!("mean_cost={c}");
    }
    println!("steps={}", summary.steps);
    Ok(())
}

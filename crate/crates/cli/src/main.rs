use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gadmp::{Error, ErrorKind};

mod commands;
mod parse;

/// Geometry-aware dynamic movement primitives.
#[derive(Debug, Parser)]
#[command(name = "gadmp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a demonstration trajectory built from a bundled dataset.
    GenDataset(GenDatasetArgs),
    /// Fit a primitive to a demonstration and save it as JSON.
    Train(TrainArgs),
    /// Integrate a saved primitive, optionally switching goals.
    Rollout(RolloutArgs),
    /// Compare two trajectories sample by sample.
    Eval(EvalArgs),
    /// Drive a planar simulation from a composite Cartesian + SPD(2) rollout.
    Sim(SimArgs),
}

/// Gains shared by the commands that build or run a primitive.
#[derive(Debug, Clone, Args)]
struct GainArgs {
    #[arg(long, default_value_t = 25.0)]
    alpha_z: f64,
    /// Defaults to alpha_z / 4.
    #[arg(long)]
    beta_z: Option<f64>,
    #[arg(long, default_value_t = gadmp::DmpGains::DEFAULT_ALPHA_X)]
    alpha_x: f64,
    /// Defaults to alpha_z / 2.
    #[arg(long)]
    alpha_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Ridge,
    Lwr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ellipsoid {
    /// (J Jᵀ)^†
    Inverse,
    /// J Jᵀ
    Direct,
}

#[derive(Debug, Args)]
struct GenDatasetArgs {
    /// gshape, sshape, wshape, jshape, quat-demo, stiffness or manipulability.
    #[arg(long, conflicts_with = "input")]
    fixture: Option<String>,
    /// Planar CSV with columns t,x,y[,vx,vy,ax,ay] to lift instead of a fixture.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Target manifold for letter shapes and planar inputs.
    #[arg(long, default_value = "euclidean:2")]
    manifold: String,
    /// Lift scale; defaults to keeping every sample well inside the chart.
    #[arg(long)]
    scale: Option<f64>,
    /// Duration of synthetic datasets in seconds.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Manipulability form for the manipulability dataset.
    #[arg(long, value_enum, default_value_t = Ellipsoid::Inverse)]
    ellipsoid: Ellipsoid,
    /// Also write an SVG chart next to the output.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    /// Descriptor of the input; read from the metadata sidecar when omitted.
    #[arg(long)]
    manifold: Option<String>,
    #[command(flatten)]
    gains: GainArgs,
    /// Defaults to the demonstration duration.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 60)]
    n_basis: usize,
    /// Goal point file; defaults to the last demonstration sample.
    #[arg(long)]
    goal: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Solver::Ridge)]
    solver: Solver,
    #[arg(long)]
    out: PathBuf,
}

/// Rollout controls shared by `rollout` and `sim`.
#[derive(Debug, Clone, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Seconds, or a multiple of tau such as `2tau`. Defaults to tau.
    #[arg(long)]
    duration: Option<String>,
    /// `t=<time>:goal=<point file>`; time in seconds or as `0.5tau`. Repeatable.
    #[arg(long)]
    goal_switch: Vec<String>,
    /// Override the model's temporal scaling.
    #[arg(long)]
    tau: Option<f64>,
    /// Override the goal-switching rate.
    #[arg(long)]
    alpha_g: Option<f64>,
    /// Start point file; defaults to the model's start.
    #[arg(long)]
    start: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RolloutArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    manifold: Option<String>,
    /// Per-sample error CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMode {
    Msd,
    Manipulability,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(value_enum)]
    mode: SimMode,
    /// Composite euclidean:2 x spd:2 model to roll out.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    model: Option<PathBuf>,
    /// Precomputed composite euclidean:2 x spd:2 trajectory.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
    /// Point mass in kg (msd).
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Comma-separated link lengths (manipulability).
    #[arg(long, default_value = "0.6,0.6,0.6,0.6,0.6")]
    links: String,
    /// Null-space gain (manipulability).
    #[arg(long, default_value_t = 5.0)]
    alpha: f64,
    /// Comma-separated initial joint angles; solved by inverse kinematics when omitted.
    #[arg(long)]
    q0: Option<String>,
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => 2,
        ErrorKind::Io => 3,
        ErrorKind::Math => 4,
    }
}

fn report(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {code}: {}", message.lines().next().unwrap_or("").trim());
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::GenDataset(a) => commands::gen_dataset(&a),
        Command::Train(a) => commands::train(&a),
        Command::Rollout(a) => commands::rollout(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Sim(a) => commands::sim(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg = text.trim_start_matches("error: ");
            return report(2, msg);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(exit_code(e.kind()), &e.to_string()),
    }
}

//! Experiment front end: simulate trajectories, measure convergence order,
//! verify coherence, and compare energy behavior of the discrete schemes.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver failure,
//! 3 acceptance band or threshold missed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use deltavar::experiment::{run, Command as ExperimentCommand, ConfigPatch, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "deltavar",
    version,
    about = "Discrete Lagrangian dynamics on time scales: simulate, measure, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Run one scheme and write the trajectory with all three residuals
    Simulate(CommonArgs),
    /// Measure the convergence order of a scheme against the reference
    Order(CommonArgs),
    /// Check that the action gradient and integral residual vanish together
    Coherence(CommonArgs),
    /// Compare energy drift of the differential and variational schemes
    Energy(CommonArgs),
    /// Side-by-side trajectories of both schemes and the reference
    Compare(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem name: free, harmonic, quartic, pendulum
    #[arg(long)]
    problem: Option<String>,

    /// Scale spec: uniform:a,b,N | qscale:q,kmin,kmax | random:n,mumin,mumax,seed | file:PATH
    #[arg(long)]
    scale: Option<String>,

    /// Scheme: differential, variational, reference
    #[arg(long)]
    scheme: Option<String>,

    /// Initial value x(t_0)
    #[arg(long)]
    x0: Option<f64>,

    /// Startup value x(t_1); defaults to the reference solution at t_1
    #[arg(long)]
    x1: Option<f64>,

    /// Initial velocity for reference seeding
    #[arg(long)]
    v0: Option<f64>,

    /// Step sizes for the order sweep, e.g. 0.1,0.05,0.025,0.0125
    #[arg(long, value_name = "R,R,...", value_delimiter = ',')]
    h_list: Option<Vec<f64>>,

    /// Newton tolerance; for `coherence`, the pass threshold instead
    #[arg(long)]
    tol: Option<f64>,

    /// Seed for perturbation noise
    #[arg(long)]
    seed: Option<u64>,

    /// Perturb interior trajectory points by this magnitude (coherence)
    #[arg(long, num_args = 0..=1, default_missing_value = "1e-3")]
    perturb: Option<f64>,

    /// Constant-estimate mode for the integral residual: first, mean
    #[arg(long)]
    c_mode: Option<String>,

    /// Output directory for CSV/JSON artifacts
    #[arg(long)]
    out: Option<PathBuf>,

    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn to_patch(&self) -> ConfigPatch {
        ConfigPatch {
            problem: self.problem.clone(),
            scale: self.scale.clone(),
            scheme: self.scheme.clone(),
            x0: self.x0,
            x1: self.x1,
            v0: self.v0,
            h_list: self.h_list.clone(),
            tol: self.tol,
            seed: self.seed,
            perturb: self.perturb,
            c_mode: self.c_mode.clone(),
            out: self.out.clone(),
            tolerances: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        CliCommand::Simulate(a) => (ExperimentCommand::Simulate, a),
        CliCommand::Order(a) => (ExperimentCommand::Order, a),
        CliCommand::Coherence(a) => (ExperimentCommand::Coherence, a),
        CliCommand::Energy(a) => (ExperimentCommand::Energy, a),
        CliCommand::Compare(a) => (ExperimentCommand::Compare, a),
    };

    match execute(command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: ExperimentCommand, args: &CommonArgs) -> deltavar::Result<ExitCode> {
    let file_patch = match &args.config {
        Some(path) => ConfigPatch::from_file(path)?,
        None => ConfigPatch::default(),
    };
    let cli_patch = args.to_patch();
    let cfg = ExperimentConfig::resolve(command, &[&file_patch, &cli_patch])?;
    let outcome = run(&cfg)?;
    println!("{}", outcome.describe());
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

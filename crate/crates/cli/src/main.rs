//! Command-line pipeline: ingest -> residuals -> fit -> eval -> simulate
//! -> ztest.
//!
//! Every command validates its inputs, writes its outputs plus exactly one
//! manifest into `--out-dir`, and never mutates an input file. Exit codes:
//! 0 success, 2 validation error, 3 runtime/data error.

mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable naming the default worker-thread count.
const THREADS_ENV: &str = "DRIVETAIL_THREADS";

#[derive(Parser)]
#[command(
    name = "drivetail",
    version,
    about = "Heavy-tailed driving-behavior modeling pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a trajectory dataset, run a predictor, export normalized
    /// residuals.
    Residuals(ResidualsArgs),
    /// Fit the shifted power law to a residual file.
    Fit(FitArgs),
    /// Score residuals against one or more residual laws.
    Eval(EvalArgs),
    /// Run forward-rolling crash-rate simulations from a config file.
    Simulate(SimulateArgs),
    /// Z-test a crash report against a real-world baseline rate.
    Ztest(ZtestArgs),
}

#[derive(Args)]
pub(crate) struct ResidualsArgs {
    /// Trajectory CSV exported by the dataset.
    #[arg(long)]
    pub data: PathBuf,
    /// Column map: highd, citysim, acc, or neutral.
    #[arg(long)]
    pub schema: String,
    /// Predictor parameter file, or `reference` to fit the reference
    /// predictor on this dataset (the fitted file is written next to the
    /// residuals).
    #[arg(long, default_value = "reference")]
    pub predictor: String,
    /// longitudinal or lateral.
    #[arg(long, default_value = "longitudinal")]
    pub direction: String,
    /// Run timestep in seconds; the table is resampled to it.
    #[arg(long, default_value_t = 0.2)]
    pub dt: f64,
    /// History window length in steps.
    #[arg(long, default_value_t = 12)]
    pub t_steps: usize,
    /// Recording timestep of the input file; schema default when omitted.
    #[arg(long)]
    pub recording_dt: Option<f64>,
    /// Std floor applied before dividing by the predicted std.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub(crate) struct FitArgs {
    /// One-column residual CSV (as written by `residuals`).
    #[arg(long, conflicts_with = "curve")]
    pub residuals: Option<PathBuf>,
    /// Pre-built violation curve (`sigma,delta` CSV) to fit directly.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Fit with the scale parameter fixed to this value.
    #[arg(long, conflicts_with = "free_a")]
    pub fixed_a: Option<f64>,
    /// Fit with a free scale parameter (default).
    #[arg(long)]
    pub free_a: bool,
    /// Number of violation-curve thresholds.
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub(crate) struct EvalArgs {
    /// One-column residual CSV.
    #[arg(long)]
    pub residuals: PathBuf,
    /// Model spec, repeatable: gaussian | laplace | student-t:<nu> |
    /// spl:<a>,<k> | spl:fit
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    /// Histogram bin count.
    #[arg(long, default_value_t = 401)]
    pub bins: usize,
    /// Quadrature step of the integral log-likelihood.
    #[arg(long, default_value_t = 0.005)]
    pub ll_step: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub(crate) struct SimulateArgs {
    /// Simulation config JSON (see README for the schema).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub(crate) struct ZtestArgs {
    /// Crash report JSON produced by `simulate`.
    #[arg(long)]
    pub report: PathBuf,
    /// Real-world baseline rate, crashes per mile.
    #[arg(long)]
    pub baseline: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{threads}`");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Residuals(args) => ops::residuals(&args),
        Command::Fit(args) => ops::fit(&args),
        Command::Eval(args) => ops::eval(&args),
        Command::Simulate(args) => ops::simulate(&args),
        Command::Ztest(args) => ops::ztest(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(ops::CliError::Validation(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(ops::CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

//! `fusso` command-line tool.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure
//! or non-convergence (outputs are still written before exiting with 4).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fusso::FussoError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Fusso(#[from] FussoError),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NotConverged(_) => 4,
            CliError::Fusso(e) if e.is_numerical() => 4,
            CliError::Fusso(e) if e.is_data_error() => 3,
            CliError::Fusso(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fusso",
    version,
    about = "Sparse regression on functional covariates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset plus its truth sidecar.
    Synth(SynthArgs),
    /// Fit a model (M and lambda fixed or chosen by CV).
    Fit(FitArgs),
    /// Regularization path: per-lambda block norms.
    Path(PathArgs),
    /// Cross-validation table over (M, lambda).
    Cv(CvArgs),
    /// Monte-Carlo support-recovery benchmark.
    Bench(BenchArgs),
    /// Predict responses for a dataset with a saved model.
    Predict(PredictArgs),
}

/// Flags shared by every command.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON file of options (keys as the flag names); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output encoding: csv or f64le.
    #[arg(long)]
    pub format: Option<fusso::dataset::Encoding>,
}

/// Solver and lambda-grid flags.
#[derive(Debug, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", alias = "max_iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "lambda-count", alias = "lambda_count")]
    pub lambda_count: Option<usize>,
    #[arg(long = "lambda-ratio", alias = "lambda_ratio")]
    pub lambda_ratio: Option<f64>,
    #[arg(long, alias = "cv_folds")]
    pub folds: Option<usize>,
}

/// Generator flags, named after the `SynthSpec` fields.
#[derive(Debug, Args)]
pub struct SpecFlags {
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long = "p")]
    pub p: Option<usize>,
    #[arg(long = "s")]
    pub s: Option<usize>,
    #[arg(long = "M_gen", alias = "M-gen")]
    pub m_gen: Option<usize>,
    #[arg(long = "sigma_xi", alias = "sigma-xi")]
    pub sigma_xi: Option<f64>,
    #[arg(long = "sigma_eps_sq", alias = "sigma-eps-sq")]
    pub sigma_eps_sq: Option<f64>,
    #[arg(long = "gamma_weight", alias = "gamma-weight")]
    pub gamma_weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub spec: SpecFlags,
}

/// Estimator flags, named after the `FussoConfig` fields.
#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Truncation: a number or "cv".
    #[arg(long = "M")]
    pub m: Option<fusso::estimator::Tuning<usize>>,
    /// Penalty: a number or "cv".
    #[arg(long)]
    pub lambda: Option<fusso::estimator::Tuning<f64>>,
    /// Candidate truncations for CV, comma separated.
    #[arg(long = "M_grid", alias = "M-grid", value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub intercept: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Dataset directory or manifest.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// fusso or ygl.
    #[arg(long)]
    pub estimator: Option<fusso::metrics::EstimatorKind>,
    /// dense, sparse or auto (sparse when p > 1000).
    #[arg(long)]
    pub layout: Option<commands::PathLayout>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long = "M_grid", alias = "M-grid", value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub intercept: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub spec: SpecFlags,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub estimator: Option<fusso::metrics::EstimatorKind>,
    /// Truncation per trial: a number or "cv".
    #[arg(long = "M")]
    pub m: Option<fusso::estimator::Tuning<usize>>,
    #[arg(long = "M_grid", alias = "M-grid", value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    /// Points on the CV lambda grid.
    #[arg(long = "cv-lambda-count", alias = "cv_lambda_count")]
    pub cv_lambda_count: Option<usize>,
    #[arg(long = "cv-lambda-ratio", alias = "cv_lambda_ratio")]
    pub cv_lambda_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Fit(a) => commands::fit(a),
        Command::Path(a) => commands::path(a),
        Command::Cv(a) => commands::cv(a),
        Command::Bench(a) => commands::bench(a),
        Command::Predict(a) => commands::predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

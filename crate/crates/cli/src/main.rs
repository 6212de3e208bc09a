//! `expband`: max-norm exponential fitting and separable least squares from
//! the command line.

mod commands;
mod document;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "expband", version, about = "Best uniform exponential fits and grid least squares")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best max-norm fit by a*exp(k*t)+b, or the closed-form answer when none exists.
    FitMinimax(MinimaxArgs),
    /// Best max-norm line.
    FitLine(CommonArgs),
    /// Exact fit of a four-point dataset.
    FitQuartet(CommonArgs),
    /// Taxonomy of a dataset without fitting.
    Classify(CommonArgs),
    /// Max-norm band around the best fit, optionally at a fixed rate.
    Band(BandArgs),
    /// Separable least squares by grid refinement.
    FitTac(TacArgs),
    /// Simulate exponential demand data.
    SimulateDemand(DemandSimArgs),
    /// Simulate an exponential autoregressive series.
    SimulateExpar(ExparSimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Norm {
    Max,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TacModel {
    Exp,
    Demand,
    Expar,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Dataset file (`t,value` rows); `-` reads stdin.
    pub data: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Write fit, residual and band columns for plotting.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Norm::Max)]
    pub norm: Norm,
}

#[derive(Debug, Args)]
pub struct MinimaxArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Relative width at which the rate bracket stops shrinking.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, allow_negative_numbers = true, requires = "k_max")]
    pub k_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "k_min")]
    pub k_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fixed rate; `0` gives the best line. Omitted: the globally best fit.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TacArgs {
    /// Dataset file; a plain one-value-per-row series for `expar`.
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: TacModel,
    /// Search interval per nonlinear parameter, `name=lo:hi[:points]`.
    #[arg(long = "grid")]
    pub grid: Vec<String>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// ExpAR order `p`.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// ExpAR delay `d`.
    #[arg(long, default_value_t = 2)]
    pub delay: usize,
    #[arg(long, value_enum, default_value_t = Norm::L2)]
    pub norm: Norm,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, env = "EXPBAND_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DemandSimArgs {
    #[arg(long, default_value_t = 48.0)]
    pub q0: f64,
    #[arg(long, default_value_t = 3.42)]
    pub k: f64,
    #[arg(long, default_value_t = 0.006)]
    pub alpha: f64,
    /// Standard deviation of the Gaussian noise on `log10 Q`.
    #[arg(long, default_value_t = 0.1)]
    pub sd: f64,
    /// Comma-separated prices; defaults to a built-in 15-price design.
    #[arg(long, value_delimiter = ',')]
    pub prices: Vec<f64>,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Write the simulated `(C, Q)` dataset here.
    #[arg(long)]
    pub data_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExparSimArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.49)]
    pub c0: f64,
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_values_t = [1.65, 0.54])]
    pub c: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_values_t = [-0.44, -0.84])]
    pub pi: Vec<f64>,
    #[arg(long, default_value_t = 1.3)]
    pub gamma: f64,
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_values_t = [2.52, 3.86])]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub delay: usize,
    /// Starting values, one per lag.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_values_t = [2.75, 3.1])]
    pub initial: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Standard deviation of the Gaussian innovations.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub data_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match commands::run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("expband: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

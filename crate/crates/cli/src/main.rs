//! `tanhshift` command-line runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "tanhshift",
    version,
    about = "Squashed-Gaussian densities, modes, bias and SAC experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gaussian and squashed density curve as CSV.
    Pdf(PdfArgs),
    /// Mode of the squashed density, the naive action and their gap, as JSON.
    Mode(ModeArgs),
    /// Aggregate bias over identical dimensions, as CSV.
    BiasSweep(SweepArgs),
    /// Histogram check of the sampler against the analytic density.
    McCheck(McArgs),
    /// Curve, point and grid data for the figure presets.
    Figures(FigureArgs),
    /// Train SAC runs and write one record per seed and mode.
    Train(TrainArgs),
    /// Aggregate statistics over a directory of run records.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct Dist {
    /// Pre-squash mean.
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Pre-squash standard deviation.
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct PdfArgs {
    #[command(flatten)]
    dist: Dist,
    /// Number of evenly spaced y values on [-0.999, 0.999].
    #[arg(long, default_value_t = tanhshift::bias::CURVE_POINTS)]
    points: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Grid,
    Analytic,
    Both,
}

#[derive(Debug, Args)]
struct ModeArgs {
    #[command(flatten)]
    dist: Dist,
    #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated ascending dimensions.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,61")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 200)]
    bins: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// motivation, shift, bias-points or 2d.
    #[arg(long)]
    preset: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// standard, corrected, or both (one training run evaluated both ways).
    #[arg(long, default_value = "standard")]
    mode: String,
    /// Inclusive seed range `a-b` (config default 0-4).
    #[arg(long)]
    seeds: Option<String>,
    /// Action dimension of the toy environment (config default 8).
    #[arg(long)]
    env_d: Option<usize>,
    /// Environment steps per run (config default 50000).
    #[arg(long)]
    steps: Option<usize>,
    /// JSON file with `env` and `sac` sections; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds trained concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for `run_<mode>_<seed>.json` files.
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Directory holding `run_<mode>_<seed>.json` files.
    #[arg(long)]
    runs: PathBuf,
    /// iqm, median or mean; all three when omitted.
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated ascending profile thresholds (default 0, 0.05, ..., 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    taus: Option<Vec<f64>>,
    #[arg(long, default_value_t = tanhshift::stats::DEFAULT_N_BOOT)]
    n_boot: usize,
    #[arg(long, default_value_t = tanhshift::stats::DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; the runs directory when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Pdf(a) => commands::pdf(a),
        Command::Mode(a) => commands::mode(a),
        Command::BiasSweep(a) => commands::bias_sweep(a),
        Command::McCheck(a) => commands::mc_check(a),
        Command::Figures(a) => commands::figures(a),
        Command::Train(a) => commands::train(a),
        Command::Stats(a) => commands::stats(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

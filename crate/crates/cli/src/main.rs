//! `hypergrid`: synthetic scenes, leakage-free splits, training, cross-validation experiments,
//! statistical comparison and self-checks for hyperspectral patch classification.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O or file format error,
//! 3 infeasible split, 4 unpaired comparison, 5 verification failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "hypergrid", version, about = "Hyperspectral patch classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene (cube + label files).
    Synth(SynthArgs),
    /// Build leakage-free cross-validation folds for a scene.
    Split(SplitArgs),
    /// Train and score one (fold, run) cell.
    Train(TrainArgs),
    /// Run every fold x run cell and summarise.
    Experiment(ExperimentArgs),
    /// Wilcoxon tests and average ranks across result files.
    Compare(CompareArgs),
    /// Finite-difference check of the analytic gradients.
    Gradcheck(GradcheckArgs),
    /// Per-sample inference latency of a checkpoint.
    Benchmark(BenchmarkArgs),
    /// Inspect the augmentation budget of a fold.
    Augment(AugmentArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output base path; writes <out>.hgcube and <out>.hglab.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub width: usize,
    #[arg(long, default_value_t = 40)]
    pub height: usize,
    #[arg(long, default_value_t = 32)]
    pub bands: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Standard deviation of the per-value Gaussian noise.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub cube: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Side of the square spatial blocks assigned to folds.
    #[arg(long, default_value_t = 8)]
    pub block: usize,
    /// Patch radius the split must keep apart (3 for 7x7 patches).
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output split file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub fold: usize,
    #[arg(long, default_value_t = 0)]
    pub run: usize,
    /// Checkpoint to write.
    #[arg(long)]
    pub out_model: PathBuf,
    /// CSV file receiving the header and one metrics row.
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Runs per fold; overrides the config.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Results CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the text summary to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Two or more results CSV files.
    #[arg(long, num_args = 2.., required = true)]
    pub results: Vec<PathBuf>,
    /// Score used for average ranks: kappa, oa or aa.
    #[arg(long, default_value = "kappa")]
    pub by: String,
}

#[derive(Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Central difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Perturb one analytic gradient entry (negative control).
    #[arg(long, hide = true)]
    pub corrupt_backward: bool,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub cube: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Passes over every labeled pixel.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
}

#[derive(Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub fold: usize,
    /// Print the per-class budget table as CSV.
    #[arg(long, required = true)]
    pub stats: bool,
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Split(a) => commands::split(a),
        Command::Train(a) => commands::train(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Compare(a) => commands::compare(a),
        Command::Gradcheck(a) => commands::gradcheck(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Augment(a) => commands::augment(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::USAGE as u8 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// L1 simplex fitting with per-parameter uncertainty from first derivatives
/// at the optimum.
#[derive(Debug, Parser)]
#[command(name = "fdao", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to x,y data and report parameter uncertainty.
    Fit(FitArgs),
    /// Run Monte Carlo plans and tabulate recovered parameters.
    Simulate(SimulateArgs),
    /// Turn absorbance readings into a percent-death dataset.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Key-value fit configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV with `x` and `y` columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Seed for the Hodges-Lehmann subsampling streams (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Upsilon threshold for flagging parameters (overrides the config).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Directory for report.tsv and per-parameter fluctuation dumps.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Plan file; repeat to run several plans in parallel.
    #[arg(long, required = true)]
    pub plan: Vec<PathBuf>,
    /// Base seed; each plan without its own seed gets a seed derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Upsilon threshold (overrides the plans).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output TSV path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Blank wells, `well_id,absorbance`.
    #[arg(long)]
    pub blanks: PathBuf,
    /// Untreated live-control wells, `well_id,absorbance`.
    #[arg(long)]
    pub live: PathBuf,
    /// Treated wells as `<concentration>=<file>`; repeatable.
    #[arg(long)]
    pub treated: Vec<String>,
    /// CSV with `concentration,file` rows, in addition to any --treated.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output dataset CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

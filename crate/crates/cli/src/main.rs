//! `modview` — cluster dependency graphs, evaluate the results, and
//! reproduce parameter sweeps and algorithm comparisons from the shell.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modview_core::Error;

mod commands;
mod config;
mod io_util;

#[derive(Parser)]
#[command(name = "modview", version, about = "Architecture module-view recovery toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dependency graph and write the partition
    Cluster(ClusterArgs),
    /// Evaluate a partition against a reference decomposition
    Metrics(MetricsArgs),
    /// Compare algorithms across systems and rank them with Above scores
    Compare(CompareArgs),
    /// Sweep one clustering parameter over a probe range
    Tune(TuneArgs),
    /// Generate a synthetic planted-partition graph
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoChoice {
    Dsmc,
    Kmeans,
    Eb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Json,
    #[value(name = "edge-list")]
    EdgeList,
}

/// Clustering parameters shared by every command that runs the DSM
/// clusterer. Flags override the config file, which overrides the tuned
/// defaults.
#[derive(Args)]
pub struct DsmcFlags {
    #[arg(long, help = "Cost module-size exponent")]
    pub powcc: Option<f64>,
    #[arg(long, help = "Bid module-size exponent")]
    pub powbid: Option<f64>,
    #[arg(long, help = "Bid interaction exponent")]
    pub powdep: Option<f64>,
    #[arg(long, help = "Inner iterations per pass, as a multiple of n")]
    pub times: Option<usize>,
    #[arg(long = "rand-accept", help = "Keep a worsening move once per this many draws")]
    pub rand_accept: Option<u64>,
    #[arg(long = "threshold", help = "Relative improvement below which a pass is stable")]
    pub convergence_threshold: Option<f64>,
    #[arg(long = "stable-passes", help = "Consecutive stable passes required to stop")]
    pub max_stable_passes: Option<usize>,
    /// Recompute the cost from scratch after every move (for benchmarking)
    #[arg(long = "no-incremental")]
    pub no_incremental: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Input graph file
    graph: PathBuf,
    #[arg(long = "algo", value_enum)]
    algorithm: AlgoChoice,
    #[arg(long, value_enum, help = "Input format (default: inferred from extension)")]
    format: Option<FormatChoice>,
    #[arg(long)]
    seed: Option<u64>,
    /// Partition output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run-stats output path (default: derived from --out)
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, help = "key=value file with clustering parameter defaults")]
    config: Option<PathBuf>,
    #[command(flatten)]
    dsmc: DsmcFlags,
    #[arg(long, help = "k-means cluster count (default: 10% of entities)")]
    k: Option<usize>,
    #[arg(long = "max-iters")]
    max_iterations: Option<usize>,
    #[arg(long = "target-clusters", help = "Edge-betweenness component target (default: 10% of entities)")]
    target_clusters: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Partition file to evaluate
    partition: PathBuf,
    /// Reference: a partition file, or `packages` for the qualified-name
    /// decomposition
    #[arg(long)]
    reference: String,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
    #[arg(long, default_value_t = 5, help = "NED lower size limit")]
    lower: usize,
    #[arg(long, default_value_t = 20, help = "NED upper size limit")]
    upper: usize,
    /// CSV output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Input graph files, one per system
    #[arg(required = true)]
    graphs: Vec<PathBuf>,
    /// Algorithms to rank: dsmc, kmeans, eb, or a path to externally
    /// produced partition file(s)
    #[arg(long = "algos", value_delimiter = ',', required = true)]
    algorithms: Vec<String>,
    #[arg(long, default_value_t = 1, help = "Seeded runs per (system, algorithm)")]
    runs: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
    #[arg(long, default_value_t = 5)]
    lower: usize,
    #[arg(long, default_value_t = 20)]
    upper: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dsmc: DsmcFlags,
}

#[derive(Args)]
struct TuneArgs {
    /// Input graph files, one per system
    #[arg(required = true)]
    graphs: Vec<PathBuf>,
    /// Parameter to sweep: powbid, powdep, powcc, times, or rand_accept
    #[arg(long = "param")]
    parameter: String,
    #[arg(long, help = "Range start (default: the parameter's probe range)")]
    lo: Option<f64>,
    #[arg(long, help = "Range end (default: the parameter's probe range)")]
    hi: Option<f64>,
    #[arg(long, help = "Probe increment (default: the parameter's probe range)")]
    step: Option<f64>,
    #[arg(long, default_value_t = 50, help = "Runs per probe value and system")]
    runs: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
    #[arg(long, default_value_t = 5)]
    lower: usize,
    #[arg(long, default_value_t = 20)]
    upper: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dsmc: DsmcFlags,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    modules: usize,
    #[arg(long)]
    size: usize,
    #[arg(long = "p-intra")]
    p_intra: f64,
    #[arg(long = "p-inter")]
    p_inter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph output path
    #[arg(long)]
    out: PathBuf,
    /// Truth partition output path (default: `<out stem>.truth.json`)
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Cluster(args) => commands::cluster::run(args),
        Command::Metrics(args) => commands::metrics::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Tune(args) => commands::tune::run(args),
        Command::Gen(args) => commands::gen::run(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

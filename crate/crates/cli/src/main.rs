//! `bbnet`: graph generation, experiment runs, sweeps, analysis and bound
//! reports. Machine-readable summaries go to stdout as JSON; diagnostics go
//! to stderr.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "bbnet", version, about = "Busy Beaver imitation game on algorithmic networks")]
struct Cli {
    /// Worker threads. Defaults to the number of available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Enumeration-table cache directory. Falls back to BBNET_CACHE_DIR.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a Barabási-Albert network or normalize a graph file.
    GenGraph(GenGraphArgs),
    /// Enumerate programs up to a length cap and report Ω and Busy Beaver proxies.
    Enumerate(EnumerateArgs),
    /// Run one experiment and write traces, prevalence, EAC and bound files.
    Run(RunArgs),
    /// Estimate SIS prevalence over a (λ, m, N) grid on BA networks.
    Sweep(SweepArgs),
    /// Re-derive a run's summary from its files and check consistency.
    Analyze(AnalyzeArgs),
    /// Evaluate the emergent-complexity lower bound.
    Bound(BoundArgs),
    /// Scan contagion start instants over a population ladder.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    /// Generate a Barabási-Albert network.
    #[arg(long, conflicts_with = "input", requires_all = ["n", "m", "seed"])]
    pub ba: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed clique size. Defaults to m, or 2 when m = 1.
    #[arg(long)]
    pub m0: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read and normalize an existing graph file instead.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Instants declared in the written file.
    #[arg(long)]
    pub instants: Option<usize>,
    /// Output file. Defaults to ba-<n>-<m>-<seed>.graph.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// Length cap K in bits.
    #[arg(long, default_value_t = bbnet::machine::DEFAULT_MAX_LEN)]
    pub max_len: u32,
    /// Network input w.
    #[arg(long, default_value_t = 0)]
    pub input: u64,
    #[arg(long, default_value_t = bbnet::machine::DEFAULT_STEP_LIMIT)]
    pub step_limit: u64,
    /// Cycles of the Ω profile.
    #[arg(long, default_value_t = 8)]
    pub cycles: u32,
    /// Second step budget; reports programs whose outcome differs.
    #[arg(long)]
    pub frontier: Option<u64>,
    /// Write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Options shared by commands that read an experiment config.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment config (TOML). Built-in defaults apply when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. --set graph.n=256. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub max_len: Option<u32>,
    #[arg(long)]
    pub step_limit: Option<u64>,
    #[arg(long)]
    pub mappings: Option<u32>,
    #[arg(long)]
    pub trials: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, required_unless_present = "dry_run")]
    pub out: Option<PathBuf>,
    /// Validate and print the resolved config without running.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub seed: u64,
    /// Spreading rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub lambdas: Vec<f64>,
    /// BA attachment counts.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub ms: Vec<usize>,
    /// Network sizes.
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub trials: u32,
    /// Simulated time per trial.
    #[arg(long, default_value_t = 200)]
    pub horizon: u32,
    /// Initially infected fraction.
    #[arg(long, default_value_t = 1.0)]
    pub initial_fraction: f64,
    #[arg(long, default_value_t = bbnet::analysis::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = bbnet::analysis::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Output directory of a previous run.
    pub dir: PathBuf,
    /// Exit with status 4 when any check fails.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: u64,
    /// Schedule argument x = z + f + 2.
    #[arg(long)]
    pub x: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Halting proxy. Taken from the enumeration at c(x) cycles when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Complexity of the network input. Taken from the index when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub a_w: Option<f64>,
    /// Use this C5 directly instead of calibrating.
    #[arg(long, requires_all = ["omega", "a_w"], allow_negative_numbers = true)]
    pub c5: Option<f64>,
    /// Spreading rate for the BA corollary condition.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub seed: u64,
    /// Contagion start instants to scan.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub starts: Vec<u32>,
    /// Population sizes of the ladder.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    pub ladder: Vec<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bbnet: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let cache = cli.cache_dir.or_else(|| std::env::var_os("BBNET_CACHE_DIR").map(PathBuf::from));
    let cache = cache.as_deref();
    match cli.command {
        Command::GenGraph(a) => commands::gen_graph(&a),
        Command::Enumerate(a) => commands::enumerate(&a, cache),
        Command::Run(a) => commands::run(&a, cache),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Bound(a) => commands::bound(&a, cache),
        Command::Scan(a) => commands::scan(&a, cache),
    }
}

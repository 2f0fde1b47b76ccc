mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Wireless-fingerprint device identification.
#[derive(Debug, Parser)]
#[command(name = "wfid", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a scenario file or a built-in default.
    Simulate(SimulateArgs),
    /// Evaluate algorithms on a dataset and write report.txt and report.jsonl.
    Evaluate(EvaluateArgs),
    /// Project a dataset onto its top principal components.
    Project(ProjectArgs),
    /// Rank attributes by impurity decrease and permutation importance.
    Importance(ImportanceArgs),
    /// Run the enrollment and identification service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BuiltinScenario {
    Nbiot,
    Csi,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file (TOML with a `kind` key).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    scenario: Option<PathBuf>,
    /// Use a built-in default scenario instead of a file.
    #[arg(long = "default", value_name = "KIND")]
    builtin: Option<BuiltinScenario>,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Dataset file written by `simulate`.
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', required = true)]
    algorithms: Vec<String>,
    #[arg(long, default_value = "nested_cv")]
    protocol: String,
    /// Random-search configurations per tuning step.
    #[arg(long, default_value_t = 30)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    inner_folds: usize,
    #[arg(long, default_value_t = 10)]
    outer_folds: usize,
    /// Hold-out iterations.
    #[arg(long, default_value_t = 9)]
    repeats: usize,
    /// Timed runs per throughput measurement.
    #[arg(long, default_value_t = 5)]
    bench_repetitions: usize,
    /// Skip throughput and memory measurement.
    #[arg(long)]
    no_benchmark: bool,
    /// ROCKET kernel count.
    #[arg(long)]
    kernels: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    data: PathBuf,
    /// 2 or 3.
    #[arg(long, default_value_t = 3)]
    dims: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[arg(long)]
    data: PathBuf,
    /// dt or rf.
    #[arg(long, default_value = "dt")]
    algorithm: String,
    /// Fraction of records held out for permutation importance.
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "WFID_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    #[arg(long, env = "WFID_STORE", default_value = "wfid-store")]
    store: PathBuf,
    /// Worker threads for training jobs (default: all cores).
    #[arg(long, env = "WFID_THREADS")]
    threads: Option<usize>,
    #[arg(long, env = "WFID_SEED", default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Project(a) => commands::project(a),
        Command::Importance(a) => commands::importance(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

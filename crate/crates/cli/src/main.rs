//! `cct`: build, validate and query compressed cover trees; generate the
//! train-line datasets and rerun the legacy recursion on them.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cct", version, about = "Exact k-nearest neighbors on paired compressed cover trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a tree over a point set and write it in the `#cct v1` format.
    Build(BuildArgs),
    /// Check a tree file against its point set.
    Validate(ValidateArgs),
    /// All k nearest neighbors of every query point.
    Knn(KnnArgs),
    /// Write a generated dataset (points, tree, distance matrix).
    Gen(GenArgs),
    /// Run the legacy recursion on a generated dataset.
    Legacy(LegacyArgs),
    /// Expansion constant, aspect ratio, height and imbalance.
    Analyze(AnalyzeArgs),
    /// Traversal counters as CSV, one row per run.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
enum MetricKind {
    #[default]
    L2,
}

/// Where points come from: coordinates or an explicit distance table.
#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Reference points, CSV `id,x1,...,xd`.
    #[arg(long, conflicts_with = "matrix")]
    input: Option<PathBuf>,
    /// Reference distances, CSV `id_a,id_b,distance`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricKind::L2)]
    metric: MetricKind,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tree file whose levels and parents are used verbatim.
    #[arg(long)]
    given_levels: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    tree: PathBuf,
}

#[derive(Args, Debug)]
struct KnnArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Query points; defaults to the reference set.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Reference tree; built from `--seed` when absent.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    exclude_self: bool,
    /// Check candidate sets against brute force during the search.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    variant: String,
    #[arg(long)]
    m: u32,
    /// Branching factor for `balanced`.
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LegacyArgs {
    #[arg(long)]
    variant: String,
    #[arg(long, required_unless_present = "m_list")]
    m: Option<u32>,
    /// Comma-separated values of m; prints the growth table instead.
    #[arg(long, value_delimiter = ',', conflicts_with = "m")]
    m_list: Vec<u32>,
    /// Pair the reference set with itself.
    #[arg(long)]
    self_pair: bool,
    /// Print the reference expansions seen by this query id.
    #[arg(long)]
    trace: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the structural checks on the tree.
    #[arg(long)]
    checks: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long)]
    exclude_self: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => commands::build(a),
        Command::Validate(a) => commands::validate(a),
        Command::Knn(a) => commands::knn(a),
        Command::Gen(a) => commands::gen(a),
        Command::Legacy(a) => commands::legacy(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

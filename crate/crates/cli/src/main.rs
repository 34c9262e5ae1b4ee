//! `rmroute`: instance generation, request paths, routing solves, the exact
//! DP and policy experiments from one command.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmroute_core::InstanceClass;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "rmroute",
    version,
    about = "Capacity control for collection logistics",
    long_about = "Capacity control for collection logistics: generate instances and request \
                  paths, solve routing problems, evaluate the exact dynamic program and run \
                  booking-limit policy experiments.\n\n\
                  Exit status: 0 success, 1 error, 2 usage error, 3 infeasible model, \
                  4 solve stopped by its budget (solve --strict only)."
)]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance from a Solomon file or a synthetic Solomon-style network.
    Gen(GenArgs),
    /// Sample request paths for an instance.
    Paths(PathsArgs),
    /// Solve the CVRP, or the PMVRP with --pmvrp, at one state.
    Solve(SolveArgs),
    /// Evaluate the exact dynamic program (tiny instances only).
    Dp(DpArgs),
    /// Replay policies on shared request paths and write results and ECDFs.
    Simulate(SimulateArgs),
    /// Rebuild ECDF files and print summaries from a simulate output directory.
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
struct GenArgs {
    /// Solomon benchmark file to take coordinates and demands from.
    #[arg(long, conflicts_with = "synthetic")]
    source: Option<PathBuf>,
    /// Generate a synthetic network of this class (C, R or RC) instead of reading one.
    #[arg(long, value_name = "CLASS", required_unless_present = "source")]
    synthetic: Option<InstanceClass>,
    /// Instance class label; inferred from the Solomon name when omitted.
    #[arg(long)]
    class: Option<InstanceClass>,
    /// Number of customers (the first n of the source).
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    lf_min: f64,
    #[arg(long, default_value_t = 1.5)]
    lf_max: f64,
    /// Price constant: `auto` (mean demand times mean arc cost) or a positive number.
    #[arg(long, default_value = "auto")]
    kappa: String,
    /// Vehicle capacity: `auto`, `file` (the source's) or a positive number.
    #[arg(long, default_value = "auto")]
    capacity: String,
    /// Booking horizon T; defaults to 5 * ceil(total expected demand).
    #[arg(long)]
    horizon: Option<usize>,
    /// Seed for synthetic networks; recorded in the instance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the network in Solomon format.
    #[arg(long, value_name = "FILE")]
    write_source: Option<PathBuf>,
    /// Instance file to write; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PathsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Coefficient of variation of per-node request totals.
    #[arg(long, default_value_t = 0.1)]
    cv: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the path files.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EngineArg {
    Auto,
    SubsetDp,
    BranchAndBound,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Accepted requests per node, whitespace-separated; all zero when omitted.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Solve the profit-maximisation problem instead of the CVRP.
    #[arg(long)]
    pmvrp: bool,
    /// Upper bounds on optional demand per node, whitespace-separated.
    #[arg(long, requires = "pmvrp", conflicts_with = "t")]
    mu_t: Option<PathBuf>,
    /// Use the expected demand of periods t..T as upper bounds (default t = 1).
    #[arg(long, requires = "pmvrp")]
    t: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    budget_s: f64,
    /// Branch-and-bound node budget.
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    /// Exit with status 4 if the budget stopped the search.
    #[arg(long)]
    strict: bool,
    /// Also write the model in CPLEX LP format.
    #[arg(long, value_name = "FILE")]
    export_lp: Option<PathBuf>,
    /// JSON output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// State file; all zero when omitted.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Include the accept/reject decision for every (t, w, j).
    #[arg(long)]
    controls: bool,
    /// Largest allowed prod_j (w_max_j + 1) * T.
    #[arg(long, default_value_t = 2_000_000)]
    state_cap: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Worker threads; defaults to the spec's value, then to the CPU count.
    #[arg(long, env = "RMROUTE_WORKERS")]
    workers: Option<usize>,
    /// Override the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the spec's path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the spec's per-solve budget in seconds.
    #[arg(long)]
    budget_s: Option<f64>,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    /// Output directory of a `simulate` run.
    #[arg(long)]
    dir: PathBuf,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

/// Non-error outcomes that still map to a distinct exit status.
enum Outcome {
    Done,
    Infeasible,
    Truncated,
}

enum Failure {
    Usage(String),
    Core(rmroute_core::Error),
}

impl From<rmroute_core::Error> for Failure {
    fn from(e: rmroute_core::Error) -> Self {
        Failure::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a, quiet),
        Command::Paths(a) => commands::paths(a, quiet),
        Command::Solve(a) => commands::solve(a),
        Command::Dp(a) => commands::dp(a),
        Command::Simulate(a) => commands::simulate(a, quiet),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(3),
        Ok(Outcome::Truncated) => ExitCode::from(4),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `downup`: sample weighted spanning trees and check down-up walk properties.
//!
//! Exit codes: 0 on success, 1 when input validation or a reported check
//! fails, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Default step-schedule multiplier. The mixing bound is only known up to a
/// constant factor, so this is a tuning knob rather than a derived value.
const DEFAULT_CONSTANT: f64 = 4.0;
const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(name = "downup", version, about = "Down-up random walks and nearly-linear spanning tree sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample spanning trees, one per line.
    Sample(SampleArgs),
    /// Compare sampled tree frequencies with the exact distribution.
    Verify(VerifyArgs),
    /// Exact checks on a small density.
    Analyze(AnalyzeArgs),
    /// Time the sampler on generated graphs of increasing size.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct WalkArgs {
    /// Target total-variation distance in (0, 1).
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Multiplier C in the C·k·(ln k + ln 1/ε) step schedule.
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    constant: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Edge-list graph file.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    walk: WalkArgs,
    /// Number of independent trees.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Run exactly this many steps instead of the schedule (0 emits the
    /// initial depth-first-search tree).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = TreeFormat::Ids)]
    format: TreeFormat,
    /// Worker threads for independent chains.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TreeFormat {
    /// JSON array of sorted edge ids.
    Ids,
    /// JSON array of "u-v" strings.
    Endpoints,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Number of independent chains to sample.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Print `key: value` lines instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(subcommand)]
    check: AnalyzeCheck,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCheck {
    /// Exact approximate-exchange constant.
    Exchange(AnalyzeCommon),
    /// Stationarity, KL contraction and Pinsker checks on the exact kernel.
    WalkExact {
        #[command(flatten)]
        common: AnalyzeCommon,
        /// Random distributions tested in addition to every point mass.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// At most one positive Hessian eigenvalue at random positive points.
    Hessian {
        #[command(flatten)]
        common: AnalyzeCommon,
        /// Random points tested in addition to the all-ones point.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

#[derive(Args, Debug)]
struct AnalyzeCommon {
    #[command(flatten)]
    input: DensityInput,
    /// With --graph, analyze tree complements weighted by Π 1/w instead of
    /// spanning trees weighted by Π w.
    #[arg(long, requires = "graph")]
    cographic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    human: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct DensityInput {
    /// Edge-list graph file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Table density JSON document.
    #[arg(long)]
    density: Option<PathBuf>,
    /// DPP JSON document.
    #[arg(long)]
    dpp: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Target edge counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, default_value = "random-regular", value_parser = ["random-regular", "grid"])]
    graph_family: String,
    /// Print an aligned table instead of JSON.
    #[arg(long)]
    human: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => err.exit(),
    };
    let result = match cli.command {
        Command::Sample(args) => commands::sample(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Analyze(args) => commands::analyze(&args),
        Command::Bench(args) => commands::bench(&args),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

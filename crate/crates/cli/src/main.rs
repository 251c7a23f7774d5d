//! `evsite`: the siting pipeline front door.
//!
//! Subcommands mirror the pipeline stages: `gen` (synthetic instances),
//! `dist` (distance matrices with caching), `solve` (optimization plus a
//! metrics table), and `export` (GeoJSON).
//!
//! Exit codes: 0 success with a feasible result, 2 usage error, 3 input
//! validation failure, 4 solver finished but its best result violates the
//! station-count constraint, 5 I/O or network failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Outcome;

#[derive(Parser)]
#[command(name = "evsite", version, about = "Charging-station siting pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance: uniform sites on a planar rectangle.
    Gen(GenArgs),
    /// Build distance matrices for site lists, reusing a cache file.
    Dist(DistArgs),
    /// Run a solver on an instance; write a solution file and print metrics.
    Solve(SolveArgs),
    /// Export an instance plus a solution as GeoJSON.
    Export(ExportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Rectangle width, km.
    #[arg(long)]
    width: f64,
    /// Rectangle height, km.
    #[arg(long)]
    height: f64,
    /// Number of points of interest.
    #[arg(long)]
    pois: usize,
    /// Number of existing stations.
    #[arg(long)]
    existing: usize,
    /// Number of candidate locations.
    #[arg(long)]
    candidates: usize,
    /// Number of stations to place.
    #[arg(long)]
    cs: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output instance file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// Great-circle distances on a spherical Earth.
    Haversine,
    /// An OSRM `/table` routing service.
    Osrm,
}

#[derive(Args)]
struct DistArgs {
    /// POI site list (.csv, .geojson, or .json).
    #[arg(long, value_name = "FILE")]
    pois: Option<PathBuf>,
    /// Existing-station site list.
    #[arg(long, value_name = "FILE")]
    existing: Option<PathBuf>,
    /// Candidate site list.
    #[arg(long, value_name = "FILE")]
    candidates: PathBuf,
    /// Distance backend.
    #[arg(long, value_enum, default_value_t = BackendArg::Haversine)]
    backend: BackendArg,
    /// OSRM base URL (the environment variable overrides the default).
    #[arg(long, env = "EVSITE_OSRM_URL", default_value = "http://127.0.0.1:5000")]
    endpoint: String,
    /// OSRM routing profile.
    #[arg(long, default_value = "driving")]
    profile: String,
    /// Matrix cache file: reused when its key matches, rewritten otherwise.
    #[arg(long, value_name = "FILE")]
    cache: PathBuf,
    /// Also write a ready-to-solve instance file (requires --cs).
    #[arg(long, value_name = "FILE", requires = "cs")]
    instance_out: Option<PathBuf>,
    /// Number of stations to place, for --instance-out.
    #[arg(long)]
    cs: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    /// Exhaustive enumeration of all size-CS subsets.
    Exact,
    /// Simulated annealing over the penalized QUBO encoding.
    SaQubo,
    /// Simulated annealing over feasible subsets via swap moves.
    SaSwap,
    /// Deterministic marginal-gain baseline.
    Greedy,
    /// Best of N uniformly drawn feasible subsets.
    Random,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum WeightsArg {
    /// Derive gammas from the candidate count and the penalty from the
    /// coefficient scale; explicit --gamma*/--lambda flags override fields.
    Auto,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    /// Solver to run.
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Weight mode.
    #[arg(long, value_enum, default_value_t = WeightsArg::Auto)]
    weights: WeightsArg,
    /// Override the POI-proximity weight.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Override the existing-station separation weight.
    #[arg(long)]
    gamma2: Option<f64>,
    /// Override the pairwise separation weight.
    #[arg(long)]
    gamma3: Option<f64>,
    /// Override the cardinality penalty weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Annealing reads per run (also the sample count for `random`).
    #[arg(long, default_value_t = 1000)]
    reads: usize,
    /// Sweeps per read.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Initial temperature (default: the largest coefficient magnitude).
    #[arg(long)]
    t_initial: Option<f64>,
    /// Final temperature (default: 1e-3 x the initial temperature).
    #[arg(long)]
    t_final: Option<f64>,
    /// Base seed; repeats derive their own seeds from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs; the best feasible result is kept.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Output solution file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// Instance file.
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    /// Solution file produced by `solve`.
    #[arg(long, value_name = "FILE")]
    solution: PathBuf,
    /// Output GeoJSON file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Dist(args) => commands::cmd_dist(args),
        Command::Solve(args) => commands::cmd_solve(args),
        Command::Export(args) => commands::cmd_export(args),
    };
    match result {
        Ok(Outcome::Feasible) => ExitCode::SUCCESS,
        Ok(Outcome::InfeasibleBest) => {
            eprintln!("warning: best result violates the station-count constraint");
            ExitCode::from(4)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

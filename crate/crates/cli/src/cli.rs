use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schelling::model::Threshold;
use schelling::topology::GridNeighborhood;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (build ", env!("SCHELLING_BUILD_ID"), ")");

#[derive(Debug, Parser)]
#[command(name = "schelling", version = VERSION, about = "Schelling segregation engines, oracles and baselines")]
pub struct Cli {
    /// TOML file whose keys mirror the subcommand's flags; flags given on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Emit a single JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one engine on one topology.
    Simulate(SimulateArgs),
    /// Run the scaling experiment and write a results CSV.
    Bench(BenchArgs),
    /// Fit the six regression models and exponent estimators.
    Fit(FitArgs),
    /// Build the QUBO encoding and report its size.
    Qubo(QuboArgs),
    /// Random-walk baselines.
    #[command(subcommand)]
    Walks(WalksCommand),
    /// Exact expected number of moves on a small instance.
    Oracle(OracleArgs),
}

pub const SUBCOMMANDS: [&str; 6] = ["simulate", "bench", "fit", "qubo", "walks", "oracle"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyChoice {
    Lollipop,
    Clique,
    Path,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Traditional,
    #[value(alias = "count_first")]
    CountFirst,
}

/// Grid neighborhood: 4 (von Neumann) or 8 (Moore) neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NeighborhoodChoice {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

impl NeighborhoodChoice {
    pub fn get(self) -> GridNeighborhood {
        match self {
            NeighborhoodChoice::Four => GridNeighborhood::VonNeumann,
            NeighborhoodChoice::Eight => GridNeighborhood::Moore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliqueRuleChoice {
    Exact,
    WithoutSelfExclusion,
}

/// Shape flags shared by `simulate` and `oracle`.
#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    pub topology: TopologyChoice,
    #[arg(long)]
    pub clique_size: Option<usize>,
    #[arg(long)]
    pub path_length: Option<usize>,
    /// Grid shape as ROWSxCOLS.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value = "4")]
    pub neighborhood: NeighborhoodChoice,
    #[arg(long)]
    pub agents_a: usize,
    #[arg(long)]
    pub agents_b: usize,
    /// Threshold as a P/Q literal.
    #[arg(long)]
    pub tau: Threshold,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, value_enum, default_value = "traditional")]
    pub engine: EngineChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_steps: u64,
    /// Trial k uses seed + k.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Count-first: do not count clique-internal moves.
    #[arg(long)]
    pub skip_clique_internal: bool,
    /// Count-first: evaluate the bridge endpoints exactly.
    #[arg(long)]
    pub exact_bridge: bool,
    #[arg(long, value_enum, default_value = "exact")]
    pub clique_rule: CliqueRuleChoice,
    /// Traditional: sample the mover directly instead of by rejection.
    #[arg(long)]
    pub direct_sampling: bool,
    /// Write the first trial's trace as CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.8)]
    pub density: f64,
    #[arg(long, default_value_t = 0.5)]
    pub split: f64,
    #[arg(long, default_value_t = 0.1)]
    pub clique_frac: f64,
    #[arg(long, default_value = "1/2")]
    pub tau: Threshold,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "traditional,count-first")]
    pub engines: Vec<EngineChoice>,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_steps: u64,
    /// Worker threads; 0 uses every core, 1 gives the most stable timings.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub skip_clique_internal: bool,
    #[arg(long)]
    pub exact_bridge: bool,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct FitArgs {
    /// Results CSV from `bench`, or a two-column `size value` series.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct QuboArgs {
    #[arg(long, value_parser = parse_grid, conflicts_with_all = ["clique", "path"])]
    pub grid: Option<(usize, usize)>,
    #[arg(long, conflicts_with = "path")]
    pub clique: Option<usize>,
    #[arg(long)]
    pub path: Option<usize>,
    #[arg(long, value_enum, default_value = "4")]
    pub neighborhood: NeighborhoodChoice,
    #[arg(long)]
    pub agents_a: usize,
    #[arg(long)]
    pub agents_b: usize,
    #[arg(long, default_value_t = schelling::qubo::DEFAULT_QUBO_VERTEX_CAP)]
    pub vertex_cap: usize,
    /// Also minimize exhaustively (at most 24 qubits).
    #[arg(long)]
    pub minimize: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WalksCommand {
    /// Walk on the n-cube from 0ⁿ to 1ⁿ.
    Hypercube(HypercubeArgs),
    /// Classical random walk on a welded tree through query oracles.
    WeldedTree(WeldedTreeArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct HypercubeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = u64::MAX)]
    pub max_steps: u64,
    /// Also print the exact expected hitting time.
    #[arg(long)]
    pub exact: bool,
    /// Print only aggregate statistics.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct WeldedTreeArgs {
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 100_000_000)]
    pub max_queries: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct OracleArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub state_cap: usize,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad grid dimension {t:?}"))
    };
    Ok((parse(r)?, parse(c)?))
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "drinfeld", version, about = "Wieferich places, ordic valuations and L-values of Drinfeld models over F_q[t]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate places by degree and report the Wieferich ones.
    Search(SearchArgs),
    /// Normalized Wieferich counts per degree over a universe of small models.
    Stats(StatsArgs),
    /// The p-adic L-value L_p(phi;1), or the special value with --special.
    Lvalue(LvalueArgs),
    /// The ordic valuation c_p(phi;x).
    Cvalue(CvalueArgs),
    /// Decide whether p is Wieferich in base x with a chosen test.
    Wieferich(WieferichArgs),
    /// The local factor P_p(phi;T).
    Factor(FactorArgs),
    /// The Taelman unit u_phi(T).
    Unit(UnitArgs),
    /// Run invariant suites: `all`, a module name, a suite name, or `euler`.
    Check(CheckArgs),
    /// List the places of F_q[t] up to a degree.
    Places(PlacesArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Field size, a prime power.
    #[arg(long, default_value_t = 3, env = "DRINFELD_Q")]
    pub q: u32,
    /// Defining polynomial of F_q over F_p, in z (e.g. "z^2+z+1").
    #[arg(long)]
    pub modulus: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// `carlitz` or phi_t written in t and tau, e.g. "t + (t^3)*tau".
    #[arg(long, default_value = "carlitz")]
    pub model: String,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the result to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the configuration header.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub max_degree: usize,
    /// Base point x.
    #[arg(long, default_value = "1")]
    pub base: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0, env = "DRINFELD_WORKERS")]
    pub workers: usize,
    /// Checkpoint file; an existing one is resumed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Candidates between checkpoint writes.
    #[arg(long, default_value_t = drinfeld_core::search::DEFAULT_CHECKPOINT_EVERY, env = "DRINFELD_CHECKPOINT_EVERY")]
    pub checkpoint_every: u64,
    /// Stop after this many candidates (the checkpoint allows resuming).
    #[arg(long, env = "DRINFELD_SEARCH_BUDGET")]
    pub budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankLawArg {
    AtMost,
    Exactly,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub rank: usize,
    /// Degree range `a..b` (inclusive) or a single degree.
    #[arg(long)]
    pub degrees: String,
    /// Monte Carlo sample count.
    #[arg(long, conflicts_with = "exhaustive")]
    pub samples: Option<u64>,
    /// Enumerate the whole universe.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest universe enumerated exhaustively.
    #[arg(long, default_value_t = drinfeld_core::stats::DEFAULT_EXHAUSTIVE_THRESHOLD, env = "DRINFELD_EXHAUSTIVE_THRESHOLD")]
    pub exhaustive_threshold: u128,
    /// Universe of small models of rank at most r, or exactly r.
    #[arg(long, value_enum, default_value_t = RankLawArg::AtMost)]
    pub rank_law: RankLawArg,
    /// Classify torsion by the Fitting ideal at this place instead of the exact oracle (diagnostic).
    #[arg(long)]
    pub torsion_place: Option<String>,
    #[arg(long, default_value_t = 0, env = "DRINFELD_WORKERS")]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpRouteArg {
    Auto,
    Euler,
    Unit,
}

#[derive(Args, Debug)]
pub struct LvalueArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub place: String,
    /// Absolute p-adic precision.
    #[arg(long, default_value_t = 5, env = "DRINFELD_PREC")]
    pub prec: i64,
    #[arg(long, value_enum, default_value_t = LpRouteArg::Auto)]
    pub route: LpRouteArg,
    /// Divide by the largest power of T - 1 first.
    #[arg(long)]
    pub special: bool,
    #[arg(long, default_value_t = 0, env = "DRINFELD_WORKERS")]
    pub workers: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CvalueArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub place: String,
    #[arg(long, default_value = "1")]
    pub base: String,
    #[arg(long, default_value_t = drinfeld_core::wieferich::DEFAULT_CMAX, env = "DRINFELD_CMAX")]
    pub cmax: u64,
    /// Ordic valuation route.
    #[arg(long, default_value = "formula")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct WieferichArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub place: String,
    #[arg(long, default_value = "1")]
    pub base: String,
    /// Wieferich test: compact, krylov, fitting or definition.
    #[arg(long, default_value = "fitting")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FactorArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub place: String,
    /// determinant or dual.
    #[arg(long, default_value = "determinant")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct UnitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Truncation order for models that are not small.
    #[arg(long, default_value_t = drinfeld_core::lseries::MAX_UNIT_ORDER, env = "DRINFELD_UNIT_ORDER")]
    pub max_order: usize,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// `all`, `euler`, a module or a suite name.
    #[arg(default_value = "all")]
    pub target: String,
    #[arg(long, default_value_t = drinfeld_core::checks::DEFAULT_SEED)]
    pub seed: u64,
    /// Model for `check euler`.
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest place degree for `check euler`.
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PlacesArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub max_degree: usize,
    /// Only places satisfying (H).
    #[arg(long)]
    pub h_only: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

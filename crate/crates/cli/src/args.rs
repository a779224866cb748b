use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "landlord", version, about = "Online file caching experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a trace through Landlord and report every request.
    Run(RunArgs),
    /// Classify cache sizes 1..=N as bad or not for an algorithm.
    Sweep(SweepArgs),
    /// Exact offline optimum and one optimal schedule.
    Opt(OptArgs),
    /// Check every potential-function step against its bound.
    Audit(AuditArgs),
    /// Generate the adversarial paging sequence and check its structure.
    Gen(GenArgs),
    /// Evaluate the closed-form loose-competitiveness constants.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectorArg {
    All,
    Lru,
    Fifo,
    Pessimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GreedinessArg {
    AllZero,
    UntilRoom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    Landlord,
    Lru,
    Fifo,
    Fwf,
    Marking,
    Opt,
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    /// Hit refresh fraction in [0, 1].
    #[arg(long, default_value = "1")]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = SelectorArg::Lru)]
    pub selector: SelectorArg,
    #[arg(long, value_enum, default_value_t = GreedinessArg::UntilRoom)]
    pub greediness: GreedinessArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub cache_size: u64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Largest cache size N.
    #[arg(long)]
    pub range: u64,
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub delta: String,
    #[arg(long, value_enum, default_value_t = AlgArg::Landlord)]
    pub alg: AlgArg,
    /// Mandatory for marking.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the constant c (defaults to the closed-form bound for the algorithm).
    #[arg(long)]
    pub c: Option<String>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub cache_size: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Landlord's cache size k.
    #[arg(long)]
    pub cache_size: u64,
    /// The optimum's cache size h (defaults to k).
    #[arg(long)]
    pub opt_size: Option<u64>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Largest cache size n; defaults to the smallest admissible one.
    #[arg(long)]
    pub range: Option<u64>,
    /// Explicit levels k_0,k_1,... instead of epsilon/delta.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["epsilon", "delta", "range"])]
    pub levels: Option<Vec<u64>>,
    /// Trace file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Also measure fault rates (FWF, LRU, pessimal Landlord).
    #[arg(long)]
    pub measure: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub delta: String,
    /// Randomized bound coefficients; default to the marking algorithm's.
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    /// Also route the bounds through the technical lemma at this n.
    #[arg(long)]
    pub range: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

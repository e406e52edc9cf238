use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "simpson",
    version,
    about = "Detect, construct and size Simpson's-paradox reversals in categorical trial data"
)]
pub struct Cli {
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare pooled and stratified treatment effects in a CSV
    Analyze(AnalyzeArgs),
    /// Search covariate subsets that reverse the pooled effect
    Scan(ScanArgs),
    /// Build the hidden-confounder network and certify the reversal
    Generate(GenerateArgs),
    /// Query recovery probabilities with the confounder observed or hidden
    Infer(InferArgs),
    /// Sample a synthetic trial to CSV
    Simulate(SimulateArgs),
    /// Control-group counts and subject requirements for a factorial design
    Design(DesignArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV (header row required)
    pub csv: PathBuf,

    /// Input holds one row per state combination plus a `count` column
    #[arg(long)]
    pub counts: bool,

    /// Treatment column
    #[arg(long, default_value = "Drug")]
    pub treatment: String,

    /// Treated state [default: `true` or `Yes`, whichever the column uses]
    #[arg(long)]
    pub treated: Option<String>,

    /// Control state [default: `false` or `No`, whichever the column uses]
    #[arg(long)]
    pub control: Option<String>,

    /// Outcome column
    #[arg(long, default_value = "Recovered")]
    pub outcome: String,

    /// Success state [default: `true` or `Yes`, whichever the column uses]
    #[arg(long)]
    pub success: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated stratification columns; omit for an aggregate-only report
    #[arg(long, value_delimiter = ',')]
    pub strata: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Largest covariate subset to try
    #[arg(long, default_value_t = 2)]
    pub max_subset_size: usize,
}

/// Network parameters: a JSON spec file, `--n` with reference values, or
/// either of those with individual overrides.
#[derive(Debug, Args)]
pub struct SpecArgs {
    /// JSON spec file
    #[arg(long, conflicts_with = "n")]
    pub spec: Option<PathBuf>,

    /// Number of X variables, using reference values for everything else
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub p3: Option<f64>,
    #[arg(long)]
    pub p4: Option<f64>,
    /// P(Drug | Xn = true)
    #[arg(long)]
    pub p: Option<f64>,
    /// P(Drug | Xn = false)
    #[arg(long)]
    pub q: Option<f64>,
    /// P(Xn = true)
    #[arg(long)]
    pub prior_xn: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    /// Write the full recovery table as CSV to this path
    #[arg(long)]
    pub npt: Option<PathBuf>,

    /// Write the resolved spec as JSON to this path
    #[arg(long)]
    pub write_spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    /// 1: confounder observed, 2: confounder hidden
    #[arg(long = "case", value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,

    /// Confounder state (case 1 only)
    #[arg(long, action = clap::ArgAction::Set)]
    pub xn: Option<bool>,

    /// Drug taken
    #[arg(long, action = clap::ArgAction::Set)]
    pub d: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    /// Number of records
    #[arg(long)]
    pub size: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV path
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Factors as `name:cardinality` or `name:state1,state2,...`
    #[arg(required_unless_present = "spec", conflicts_with = "spec")]
    pub factors: Vec<String>,

    /// JSON design file (`factors` and `min_per_group`) instead of positional factors
    #[arg(long)]
    pub spec: Option<PathBuf>,

    /// Minimum subjects per control group [default: 50, or the spec file's value]
    #[arg(long)]
    pub min_per_group: Option<u64>,

    /// Split this many subjects evenly over the groups
    #[arg(long)]
    pub total: Option<u64>,

    /// Write the materialized groups as CSV (needs --total)
    #[arg(long, requires = "total")]
    pub csv: Option<PathBuf>,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "subconv", version, about = "Subsequence convergence experiments for difference equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Machine-readable JSON on stdout
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the main output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Zero tolerance for `analyze`, consistency tolerance for `fold`
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for random initial points in batch runs
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Iterate a model and write its trajectory
    Simulate(RunArgs),
    /// Iterate a model and report which subsequences provably tend to 0
    Analyze(AnalyzeArgs),
    /// Fixed points and convergence threshold of a model
    Threshold(ModelArgs),
    /// Fold a planar or three-dimensional system into one equation and check it
    Fold(RunArgs),
    /// List the built-in models
    Models,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Initial values, comma separated (x_0,...,x_{m-1} or x,y or x,y,z)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,

    /// Number of iterations
    #[arg(long)]
    pub steps: Option<usize>,

    /// Trajectory output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// JSON experiment config, or a trajectory written by `simulate --format json`
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Which bound to use when a model carries two
    #[arg(long, value_enum)]
    pub bound: Option<BoundChoice>,

    /// Analyze this many random initial points instead of --init
    #[arg(long)]
    pub batch: Option<usize>,

    /// Upper end of the box random initial points are drawn from
    #[arg(long, default_value_t = 3.0)]
    pub init_max: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundChoice {
    /// The bound attached to the model (the figure bound for sp3)
    #[default]
    Figure,
    /// The alternate analytic bound, where one exists
    Rigorous,
}

/// Model selection. Sequence-valued parameters accept `v` for a constant or
/// `v1:v2:...` for a periodic sequence.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Catalog name (see `subconv models`)
    #[arg(long)]
    pub model: Option<String>,
    /// Dominant lag
    #[arg(long)]
    pub k: Option<usize>,
    /// Denominator lag (sigmoid-bh)
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Ricker: comma-separated b_1,...,b_m; sigmoid-bh: shift b; threed: scalar b
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub d: Option<f64>,
    /// sigmoid-bh: exponent as n or n/d with d odd; threed: sequence p_n
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub r1: Option<String>,
    #[arg(long)]
    pub a1: Option<String>,
    #[arg(long)]
    pub b1: Option<String>,
    #[arg(long)]
    pub r2: Option<String>,
    #[arg(long)]
    pub a2: Option<String>,
    #[arg(long)]
    pub b2: Option<String>,
    #[arg(long)]
    pub delta1: Option<f64>,
    /// Defaults to delta1
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Defaults to 1
    #[arg(long)]
    pub delta3: Option<f64>,
    /// Defaults to 1
    #[arg(long)]
    pub delta4: Option<f64>,
}

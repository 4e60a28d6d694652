use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sheetarena", version, about = "Spreadsheet preference arena: features, fits, reports, simulation and serving")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the 29 workbook features into a CSV (or JSON) matrix.
    Features(FeaturesArgs),
    /// Fit baseline and feature-adjusted ratings from a vote log.
    Fit(FitArgs),
    /// Draw a synthetic vote log from planted strengths and feature effects.
    Simulate(SimulateArgs),
    /// Run the arena HTTP service.
    Serve(ServeArgs),
    /// Render a fit bundle as markdown and CSV tables.
    Report(ReportArgs),
}

/// Settings shared by several commands. Flags win over the config file,
/// which wins over `SHEETARENA_*` environment variables.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML config file (default: $SHEETARENA_CONFIG).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Models with fewer votes are left unranked.
    #[arg(long)]
    pub min_votes: Option<usize>,
    /// Model pinned to Elo 1000.
    #[arg(long)]
    pub anchor: Option<String>,
    /// Ridge penalty on strengths and coefficients.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Workbook files or directories of `*.json` workbooks.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Write here instead of stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FeatureFormat::Csv)]
    pub format: FeatureFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    PerBattle,
    ModelMean,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Vote log (JSONL).
    #[arg(long)]
    pub votes: PathBuf,
    /// Feature CSV keyed by workbook_id.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Also fit with feature covariates.
    #[arg(long)]
    pub adjusted: bool,
    /// Restrict to one category, or "Finance" for both finance categories.
    #[arg(long)]
    pub category: Option<String>,
    /// How feature differences enter the adjusted fit.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Add a table per category.
    #[arg(long)]
    pub domains: bool,
    /// Write the bundle as JSON here; otherwise print markdown.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 16)]
    pub models: usize,
    #[arg(long, default_value_t = 5000)]
    pub votes: usize,
    /// Comma-separated strengths, one per model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Evenly spaced strengths on [-range, range] instead of random draws.
    #[arg(long)]
    pub spaced: bool,
    #[arg(long, default_value_t = 2.0)]
    pub theta_range: f64,
    /// Planted feature `NAME=BETA`, or `NAME=BETA@CATEGORY` to confine the effect.
    #[arg(long = "feature")]
    pub features: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub tie_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub both_bad_rate: f64,
    /// Output directory for votes.jsonl, features.csv and truth.json.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Listen address.
    #[arg(long)]
    pub bind: Option<String>,
    /// Event log path.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Serve fixture documents instead of calling model providers.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Categorizer seed prompts (JSONL with embeddings).
    #[arg(long)]
    pub seeds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Bundle written by `fit --out`.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Failure tags (JSONL) to add a per-model tag table.
    #[arg(long)]
    pub tags: Option<PathBuf>,
    /// Directory for report.md and CSV tables; otherwise print markdown.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

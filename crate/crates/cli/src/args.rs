use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bcr", version, about = "Bayesian compressed regression")]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file with defaults for any long flag (snake_case keys).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an ensemble to a CSV file and save it.
    Fit(FitArgs),
    /// Predict mean and interval for every row of a CSV file.
    Predict(PredictArgs),
    /// Run simulation scenarios and write metric reports.
    Simulate(SimulateArgs),
    /// Collect JSON reports into one table.
    Report(ReportArgs),
}

/// Ensemble overrides shared by `fit` and `simulate`.
#[derive(Debug, Clone, Default, Args)]
pub struct EnsembleFlags {
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Number of ensemble members.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub psi_low: Option<f64>,
    #[arg(long)]
    pub psi_high: Option<f64>,
    /// Prior variance of the compressed coefficients.
    #[arg(long)]
    pub prior_variance: Option<f64>,
    /// Predictive interval level.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    pub response: Option<String>,
    /// Where to write the model artifact.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    #[command(flatten)]
    pub ensemble: EnsembleFlags,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model artifact written by `fit`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// Column to drop before predicting (e.g. the response of a training file).
    #[arg(long)]
    pub response: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    #[value(name = "BCR", alias = "bcr")]
    Bcr,
    #[value(name = "ridge", alias = "RIDGE")]
    Ridge,
    #[value(name = "both", alias = "BOTH")]
    Both,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated scenario names (M1..M6, HD1, HD2, HD1-<p>, HD2-<p>).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the reports.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub ensemble: EnsembleFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report files, or directories to scan for `*.json`.
    #[arg(required = true, value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: TableFormat,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

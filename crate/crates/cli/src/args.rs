//! Command-line surface. Most value flags are optional here so the config
//! file can supply them; resolution order is flag, then config, then default.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "arrisk",
    version,
    about = "Rank-based AR fitting and innovation tail-risk estimation"
)]
pub struct Cli {
    /// Master seed for simulation and benchmark runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Flat key=value file supplying defaults for long option names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory receiving default-named artifacts (created if absent).
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Encoding of the primary artifact, where the subcommand supports it.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Text => "text",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::error::CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(crate::error::CliError::usage(format!(
                "unknown format {other:?}; choose csv, json or text"
            ))),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an autoregressive series and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit autoregressive coefficients to a series file.
    Fit(FitArgs),
    /// Estimate VaR/CVaR from a sample file, optionally fitting an AR first.
    Risk(RiskArgs),
    /// Run the Monte Carlo benchmark grid and write result tables.
    Bench(BenchArgs),
    /// Ingest a daily gauge CSV, fit, and report residual tail risk.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Parser)]
pub struct SimulateArgs {
    /// Slope coefficients, most recent lag first, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub phi: Vec<f64>,

    /// Intercept of the recursion (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub intercept: Option<f64>,

    /// Length of the emitted series.
    #[arg(long)]
    pub n: usize,

    /// Innovation scenario: normal, t3, mixture, contamination.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Steps discarded before the kept sample.
    #[arg(long)]
    pub burn_in: Option<usize>,

    /// Output file (default <out-dir>/series.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct FitArgs {
    /// Series CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Column holding the series values.
    #[arg(long)]
    pub column: Option<String>,

    /// Autoregression order.
    #[arg(long)]
    pub p: Option<usize>,

    /// r = rank dispersion fit (no intercept); arq = check-loss fit
    /// (intercept plus slopes).
    #[arg(long, value_enum)]
    pub method: Option<FitMethod>,

    /// Score level for the rank fit.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Quantile level for the check-loss fit.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Output file (default <out-dir>/fit.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    R,
    Arq,
}

impl std::str::FromStr for FitMethod {
    type Err = crate::error::CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r" => Ok(FitMethod::R),
            "arq" => Ok(FitMethod::Arq),
            other => Err(crate::error::CliError::usage(format!(
                "unknown fit method {other:?}; choose r or arq"
            ))),
        }
    }
}

#[derive(Debug, Parser)]
pub struct RiskArgs {
    /// Sample CSV with a header row; innovations unless --p is given.
    #[arg(long)]
    pub input: PathBuf,

    /// Column holding the values.
    #[arg(long)]
    pub column: Option<String>,

    /// Levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Treat the input as a raw series: fit an AR(p) by rank dispersion and
    /// estimate risk from its residuals.
    #[arg(long)]
    pub p: Option<usize>,

    /// Score level for the rank fit when --p is given.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Output file (default <out-dir>/risk.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct BenchArgs {
    /// Grid layout; "benchmark" is the full model/scenario/size grid.
    #[arg(long)]
    pub grid: Option<String>,

    /// Monte Carlo replications per cell.
    #[arg(long)]
    pub replications: Option<usize>,

    /// Basename for the emitted files (default <out-dir>/bench.*).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct AnalyzeArgs {
    /// Daily gauge CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Station label for the report (default: input file stem).
    #[arg(long)]
    pub label: Option<String>,

    /// Header name of the date column.
    #[arg(long)]
    pub date_column: Option<String>,

    /// Header name of the value column.
    #[arg(long)]
    pub value_column: Option<String>,

    /// chrono format string for dates.
    #[arg(long)]
    pub date_format: Option<String>,

    /// Autoregression order.
    #[arg(long)]
    pub p: Option<usize>,

    /// Score level for the rank fit.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Risk levels reported, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Level whose VaR defines exceedance flags.
    #[arg(long)]
    pub flag_level: Option<f64>,

    /// Report file (default <out-dir>/analysis.json).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Exceedance-date CSV (default <out-dir>/exceedances.csv).
    #[arg(long)]
    pub exceedance_out: Option<PathBuf>,
}

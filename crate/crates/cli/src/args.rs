use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "socmed", version, about = "Sentiment index validation and pseudo survey construction")]
pub struct Cli {
    /// Output file, or output directory for `pipeline` and `simulate`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output format where a subcommand supports more than one.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monthly sentiment index from classified posts.
    Smi(SmiArgs),
    /// Test whether benchmark and index differ by a constant over time.
    Validate(ValidateArgs),
    /// p-value of the validation test across benchmark CVs.
    Sensitivity(SensitivityArgs),
    /// Monte Carlo rejection rate of the validation test under the null.
    Calibrate(CalibrateArgs),
    /// Build the pseudo survey dataset from geolocated posts.
    Pipeline(PipelineArgs),
    /// Generate a synthetic dataset with ground truth.
    Simulate(SimulateArgs),
    /// Compare pseudo survey records with simulator ground truth.
    Quality(QualityArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SmiArgs {
    /// CSV with `post_id,account_id,timestamp,sentiment`.
    pub posts: PathBuf,
}

/// Paired-series input; `@bundled` selects the bundled 27-month fixture.
#[derive(Clone, Debug, Args, Serialize)]
pub struct SeriesArgs {
    /// CSV with `period,cci,smi[,sigma]`, or `@bundled`.
    pub series: String,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: SeriesArgs,
    /// Benchmark coefficient of variation: sigma_t = cv * |cci_t|.
    #[arg(long)]
    pub cv: Option<f64>,
    /// Take sigma_t from the series' `sigma` column.
    #[arg(long)]
    pub sigma_column: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Zero-based component dropped before whitening; defaults to the last.
    #[arg(long)]
    pub deleted_index: Option<usize>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub input: SeriesArgs,
    #[arg(long, default_value_t = 0.05)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub input: SeriesArgs,
    #[arg(long)]
    pub cv: Option<f64>,
    #[arg(long)]
    pub sigma_column: bool,
    /// Constant offset under the null.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 10_000)]
    pub sims: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PipelineArgs {
    /// Streaming API extract, GeoPost JSONL.
    #[arg(long)]
    pub api: PathBuf,
    /// Broker extract, GeoPost JSONL.
    #[arg(long)]
    pub broker: PathBuf,
    /// CSV with `address_id,lat,lon,address_type`.
    #[arg(long)]
    pub gazetteer: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 3)]
    pub min_points: usize,
    #[arg(long, default_value = "GB")]
    pub country: String,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// JSON simulation config.
    pub config: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct QualityArgs {
    /// PseudoSurveyRecord JSONL.
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub ground_truth: PathBuf,
}

//! Command-line front end: argument parsing, configuration and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use imbrisk::ErrorCategory;

pub const LOG_ENV: &str = "IMBRISK_LOG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] imbrisk::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for data problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numeric => 3,
            },
            CliError::Io { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "imbrisk", version, about = "Resampling, cross-validation and ensembles for imbalanced binary risk data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic imbalanced dataset as CSV.
    Generate(GenerateArgs),
    /// Drop sparse columns, impute and standardize a CSV.
    Preprocess(PreprocessArgs),
    /// Resample a CSV to a target positive rate.
    Resample(ResampleArgs),
    /// Fit one model on a whole CSV and save it.
    Train(TrainArgs),
    /// Append a score column to a CSV using a saved model.
    Score(ScoreArgs),
    /// Run the full cross-validated workflow and write a run directory.
    Experiment(ExperimentArgs),
    /// Summarize a saved experiment report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Name of the 0/1 target column.
    #[arg(long, default_value = config::DEFAULT_TARGET)]
    pub target: String,
    /// Cell text that marks a missing value.
    #[arg(long, default_value = config::DEFAULT_MISSING_TOKEN)]
    pub missing_token: String,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Config file; its seed and [synthetic] section are used.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub positive_rate: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
    /// Name of the target column to write.
    #[arg(long, default_value = config::DEFAULT_TARGET)]
    pub target: String,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Columns missing in more than this fraction of rows are dropped.
    #[arg(long, default_value_t = 0.7)]
    pub missing_threshold: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the fitted statistics as JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// RUS, CCUS, ROS or SMOTE.
    #[arg(long, short)]
    pub method: String,
    /// Target positive fraction in (0, 1).
    #[arg(long, short)]
    pub ratio: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub smote_k: usize,
    #[arg(long, default_value_t = 100)]
    pub kmeans_max_iter: usize,
    /// Impute and standardize (fitted on the input) before resampling.
    #[arg(long)]
    pub preprocess: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Config file supplying hyperparameters and the seed.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// LR, L1LR or DT.
    #[arg(long)]
    pub classifier: String,
    /// bagging or boosting (DT only).
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Resampler applied before training; `original` trains on the data as is.
    #[arg(long, default_value = "original")]
    pub method: String,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// L1 penalty for L1LR.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model file written by `train` or `experiment`.
    #[arg(long, short)]
    pub model: PathBuf,
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = config::DEFAULT_MISSING_TOKEN)]
    pub missing_token: String,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Grid worker threads; 0 means available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Use this CSV instead of the configured data source.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub target: Option<String>,
    #[arg(long, requires = "input")]
    pub missing_token: Option<String>,
    /// Use the synthetic generator instead of the configured data source.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// report.json or the run directory containing it.
    pub path: PathBuf,
    /// Print the report as JSON instead of a text summary.
    #[arg(long)]
    pub json: bool,
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! The `fdpnet` command line: corpus generation, training-set extraction,
//! network training, SNR-sweep evaluation and selection on external data.
//!
//! Exit codes: 0 success, 2 usage error, 3 data validation error,
//! 4 numerical failure, 1 anything else (for instance an unwritable output).

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, DummyCount, List, Resolver, KNOWN_KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Invalid or missing settings, detected before any work starts.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "fdpnet",
    version,
    about = "FDR-calibrated variable selection with an analytical or a learned FDP estimator",
    after_help = "Settings resolve as: command-line flag, then `--config` file entry (key = value, keys named \
                  like the long flags), then the documented default.\n\
                  Exit codes: 0 ok, 2 usage error, 3 data validation error, 4 numerical failure, 1 other failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus and its manifest (manifest.jsonl).
    Datagen(DatagenArgs),
    /// Extract labeled (phi, v, T, L) records from every system of a manifest (train_set.txt).
    BuildTrainSet(BuildTrainSetArgs),
    /// Train the FDP network on a training set (model.fdpnet, loss_trace.csv).
    Train(TrainArgs),
    /// Compare the analytical and learned estimators on a test manifest (results.csv, aggregate.csv, surface.csv).
    Evaluate(EvaluateArgs),
    /// Run the selector on CSV data (report.json, occurrence.csv).
    Select(SelectArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment file with `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: .].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelectorArgs {
    /// Random experiments K [default: 20].
    #[arg(long)]
    pub k: Option<usize>,
    /// Dummies per experiment L, a count or `p` [default: p].
    #[arg(long)]
    pub l: Option<DummyCount>,
    /// Largest dummy count T searched [default: 10].
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    /// Voting thresholds, comma separated, in [0.5, 1) [default: 0.5,0.55,...,0.95].
    #[arg(long = "v-grid", value_name = "LIST")]
    pub v_grid: Option<List<f64>>,
    /// Occurrence deflation of the analytical estimator: dummy-rate or linear [default: dummy-rate].
    #[arg(long)]
    pub deflation: Option<fdpnet_core::Deflation>,
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of systems [default: 2000].
    #[arg(long)]
    pub systems: Option<usize>,
    /// Samples per system [default: 15].
    #[arg(long)]
    pub n: Option<usize>,
    /// Predictors per system [default: 30].
    #[arg(long)]
    pub p: Option<usize>,
    /// Active predictors per system [default: 3].
    #[arg(long)]
    pub s: Option<usize>,
    /// SNR levels, comma separated [default: 0.3,1,3].
    #[arg(long, value_name = "LIST")]
    pub snr: Option<List<f64>>,
    /// Design families: `training` (the fourteen training families), or a comma-separated list such as `gmm` [default: training].
    #[arg(long, value_name = "LIST")]
    pub families: Option<String>,
    /// Coefficient magnitude range `lo,hi` [default: 1,3].
    #[arg(long = "beta-range", value_name = "LO,HI")]
    pub beta_range: Option<List<f64>>,
    /// Also write systems/NNNNNN_x.csv and systems/NNNNNN_y.csv per system [default: off].
    #[arg(long = "dump-csv")]
    pub dump_csv: bool,
}

#[derive(Debug, Args)]
pub struct BuildTrainSetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Corpus manifest written by `datagen`; required.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Training set written by `build-train-set`; required.
    #[arg(long = "train-set", value_name = "FILE")]
    pub train_set: Option<PathBuf>,
    /// Training epochs [default: 10].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate [default: 0.001].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Mini-batch size [default: 256].
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    /// Underestimation weight w of the asymmetric loss, > 1 [default: 1.1].
    #[arg(long)]
    pub w: Option<f64>,
    /// Padded input width [default: largest p in the training set].
    #[arg(long = "p-max")]
    pub p_max: Option<usize>,
    /// Normalizer of the T feature [default: 10].
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Test-corpus manifest written by `datagen`; required.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Trained model file; required.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Target FDR level in (0, 1]; required.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Design matrix CSV (n rows, p numeric columns); required.
    #[arg(long, value_name = "FILE")]
    pub x: Option<PathBuf>,
    /// Response CSV (n rows, one column; 0/1 allowed); required.
    #[arg(long, value_name = "FILE")]
    pub y: Option<PathBuf>,
    /// Both CSV files start with a header row [default: off].
    #[arg(long)]
    pub header: bool,
    /// File of 0-based indices of truly active columns, one per line; adds FDP/TPP to the report.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    /// Trained model file; required for the learned estimator.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// FDP estimator: analytical or learned [default: learned with --model, else analytical].
    #[arg(long)]
    pub estimator: Option<String>,
    /// Target FDR level in (0, 1]; required.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

/// Classifies an error chain into an exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<fdpnet_core::Error>() {
            return match e {
                _ if e.is_numerical() => EXIT_NUMERICAL,
                _ if e.is_data_error() => EXIT_DATA,
                fdpnet_core::Error::Argument(_) | fdpnet_core::Error::Parameter(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("error: {err:#}");
            if code == EXIT_USAGE {
                eprintln!("\nFor usage, run `fdpnet <COMMAND> --help`.");
            }
            code
        }
    }
}

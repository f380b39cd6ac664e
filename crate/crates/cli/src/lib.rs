//! The `densray` command-line tool.
//!
//! Exit codes: `0` success, `1` usage error, `2` data error, `3` numerical
//! failure.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use densray_core::ErrorCategory;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] densray_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numeric => 3,
            },
            CliError::Output { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "densray",
    version,
    about = "Interpretable rotations of word-embedding spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a rotation or linear model on a lexicon.
    Train(TrainArgs),
    /// Lexicon induction: predict scores for held-out words, report Kendall's tau.
    Induce(InduceArgs),
    /// Set-based word analogy under leave-one-pair-out.
    Analogy(AnalogyArgs),
    /// Remove a learned bias dimension and report word bias.
    Debias(DebiasArgs),
    /// Induction quality over random subsamples of the training lexicon.
    Stability(StabilityArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Word embeddings in word2vec text format.
    #[arg(long)]
    pub emb: Option<PathBuf>,
    /// Keep only the first N embedding rows.
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Lowercase lexicon, dataset and probe tokens before lookup.
    #[arg(long)]
    pub lowercase: bool,
    /// Seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Classifier settings.
#[derive(Debug, Args)]
pub struct TrainerArgs {
    /// DensRay pair weights: `averaged` or `<unequal>,<equal>`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Regularization trade-off C.
    #[arg(long)]
    pub c: Option<f64>,
    /// SVR insensitivity (standardized units).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning-rate schedule.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Weight samples by inverse class frequency.
    #[arg(long)]
    pub balanced: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    /// Lexicon TSV (`token<TAB>score`).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// `binary` or `continuous`.
    #[arg(long)]
    pub kind: Option<String>,
    /// `densray`, `svm`, `svr` or `logreg`.
    #[arg(long)]
    pub method: Option<String>,
    /// For linear methods, write a full rotation instead of the model.
    #[arg(long)]
    pub rotation: bool,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    /// Training lexicon; repeat for several tasks, paired with --test in order.
    #[arg(long)]
    pub train: Vec<String>,
    /// Test lexicon; one per --train.
    #[arg(long)]
    pub test: Vec<String>,
    /// `binary` or `continuous`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Comma-separated subset of densray, svm, svr, logreg.
    #[arg(long)]
    pub methods: Option<String>,
    /// Report file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalogyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    /// Google Analogy file or BATS directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Comma-separated subset of intcos-densray, intcos-svm, lrcos.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated subset of original, complement.
    #[arg(long)]
    pub space: Option<String>,
    /// Allow fold training words as predictions.
    #[arg(long)]
    pub include_train_words: bool,
    /// Report file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DebiasArgs {
    #[command(flatten)]
    pub common: Common,
    /// DensRay pair weights: `averaged` or `<unequal>,<equal>`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Word pairs (`a<TAB>b` per line) defining the bias direction.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// JSON list of words to score.
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    /// The two probe words, `A,B`.
    #[arg(long)]
    pub probes: Option<String>,
    /// Number of leading rotated dimensions to remove.
    #[arg(long)]
    pub drop: Option<usize>,
    /// Number of most and least biased words listed per space.
    #[arg(long)]
    pub top: Option<usize>,
    /// Renormalize complement rows to unit length.
    #[arg(long)]
    pub renormalize: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// `binary` or `continuous`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Comma-separated subset of densray, svm, svr, logreg.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated training-lexicon sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Subsamples per size.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line surface of `bipolkit`.

use std::ffi::OsString;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use bipolkit_core::agreement::DEFAULT_GOLD_THRESHOLD;
use bipolkit_core::EmptyAxisMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::corpus::{Format, InputSpec};
use crate::parallel::{thread_pool, threads_from_env};

#[derive(Debug, Parser)]
#[command(
    name = "bipolkit",
    version,
    about = "Estimate social bias in text corpora with the bipol metric"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean, deduplicate and write a corpus.
    Clean(CleanArgs),
    /// Train the built-in bag-of-words classifier.
    Train(TrainArgs),
    /// Compute bipol over a corpus.
    Eval(EvalArgs),
    /// Compute the lexica-only baseline over a corpus.
    Baseline(BaselineArgs),
    /// Inter-annotator agreement and gold gating.
    Agree(AgreeArgs),
    /// Plan an annotation sample size.
    Samplesize(SampleSizeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Corpus file (CSV, TSV or JSONL).
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value = "comment_text")]
    pub text_col: String,
    #[arg(long, default_value = "label")]
    pub label_col: String,
}

impl InputArgs {
    pub fn spec(&self) -> InputSpec {
        InputSpec {
            path: self.input.clone(),
            format: self.format.unwrap_or_else(|| Format::infer(&self.input)),
            text_col: self.text_col.clone(),
            label_col: self.label_col.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    #[default]
    SkipEmpty,
    StrictZero,
}

impl From<Mode> for EmptyAxisMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::SkipEmpty => EmptyAxisMode::SkipEmpty,
            Mode::StrictZero => EmptyAxisMode::StrictZero,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Keep only the first N surviving rows (0 keeps all).
    #[arg(long, default_value_t = 0)]
    pub limit: usize,
    /// Cleaned CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of labeled rows held out for validation.
    #[arg(long, default_value_t = 0.2)]
    pub validation: f64,
    /// Additive smoothing constant.
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    /// Seed for the train/validation shuffle.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub limit: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Built-in model file.
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// External predictions (CSV `index,label,score`).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Evaluate the first N cleaned rows (0 evaluates all).
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    #[arg(long, value_enum, default_value_t = Mode::SkipEmpty)]
    pub mode: Mode,
    #[arg(long, default_value = "5")]
    pub top_k: NonZeroUsize,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Top-k CSV; defaults to `<out>.topk.csv` when --out is given.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
    /// Also write the step-one predictions as CSV.
    #[arg(long)]
    pub predictions_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    #[arg(long, value_enum, default_value_t = Mode::SkipEmpty)]
    pub mode: Mode,
    #[arg(long, default_value = "5")]
    pub top_k: NonZeroUsize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AgreeArgs {
    /// Annotation CSV `sample_id,annotator,label`.
    #[arg(long)]
    pub input: PathBuf,
    /// Gold CSV `sample_id,label`.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Correct gold answers needed to pass.
    #[arg(long, default_value_t = DEFAULT_GOLD_THRESHOLD)]
    pub threshold: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleSizeArgs {
    /// z-score of the confidence level.
    #[arg(long, conflicts_with = "confidence")]
    pub z: Option<f64>,
    /// Confidence level in percent (80, 90, 95, 98, 99); 95 when neither is given.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Error margin as a fraction, e.g. 0.07.
    #[arg(long)]
    pub margin: f64,
    /// Expected proportion.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
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
    let result = threads_from_env()
        .and_then(thread_pool)
        .and_then(|pool| pool.install(|| commands::dispatch(&cli.command)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

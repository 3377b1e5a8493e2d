use alloc::string::String;
use alloc::vec::Vec;

use crate::lexicon::Diagnostic;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("training data needs both classes (biased and unbiased)")]
    SingleClass,
    #[error("smoothing constant must be positive and finite, got {0}")]
    Smoothing(f64),
    #[error("duplicate sample index {0}")]
    DuplicateIndex(usize),
    #[error("no prediction for sample index {0}")]
    MissingPrediction(usize),
    #[error("no gold label for sample index {0}")]
    MissingGold(usize),
    #[error("unknown label {0:?} (expected \"biased\" or \"unbiased\")")]
    UnknownLabel(String),
    #[error("{what} must lie in {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("invalid lexicon: {}", summarize(.0))]
    InvalidLexicon(Vec<Diagnostic>),
    #[error("unsupported model version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },
    #[error("malformed model: {0}")]
    MalformedModel(&'static str),
    #[error("agreement needs at least 2 annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("annotator {annotator:?} has no label for sample {sample:?}")]
    MissingAnnotation { annotator: String, sample: String },
    #[error("annotator {annotator:?} labels sample {sample:?} more than once")]
    DuplicateAnnotation { annotator: String, sample: String },
    #[error("gold sample {0:?} is not part of the annotated samples")]
    UnknownGoldSample(String),
    #[error("no gold samples available")]
    NoGold,
}

fn summarize(diags: &[Diagnostic]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, d) in diags.iter().filter(|d| d.is_error()).enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{d}");
    }
    out
}

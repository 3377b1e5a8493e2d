//! Core algorithms for estimating social bias in text corpora.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. It provides:
//!
//! - [`textprep`]: deterministic cleaning, deduplication and tokenization.
//! - [`lexicon`]: axis → type → term lexica, validation and term matching.
//! - [`classifier`]: a multinomial bag-of-words model, prediction sets and
//!   binary classification metrics.
//! - [`bipol`]: the classification component, the sensitive-term component,
//!   their composition, the lexica baseline and frequency explanations.
//! - [`agreement`]: inter-annotator agreement, gold gating and sample sizing.
//!
//! File formats, parallel execution and the command line live in the
//! `bipolkit` crate, which builds on the per-sample functions exposed here so
//! that parallel runs reproduce sequential results bit for bit.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod agreement;
pub mod bipol;
pub mod classifier;
mod error;
mod label;
pub mod lexicon;
pub mod textprep;

pub use error::{Error, Result};
pub use label::Label;

pub use bipol::{BaselineReport, BipolReport, EmptyAxisMode, FrequencyTable, TermCount};
pub use classifier::{BowModel, ConfusionCounts, Prediction, PredictionSet};
pub use lexicon::{Lexicon, TermMatcher};
pub use textprep::{clean_corpus, clean_text, tokenize, CleanSample, RawSample};

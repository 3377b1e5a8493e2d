//! IO, file formats, parallel execution and the command line for bipolkit.
//!
//! The algorithms live in `bipolkit-core`; this crate reads corpora
//! (CSV, TSV, JSONL), lexica, models, prediction and annotation files,
//! runs the per-sample work on a rayon pool and writes JSON reports with
//! CSV plot-data sidecars.

pub mod annotations;
pub mod cli;
pub mod commands;
pub mod corpus;
mod error;
pub mod lexicon_file;
pub mod model_file;
pub mod parallel;
pub mod predictions;
pub mod report;

pub use error::{Error, Result};

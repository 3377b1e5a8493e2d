//! Command implementations. Each `run_*` function does the work and returns
//! the machine-readable result; [`dispatch`] writes it out.

use std::path::Path;

use bipolkit_core::agreement::{sample_size, z_for_confidence, AgreementReport};
use bipolkit_core::classifier::{confusion, gold_labels, ConfusionCounts};
use bipolkit_core::textprep::CleanStats;
use bipolkit_core::{BaselineReport, BipolReport, BowModel, CleanSample, Lexicon, TermMatcher};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annotations::load_annotations;
use crate::cli::{AgreeArgs, BaselineArgs, CleanArgs, Command, EvalArgs, SampleSizeArgs, TrainArgs};
use crate::corpus::{ingest, write_clean_corpus, Ingested};
use crate::lexicon_file::load_lexicon;
use crate::model_file::{load_model, save_model};
use crate::parallel::{self, Step1};
use crate::predictions::{read_predictions, write_predictions};
use crate::report::{self, emit, sidecar_path, write_top_k_csv};
use crate::{Error, Result};

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Clean(args) => {
            let stats = run_clean(args)?;
            eprintln!(
                "rows in: {}, rows out: {}, dropped empty: {}, dropped duplicate: {}",
                stats.rows_in, stats.rows_out, stats.dropped_empty, stats.dropped_duplicate
            );
            Ok(())
        }
        Command::Train(args) => emit(None, &report::to_json(&run_train(args)?)),
        Command::Eval(args) => {
            let (report, _) = run_eval(args)?;
            write_report(
                args.out.as_deref(),
                args.plot_csv.as_deref(),
                &report::bipol_json(&report, args.top_k.get()),
                || bipolkit_core::bipol::top_k_terms(&report.frequencies, args.top_k.get()),
            )
        }
        Command::Baseline(args) => {
            let report = run_baseline(args)?;
            write_report(
                args.out.as_deref(),
                args.plot_csv.as_deref(),
                &report::baseline_json(&report, args.top_k.get()),
                || bipolkit_core::bipol::top_k_terms(&report.frequencies, args.top_k.get()),
            )
        }
        Command::Agree(args) => emit(args.out.as_deref(), &report::to_json(&run_agree(args)?)),
        Command::Samplesize(args) => emit(args.out.as_deref(), &report::to_json(&run_samplesize(args)?)),
    }
}

fn write_report(
    out: Option<&Path>,
    plot_csv: Option<&Path>,
    json: &str,
    top_k: impl FnOnce() -> Vec<bipolkit_core::TermCount>,
) -> Result<()> {
    emit(out, json)?;
    let sidecar = plot_csv.map(Path::to_path_buf).or_else(|| out.map(sidecar_path));
    if let Some(path) = sidecar {
        write_top_k_csv(&path, &top_k())?;
    }
    Ok(())
}

fn ingest_reporting(args: &crate::cli::InputArgs, limit: usize) -> Result<Ingested> {
    let got = ingest(&args.spec(), limit)?;
    if got.samples.is_empty() {
        eprintln!("warning: {}: no rows survived cleaning", args.input.display());
    }
    Ok(got)
}

pub fn run_clean(args: &CleanArgs) -> Result<CleanStats> {
    let got = ingest_reporting(&args.input, args.limit)?;
    write_clean_corpus(
        args.out.as_deref(),
        &got.samples,
        &args.input.text_col,
        &args.input.label_col,
    )?;
    Ok(got.stats)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationMetrics {
    pub confusion: ConfusionCounts,
    pub macro_f1: f64,
    pub positive_error_rate: Option<f64>,
}

impl ValidationMetrics {
    pub fn of(model: &BowModel, samples: &[CleanSample]) -> Result<Self> {
        let pred = parallel::predict(model, samples);
        let cm = confusion(&pred, &gold_labels(samples))?;
        Ok(ValidationMetrics {
            confusion: cm,
            macro_f1: cm.macro_f1()?,
            positive_error_rate: cm.positive_error_rate(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub train_samples: usize,
    pub validation_samples: usize,
    pub vocabulary: usize,
    pub validation: Option<ValidationMetrics>,
}

/// Shuffles the labeled samples with `seed` and holds out `fraction` of them.
pub fn split_train_validation(
    mut labeled: Vec<CleanSample>,
    fraction: f64,
    seed: u64,
) -> (Vec<CleanSample>, Vec<CleanSample>) {
    labeled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = ((labeled.len() as f64) * fraction).floor() as usize;
    let validation = labeled.split_off(labeled.len() - held.min(labeled.len()));
    (labeled, validation)
}

pub fn run_train(args: &TrainArgs) -> Result<TrainSummary> {
    if !(0.0..1.0).contains(&args.validation) {
        return Err(Error::Usage(format!(
            "--validation must lie in [0, 1), got {}",
            args.validation
        )));
    }
    let got = ingest_reporting(&args.input, args.limit)?;
    let labeled: Vec<CleanSample> = got.samples.into_iter().filter(|s| s.label.is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::format(
            &args.input.input,
            format!("no labeled rows (label column {:?})", args.input.label_col),
        ));
    }
    let (train, validation) = split_train_validation(labeled, args.validation, args.seed);
    let model = BowModel::train(&train, args.smoothing)?;
    save_model(&args.out, &model)?;
    let metrics = if validation.is_empty() {
        None
    } else {
        Some(ValidationMetrics::of(&model, &validation)?)
    };
    Ok(TrainSummary {
        train_samples: train.len(),
        validation_samples: validation.len(),
        vocabulary: model.vocabulary.len(),
        validation: metrics,
    })
}

fn load_matcher(path: &Path) -> Result<TermMatcher> {
    let (lexicon, warnings): (Lexicon, _) = load_lexicon(path)?;
    for w in warnings {
        eprintln!("{}: {w}", path.display());
    }
    Ok(TermMatcher::new(&lexicon))
}

/// Runs both steps; also returns the evaluated samples' classifier metrics
/// when every one of them carries a gold label.
pub fn run_eval(args: &EvalArgs) -> Result<(BipolReport, Option<ValidationMetrics>)> {
    let matcher = load_matcher(&args.lexicon)?;
    let corpus = ingest_reporting(&args.input, args.limit)?.samples;
    let (evaluated, pred) = match (&args.model, &args.predictions) {
        (Some(path), None) => parallel::classify(&corpus, Step1::Model(&load_model(path)?), args.limit)?,
        (None, Some(path)) => parallel::classify(&corpus, Step1::Predictions(&read_predictions(path)?), args.limit)?,
        _ => {
            return Err(Error::Usage(
                "exactly one of --model and --predictions is required".into(),
            ))
        }
    };
    if let Some(path) = &args.predictions_out {
        write_predictions(path, &pred)?;
    }
    let report = parallel::evaluate_predicted(evaluated, &pred, &matcher, args.mode.into())?;
    let metrics = if evaluated.iter().all(|s| s.label.is_some()) {
        let cm = confusion(&pred, &gold_labels(evaluated))?;
        let m = ValidationMetrics {
            confusion: cm,
            macro_f1: cm.macro_f1()?,
            positive_error_rate: cm.positive_error_rate(),
        };
        eprintln!(
            "gold labels present: macro F1 {:.4}, positive error rate {}",
            m.macro_f1,
            m.positive_error_rate.map_or("n/a".to_string(), |e| format!("{e:.4}"))
        );
        Some(m)
    } else {
        None
    };
    Ok((report, metrics))
}

pub fn run_baseline(args: &BaselineArgs) -> Result<BaselineReport> {
    let matcher = load_matcher(&args.lexicon)?;
    let corpus = ingest_reporting(&args.input, args.limit)?.samples;
    parallel::baseline(&corpus, &matcher, args.mode.into())
}

pub fn run_agree(args: &AgreeArgs) -> Result<AgreementReport> {
    let matrix = load_annotations(&args.input, args.gold.as_deref())?;
    Ok(matrix.report(args.threshold)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSizePlan {
    pub z: f64,
    pub margin: f64,
    pub proportion: f64,
    pub sample_size: u64,
}

pub fn run_samplesize(args: &SampleSizeArgs) -> Result<SampleSizePlan> {
    let z = match (args.z, args.confidence) {
        (Some(z), _) => z,
        (None, Some(c)) => z_for_confidence(c).ok_or_else(|| {
            Error::Usage(format!(
                "unsupported --confidence {c}; use 80, 90, 95, 98, 99 or pass --z"
            ))
        })?,
        (None, None) => 1.96,
    };
    let n = sample_size(z, args.margin, args.p).map_err(|e| Error::Usage(e.to_string()))?;
    Ok(SampleSizePlan {
        z,
        margin: args.margin,
        proportion: args.p,
        sample_size: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bipolkit_core::Label;

    #[test]
    fn split_is_seeded() {
        let samples: Vec<CleanSample> = (0..10)
            .map(|i| CleanSample {
                index: i,
                text: format!("t{i}"),
                label: Some(Label::Biased),
            })
            .collect();
        let (a_train, a_val) = split_train_validation(samples.clone(), 0.3, 7);
        let (b_train, b_val) = split_train_validation(samples.clone(), 0.3, 7);
        assert_eq!((a_train.len(), a_val.len()), (7, 3));
        assert_eq!(a_train, b_train);
        assert_eq!(a_val, b_val);
        let (all, none) = split_train_validation(samples, 0.0, 7);
        assert_eq!((all.len(), none.len()), (10, 0));
    }
}

//! Rayon-backed versions of the per-sample pipeline.
//!
//! Workers produce per-sample results that are collected in corpus order and
//! merged by the same `bipolkit-core` functions the sequential path uses, so
//! reports do not depend on the worker count.

use bipolkit_core::bipol::{aggregate, apply_limit, biased_subset, score_sample, SensitiveSummary};
use bipolkit_core::{BaselineReport, BipolReport, BowModel, CleanSample, EmptyAxisMode, PredictionSet, TermMatcher};
use rayon::prelude::*;

use crate::{Error, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BIPOLKIT_THREADS";

/// Worker cap from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// A pool with `threads` workers (rayon's default when `None`).
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

/// Step one with the built-in model.
pub fn predict(model: &BowModel, samples: &[CleanSample]) -> PredictionSet {
    samples
        .par_iter()
        .map(|s| (s.index, model.predict_text(&s.text)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn sensitive_score(samples: &[&CleanSample], matcher: &TermMatcher, mode: EmptyAxisMode) -> SensitiveSummary {
    let scores = samples.par_iter().map(|s| score_sample(matcher, s, mode)).collect();
    aggregate(matcher, scores, mode)
}

/// Where step-one labels come from.
#[derive(Debug, Clone, Copy)]
pub enum Step1<'a> {
    Model(&'a BowModel),
    Predictions(&'a PredictionSet),
}

/// Evaluated head of the corpus plus its step-one predictions.
pub fn classify<'c>(
    corpus: &'c [CleanSample],
    step1: Step1<'_>,
    sample_limit: usize,
) -> Result<(&'c [CleanSample], PredictionSet)> {
    let evaluated = apply_limit(corpus, sample_limit);
    if evaluated.is_empty() {
        return Err(bipolkit_core::Error::Empty("evaluated corpus").into());
    }
    let pred = match step1 {
        Step1::Model(model) => predict(model, evaluated),
        Step1::Predictions(set) => set.aligned_to(evaluated)?,
    };
    Ok((evaluated, pred))
}

/// Both steps of the metric over the first `sample_limit` samples.
pub fn evaluate(
    corpus: &[CleanSample],
    step1: Step1<'_>,
    matcher: &TermMatcher,
    mode: EmptyAxisMode,
    sample_limit: usize,
) -> Result<BipolReport> {
    let (evaluated, pred) = classify(corpus, step1, sample_limit)?;
    evaluate_predicted(evaluated, &pred, matcher, mode)
}

/// Step two and report assembly for an already-classified corpus.
pub fn evaluate_predicted(
    evaluated: &[CleanSample],
    pred: &PredictionSet,
    matcher: &TermMatcher,
    mode: EmptyAxisMode,
) -> Result<BipolReport> {
    let biased = biased_subset(evaluated, pred)?;
    let summary = sensitive_score(&biased, matcher, mode);
    Ok(BipolReport::assemble(pred, summary, mode)?)
}

pub fn baseline(corpus: &[CleanSample], matcher: &TermMatcher, mode: EmptyAxisMode) -> Result<BaselineReport> {
    if corpus.is_empty() {
        return Err(bipolkit_core::Error::Empty("corpus").into());
    }
    let all: Vec<&CleanSample> = corpus.iter().collect();
    Ok(BaselineReport::from_summary(sensitive_score(&all, matcher, mode), mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bipolkit_core::bipol;
    use bipolkit_core::lexicon::{Axis, Lexicon, TypeList};
    use bipolkit_core::Label;

    fn lexicon() -> Lexicon {
        let t = |name: &str, terms: &[&str]| TypeList {
            name: name.into(),
            terms: terms.iter().map(|s| s.to_string()).collect(),
        };
        Lexicon {
            language: "en".into(),
            axes: vec![Axis {
                name: "gender".into(),
                types: vec![t("female", &["she", "her", "women"]), t("male", &["he", "him", "men"])],
            }],
        }
    }

    fn corpus() -> Vec<CleanSample> {
        let words = ["she", "he", "her", "cat", "women", "men", "him", "dog"];
        (0..500)
            .map(|i| {
                let text = (0..(i % 7 + 1))
                    .map(|k| words[(i * 31 + k * 17) % words.len()])
                    .collect::<Vec<_>>()
                    .join(" ");
                CleanSample {
                    index: i,
                    text,
                    label: Some(if i % 3 == 0 { Label::Biased } else { Label::Unbiased }),
                }
            })
            .collect()
    }

    #[test]
    fn matches_sequential_for_any_pool_size() {
        let corpus = corpus();
        let matcher = TermMatcher::new(&lexicon());
        let model = BowModel::train(&corpus, 1.0).unwrap();
        let sequential = bipol::evaluate(&corpus, &model, &matcher, EmptyAxisMode::SkipEmpty, 0).unwrap();
        let seq_base = bipol::baseline(&corpus, &matcher, EmptyAxisMode::StrictZero).unwrap();
        for threads in [1, 3, 8] {
            let pool = thread_pool(Some(threads)).unwrap();
            let (report, base) = pool.install(|| {
                (
                    evaluate(&corpus, Step1::Model(&model), &matcher, EmptyAxisMode::SkipEmpty, 0).unwrap(),
                    baseline(&corpus, &matcher, EmptyAxisMode::StrictZero).unwrap(),
                )
            });
            assert_eq!(report, sequential);
            assert_eq!(base, seq_base);
        }
    }

    #[test]
    fn model_and_prediction_routes_agree() {
        let corpus = corpus();
        let matcher = TermMatcher::new(&lexicon());
        let model = BowModel::train(&corpus, 1.0).unwrap();
        let preds = predict(&model, &corpus);
        let a = evaluate(&corpus, Step1::Model(&model), &matcher, EmptyAxisMode::SkipEmpty, 100).unwrap();
        let b = evaluate(
            &corpus,
            Step1::Predictions(&preds),
            &matcher,
            EmptyAxisMode::SkipEmpty,
            100,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluated, 100);
    }
}

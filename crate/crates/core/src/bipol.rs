//! The bipol metric and the lexica baseline.
//!
//! Step one labels every evaluated sample; the classification component
//! `b_c` is the share predicted biased. Step two scores each predicted-biased
//! sample against the lexicon: per axis, the gap between the two largest
//! per-type summed term frequencies divided by the axis total, averaged over
//! axes and then over samples, giving `b_s`. The metric is `b_c * b_s` when
//! `b_s > 0` and `b_c` otherwise.
//!
//! Per-sample work ([`score_sample`]) is independent; [`aggregate`] merges it
//! in ascending sample-index order so every execution order gives the same
//! floating-point result.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::classifier::{BiasClassifier, PredictionSet};
use crate::lexicon::{AxisCounts, SampleCounts, TermMatcher};
use crate::textprep::{tokenize, CleanSample};
use crate::{Error, Result};

/// How axes and samples without any matched term enter the averages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyAxisMode {
    /// Axes without matches are left out of the per-sample mean, and samples
    /// without any match are left out of the corpus mean.
    #[default]
    SkipEmpty,
    /// Every axis and every sample counts; missing scores are zero.
    StrictZero,
}

impl EmptyAxisMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EmptyAxisMode::SkipEmpty => "skip_empty",
            EmptyAxisMode::StrictZero => "strict_zero",
        }
    }
}

/// Skew of one axis within one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceAxisScore {
    pub axis: String,
    /// |largest − second largest| per-type summed frequency.
    pub numerator: u64,
    /// Sum of all per-type frequencies of the axis.
    pub denominator: u64,
    /// `numerator / denominator`, absent when nothing matched.
    pub score: Option<f64>,
}

pub fn sentence_axis_score(axis: &str, counts: &AxisCounts) -> SentenceAxisScore {
    let mut totals = counts.type_totals.clone();
    totals.sort_unstable_by_key(|&t| Reverse(t));
    let top = totals.first().copied().unwrap_or(0);
    let second = totals.get(1).copied().unwrap_or(0);
    let denominator: u64 = totals.iter().sum();
    let numerator = top - second;
    SentenceAxisScore {
        axis: axis.to_string(),
        numerator,
        denominator,
        score: (denominator > 0).then(|| numerator as f64 / denominator as f64),
    }
}

/// Mean over axes of one sample's axis scores.
pub fn sentence_score(scores: &[SentenceAxisScore], mode: EmptyAxisMode) -> Option<f64> {
    match mode {
        EmptyAxisMode::SkipEmpty => {
            let present: Vec<f64> = scores.iter().filter_map(|s| s.score).collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        }
        EmptyAxisMode::StrictZero => (!scores.is_empty())
            .then(|| scores.iter().map(|s| s.score.unwrap_or(0.0)).sum::<f64>() / scores.len() as f64),
    }
}

/// Step-two result for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleScore {
    pub index: usize,
    pub score: Option<f64>,
    pub counts: SampleCounts,
}

pub fn score_sample(matcher: &TermMatcher, sample: &CleanSample, mode: EmptyAxisMode) -> SampleScore {
    let counts = matcher.match_tokens(&tokenize(&sample.text));
    let axis_scores: Vec<SentenceAxisScore> = matcher
        .lexicon()
        .axes
        .iter()
        .zip(&counts.axes)
        .map(|(axis, c)| sentence_axis_score(&axis.name, c))
        .collect();
    SampleScore {
        index: sample.index,
        score: sentence_score(&axis_scores, mode),
        counts,
    }
}

/// Corpus-level term counts: axis → type → term → occurrences.
///
/// Every axis and type of the lexicon is present; only matched terms appear.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyTable(pub BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>);

impl FrequencyTable {
    pub fn for_lexicon(matcher: &TermMatcher) -> Self {
        let mut table = BTreeMap::new();
        for axis in &matcher.lexicon().axes {
            let types = axis.types.iter().map(|t| (t.name.clone(), BTreeMap::new())).collect();
            table.insert(axis.name.clone(), types);
        }
        FrequencyTable(table)
    }

    pub fn add(&mut self, matcher: &TermMatcher, counts: &SampleCounts) {
        for (axis, axis_counts) in matcher.lexicon().axes.iter().zip(&counts.axes) {
            if axis_counts.is_empty() {
                continue;
            }
            let types = self.0.entry(axis.name.clone()).or_default();
            for (ty, term_counts) in axis.types.iter().zip(&axis_counts.term_counts) {
                for (term, &n) in ty.terms.iter().zip(term_counts) {
                    if n > 0 {
                        *types
                            .entry(ty.name.clone())
                            .or_default()
                            .entry(term.clone())
                            .or_default() += n;
                    }
                }
            }
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = TermCount> + '_ {
        self.0.iter().flat_map(|(axis, types)| {
            types.iter().flat_map(move |(ty, terms)| {
                terms.iter().map(move |(term, &count)| TermCount {
                    axis: axis.clone(),
                    type_name: ty.clone(),
                    term: term.clone(),
                    count,
                })
            })
        })
    }

    pub fn total(&self) -> u64 {
        self.entries().map(|e| e.count).sum()
    }
}

/// One row of a top-k listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub axis: String,
    #[serde(rename = "type")]
    pub type_name: String,
    pub term: String,
    pub count: u64,
}

/// Which entries compete for the top-k places.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopKScope<'a> {
    All,
    Axis(&'a str),
    Type(&'a str, &'a str),
}

/// The `k` most frequent terms, by descending count and then ascending
/// (axis, type, term).
pub fn top_k_terms(freq: &FrequencyTable, k: usize) -> Vec<TermCount> {
    top_k_terms_in(freq, k, TopKScope::All)
}

pub fn top_k_terms_in(freq: &FrequencyTable, k: usize, scope: TopKScope<'_>) -> Vec<TermCount> {
    let mut entries: Vec<TermCount> = freq
        .entries()
        .filter(|e| match scope {
            TopKScope::All => true,
            TopKScope::Axis(a) => e.axis == a,
            TopKScope::Type(a, t) => e.axis == a && e.type_name == t,
        })
        .collect();
    // `entries()` already yields ascending (axis, type, term); a stable sort
    // on count alone keeps that as the tie-break.
    entries.sort_by_key(|e| Reverse(e.count));
    entries.truncate(k);
    entries
}

/// Merged step-two result over a set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveSummary {
    /// Mean sentence score over the samples that count (`r` in the metric).
    pub score: f64,
    /// Samples whose sentence score entered the mean.
    pub scored: usize,
    /// Samples left out because nothing matched (always 0 in strict mode).
    pub skipped: usize,
    pub frequencies: FrequencyTable,
}

/// Merges per-sample scores. Scores are summed in ascending index order.
pub fn aggregate(matcher: &TermMatcher, mut scores: Vec<SampleScore>, mode: EmptyAxisMode) -> SensitiveSummary {
    scores.sort_by_key(|s| s.index);
    let mut frequencies = FrequencyTable::for_lexicon(matcher);
    let mut sum = 0.0;
    let mut scored = 0;
    let mut skipped = 0;
    for s in &scores {
        frequencies.add(matcher, &s.counts);
        match (s.score, mode) {
            (Some(v), _) => {
                sum += v;
                scored += 1;
            }
            (None, EmptyAxisMode::StrictZero) => scored += 1,
            (None, EmptyAxisMode::SkipEmpty) => skipped += 1,
        }
    }
    SensitiveSummary {
        score: if scored == 0 { 0.0 } else { sum / scored as f64 },
        scored,
        skipped,
        frequencies,
    }
}

/// The sensitive-term component over the samples predicted biased.
pub fn sensitive_score<'a>(
    biased_samples: impl IntoIterator<Item = &'a CleanSample>,
    matcher: &TermMatcher,
    mode: EmptyAxisMode,
) -> SensitiveSummary {
    let scores = biased_samples
        .into_iter()
        .map(|s| score_sample(matcher, s, mode))
        .collect();
    aggregate(matcher, scores, mode)
}

/// Share of predictions that are biased.
pub fn classification_score(pred: &PredictionSet) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    Ok(pred.biased_count() as f64 / pred.len() as f64)
}

fn unit_interval(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            what,
            range: "[0, 1]",
            value,
        })
    }
}

/// Composes the two components.
pub fn bipol(b_c: f64, b_s: f64) -> Result<f64> {
    let b_c = unit_interval("b_c", b_c)?;
    let b_s = unit_interval("b_s", b_s)?;
    Ok(if b_s > 0.0 { b_c * b_s } else { b_c })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipolReport {
    pub b_c: f64,
    pub b_s: f64,
    #[serde(rename = "bipol")]
    pub b: f64,
    /// Samples predicted biased.
    pub r: usize,
    pub evaluated: usize,
    pub mode: EmptyAxisMode,
    pub frequencies: FrequencyTable,
    /// Predicted-biased samples that entered `b_s`.
    #[serde(skip)]
    pub scored: usize,
}

impl BipolReport {
    /// Builds the report from step-one predictions and the step-two summary
    /// of their biased subset.
    pub fn assemble(pred: &PredictionSet, sensitive: SensitiveSummary, mode: EmptyAxisMode) -> Result<Self> {
        let b_c = classification_score(pred)?;
        let b_s = sensitive.score;
        Ok(BipolReport {
            b_c,
            b_s,
            b: bipol(b_c, b_s)?,
            r: pred.biased_count(),
            evaluated: pred.len(),
            mode,
            frequencies: sensitive.frequencies,
            scored: sensitive.scored,
        })
    }
}

/// Samples of `corpus` that `pred` labels biased, in corpus order.
pub fn biased_subset<'a>(corpus: &'a [CleanSample], pred: &PredictionSet) -> Result<Vec<&'a CleanSample>> {
    let mut out = Vec::new();
    for sample in corpus {
        let p = pred.get(sample.index).ok_or(Error::MissingPrediction(sample.index))?;
        if p.label.is_biased() {
            out.push(sample);
        }
    }
    Ok(out)
}

/// Head of the corpus kept by a sample limit (0 keeps everything).
pub fn apply_limit(corpus: &[CleanSample], sample_limit: usize) -> &[CleanSample] {
    if sample_limit == 0 {
        corpus
    } else {
        &corpus[..sample_limit.min(corpus.len())]
    }
}

/// Runs both steps over the first `sample_limit` samples of a cleaned corpus.
pub fn evaluate(
    corpus: &[CleanSample],
    classifier: &dyn BiasClassifier,
    matcher: &TermMatcher,
    mode: EmptyAxisMode,
    sample_limit: usize,
) -> Result<BipolReport> {
    let evaluated = apply_limit(corpus, sample_limit);
    if evaluated.is_empty() {
        return Err(Error::Empty("evaluated corpus"));
    }
    let pred = classifier.classify(evaluated)?;
    let biased = biased_subset(evaluated, &pred)?;
    let sensitive = sensitive_score(biased, matcher, mode);
    BipolReport::assemble(&pred, sensitive, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub baseline: f64,
    pub counted: usize,
    pub skipped: usize,
    pub mode: EmptyAxisMode,
    pub frequencies: FrequencyTable,
}

impl BaselineReport {
    pub fn from_summary(summary: SensitiveSummary, mode: EmptyAxisMode) -> Self {
        BaselineReport {
            baseline: summary.score,
            counted: summary.scored,
            skipped: summary.skipped,
            mode,
            frequencies: summary.frequencies,
        }
    }
}

/// The step-two computation over every sample, with no classifier.
pub fn baseline(corpus: &[CleanSample], matcher: &TermMatcher, mode: EmptyAxisMode) -> Result<BaselineReport> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    Ok(BaselineReport::from_summary(
        sensitive_score(corpus, matcher, mode),
        mode,
    ))
}

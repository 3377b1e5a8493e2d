//! Step-one classification: a multinomial bag-of-words model, externally
//! produced prediction sets, and binary quality metrics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::textprep::{tokenize, CleanSample};
use crate::{Error, Label, Result};

/// Current on-disk model layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Probability of the biased class, when the producer supplies one.
    pub score: Option<f64>,
}

/// Per-sample predictions keyed by corpus index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    entries: BTreeMap<usize, Prediction>,
}

impl PredictionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one prediction. Duplicate indices and scores outside [0, 1] are rejected.
    pub fn insert(&mut self, index: usize, prediction: Prediction) -> Result<()> {
        if let Some(score) = prediction.score {
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::OutOfRange {
                    what: "prediction score",
                    range: "[0, 1]",
                    value: score,
                });
            }
        }
        if self.entries.insert(index, prediction).is_some() {
            return Err(Error::DuplicateIndex(index));
        }
        Ok(())
    }

    pub fn get(&self, index: usize) -> Option<&Prediction> {
        self.entries.get(&index)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Prediction)> {
        self.entries.iter().map(|(&i, p)| (i, p))
    }

    pub fn biased_count(&self) -> usize {
        self.entries.values().filter(|p| p.label.is_biased()).count()
    }

    /// Restricts the set to exactly the indices of `corpus`. Every corpus
    /// index must be covered; predictions for other indices are dropped.
    pub fn aligned_to(&self, corpus: &[CleanSample]) -> Result<PredictionSet> {
        let mut out = PredictionSet::new();
        for sample in corpus {
            let p = self.get(sample.index).ok_or(Error::MissingPrediction(sample.index))?;
            out.insert(sample.index, *p)?;
        }
        Ok(out)
    }
}

impl FromIterator<(usize, Prediction)> for PredictionSet {
    /// Later duplicates overwrite earlier ones; use [`PredictionSet::insert`]
    /// to have them rejected.
    fn from_iter<I: IntoIterator<Item = (usize, Prediction)>>(iter: I) -> Self {
        PredictionSet {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Anything that can label a cleaned corpus for the first step of the metric.
pub trait BiasClassifier {
    fn classify(&self, samples: &[CleanSample]) -> Result<PredictionSet>;
}

impl BiasClassifier for PredictionSet {
    fn classify(&self, samples: &[CleanSample]) -> Result<PredictionSet> {
        self.aligned_to(samples)
    }
}

impl BiasClassifier for BowModel {
    fn classify(&self, samples: &[CleanSample]) -> Result<PredictionSet> {
        Ok(self.predict(samples))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub documents: u64,
    pub tokens: u64,
    pub log_prior: f64,
    /// Smoothed log-likelihood per vocabulary entry.
    pub log_likelihoods: Vec<f64>,
    /// Smoothed log-likelihood of the reserved out-of-vocabulary pseudo-token.
    pub oov_log_likelihood: f64,
}

/// Multinomial naive Bayes over token counts with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowModel {
    pub format_version: u32,
    pub smoothing: f64,
    /// Sorted, unique; a token's index is its position.
    pub vocabulary: Vec<String>,
    pub biased: ClassModel,
    pub unbiased: ClassModel,
}

impl BowModel {
    /// Fits the model on the labeled samples of `corpus` (unlabeled samples
    /// are ignored). Counting is order independent, so the result depends
    /// only on the multiset of labeled texts.
    pub fn train(corpus: &[CleanSample], smoothing: f64) -> Result<BowModel> {
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::Smoothing(smoothing));
        }
        let mut docs = [0u64; 2];
        let mut totals = [0u64; 2];
        let mut counts: BTreeMap<&str, [u64; 2]> = BTreeMap::new();
        for sample in corpus {
            let Some(label) = sample.label else { continue };
            let c = label.slot();
            docs[c] += 1;
            for tok in tokenize(&sample.text) {
                counts.entry(tok).or_default()[c] += 1;
                totals[c] += 1;
            }
        }
        if docs[0] + docs[1] == 0 {
            return Err(Error::Empty("labeled training corpus"));
        }
        if docs[0] == 0 || docs[1] == 0 {
            return Err(Error::SingleClass);
        }
        let n_docs = (docs[0] + docs[1]) as f64;
        let slots = (counts.len() + 1) as f64;
        let class = |c: usize| {
            let norm = totals[c] as f64 + smoothing * slots;
            ClassModel {
                documents: docs[c],
                tokens: totals[c],
                log_prior: libm::log(docs[c] as f64 / n_docs),
                log_likelihoods: counts
                    .values()
                    .map(|k| libm::log((k[c] as f64 + smoothing) / norm))
                    .collect(),
                oov_log_likelihood: libm::log(smoothing / norm),
            }
        };
        Ok(BowModel {
            format_version: MODEL_FORMAT_VERSION,
            smoothing,
            biased: class(Label::Biased.slot()),
            unbiased: class(Label::Unbiased.slot()),
            vocabulary: counts.keys().map(|t| t.to_string()).collect(),
        })
    }

    /// Structural checks for a deserialized model.
    pub fn check(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: self.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Smoothing(self.smoothing));
        }
        if !self.vocabulary.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedModel("vocabulary must be sorted and unique"));
        }
        for class in [&self.biased, &self.unbiased] {
            if class.log_likelihoods.len() != self.vocabulary.len() {
                return Err(Error::MalformedModel("likelihood table length differs from vocabulary"));
            }
        }
        Ok(())
    }

    fn class(&self, label: Label) -> &ClassModel {
        match label {
            Label::Biased => &self.biased,
            Label::Unbiased => &self.unbiased,
        }
    }

    /// Unnormalized log posterior of `label` for a token sequence.
    pub fn log_posterior(&self, tokens: &[&str], label: Label) -> f64 {
        let class = self.class(label);
        tokens.iter().fold(class.log_prior, |acc, tok| {
            acc + match self.vocabulary.binary_search_by(|v| v.as_str().cmp(tok)) {
                Ok(i) => class.log_likelihoods[i],
                Err(_) => class.oov_log_likelihood,
            }
        })
    }

    pub fn predict_text(&self, text: &str) -> Prediction {
        let tokens = tokenize(text);
        let biased = self.log_posterior(&tokens, Label::Biased);
        let unbiased = self.log_posterior(&tokens, Label::Unbiased);
        Prediction {
            label: decide(biased, unbiased),
            score: Some(1.0 / (1.0 + libm::exp(unbiased - biased))),
        }
    }

    pub fn predict(&self, samples: &[CleanSample]) -> PredictionSet {
        samples.iter().map(|s| (s.index, self.predict_text(&s.text))).collect()
    }
}

/// Argmax over the two log posteriors; an exact tie goes to unbiased.
pub fn decide(log_biased: f64, log_unbiased: f64) -> Label {
    if log_biased > log_unbiased {
        Label::Biased
    } else {
        Label::Unbiased
    }
}

/// Binary confusion counts with biased as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: Label, gold: Label) {
        match (predicted, gold) {
            (Label::Biased, Label::Biased) => self.tp += 1,
            (Label::Biased, Label::Unbiased) => self.fp += 1,
            (Label::Unbiased, Label::Unbiased) => self.tn += 1,
            (Label::Unbiased, Label::Biased) => self.fn_ += 1,
        }
    }

    pub fn macro_f1(&self) -> Result<f64> {
        macro_f1(self)
    }

    pub fn positive_error_rate(&self) -> Option<f64> {
        positive_error_rate(self)
    }
}

/// Gold labels of the labeled samples in `corpus`.
pub fn gold_labels(corpus: &[CleanSample]) -> BTreeMap<usize, Label> {
    corpus.iter().filter_map(|s| s.label.map(|l| (s.index, l))).collect()
}

/// Confusion of `pred` against `gold`; both must cover the same indices.
pub fn confusion(pred: &PredictionSet, gold: &BTreeMap<usize, Label>) -> Result<ConfusionCounts> {
    let mut cm = ConfusionCounts::default();
    for (index, p) in pred.iter() {
        let g = gold.get(&index).ok_or(Error::MissingGold(index))?;
        cm.record(p.label, *g);
    }
    if let Some(&index) = gold.keys().find(|i| pred.get(**i).is_none()) {
        return Err(Error::MissingPrediction(index));
    }
    Ok(cm)
}

/// F1 of one class; 0 when the class never occurs in gold or predictions.
fn class_f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if tp == 0 || denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Unweighted mean of the biased-class and unbiased-class F1.
pub fn macro_f1(cm: &ConfusionCounts) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let biased = class_f1(cm.tp, cm.fp, cm.fn_);
    let unbiased = class_f1(cm.tn, cm.fn_, cm.fp);
    Ok((biased + unbiased) / 2.0)
}

/// FP / (FP + TP), absent when nothing was predicted biased.
pub fn positive_error_rate(cm: &ConfusionCounts) -> Option<f64> {
    let predicted_biased = cm.fp + cm.tp;
    (predicted_biased > 0).then(|| cm.fp as f64 / predicted_biased as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample(index: usize, text: &str, label: Label) -> CleanSample {
        CleanSample {
            index,
            text: text.into(),
            label: Some(label),
        }
    }

    fn toy_corpus() -> Vec<CleanSample> {
        let mut out = Vec::new();
        for i in 0..10 {
            out.push(sample(2 * i, "good kind", Label::Unbiased));
            out.push(sample(2 * i + 1, "women stupid", Label::Biased));
        }
        out
    }

    fn cm(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn separable_training() {
        let model = BowModel::train(&toy_corpus(), 1.0).unwrap();
        assert_eq!(model.predict_text("women stupid").label, Label::Biased);
        assert_eq!(model.predict_text("good kind").label, Label::Unbiased);
        model.check().unwrap();
    }

    #[test]
    fn training_errors() {
        assert_eq!(BowModel::train(&[], 1.0), Err(Error::Empty("labeled training corpus")));
        let only_biased = vec![sample(0, "a", Label::Biased), sample(1, "b", Label::Biased)];
        assert_eq!(BowModel::train(&only_biased, 1.0), Err(Error::SingleClass));
        assert!(matches!(BowModel::train(&toy_corpus(), 0.0), Err(Error::Smoothing(_))));
    }

    #[test]
    fn likelihoods_normalize() {
        let model = BowModel::train(&toy_corpus(), 0.5).unwrap();
        for class in [&model.biased, &model.unbiased] {
            let mass: f64 =
                class.log_likelihoods.iter().map(|l| libm::exp(*l)).sum::<f64>() + libm::exp(class.oov_log_likelihood);
            assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_text_uses_prior() {
        let mut corpus = toy_corpus();
        corpus.push(sample(100, "extra", Label::Unbiased));
        let model = BowModel::train(&corpus, 1.0).unwrap();
        let p = model.predict_text("");
        assert_eq!(p.label, Label::Unbiased);
        assert!((p.score.unwrap() - 10.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn exact_tie_is_unbiased() {
        // Balanced priors and a token seen equally often in both classes.
        let corpus = vec![sample(0, "same", Label::Biased), sample(1, "same", Label::Unbiased)];
        let model = BowModel::train(&corpus, 1.0).unwrap();
        assert_eq!(model.predict_text("same").label, Label::Unbiased);
        assert_eq!(model.predict_text("").label, Label::Unbiased);
        assert_eq!(decide(-1.0, -1.0), Label::Unbiased);
    }

    #[test]
    fn check_rejects_bad_models() {
        let mut model = BowModel::train(&toy_corpus(), 1.0).unwrap();
        model.format_version = 9;
        assert!(matches!(model.check(), Err(Error::ModelVersion { found: 9, .. })));
        let mut model = BowModel::train(&toy_corpus(), 1.0).unwrap();
        model.biased.log_likelihoods.pop();
        assert!(matches!(model.check(), Err(Error::MalformedModel(_))));
    }

    #[test]
    fn prediction_set_alignment() {
        let corpus = toy_corpus();
        let full: PredictionSet = corpus
            .iter()
            .map(|s| {
                (
                    s.index,
                    Prediction {
                        label: Label::Unbiased,
                        score: None,
                    },
                )
            })
            .collect();
        assert_eq!(full.aligned_to(&corpus[..3]).unwrap().len(), 3);
        let mut partial = full.clone();
        partial.entries.remove(&7);
        assert_eq!(partial.aligned_to(&corpus), Err(Error::MissingPrediction(7)));
    }

    #[test]
    fn prediction_set_rejects_bad_entries() {
        let mut set = PredictionSet::new();
        let bad = Prediction {
            label: Label::Biased,
            score: Some(1.5),
        };
        assert!(matches!(set.insert(0, bad), Err(Error::OutOfRange { .. })));
        let ok = Prediction {
            label: Label::Biased,
            score: Some(1.0),
        };
        set.insert(0, ok).unwrap();
        assert_eq!(set.insert(0, ok), Err(Error::DuplicateIndex(0)));
    }

    fn preds(labels: &[Label]) -> PredictionSet {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| (i, Prediction { label, score: None }))
            .collect()
    }

    fn gold(labels: &[Label]) -> BTreeMap<usize, Label> {
        labels.iter().copied().enumerate().collect()
    }

    #[test]
    fn confusion_examples() {
        use Label::{Biased as B, Unbiased as U};
        let g = [B, B, U, U];
        assert_eq!(confusion(&preds(&g), &gold(&g)).unwrap(), cm(2, 0, 2, 0));

        let g = [B, B, B, U, U, U, U, U];
        assert_eq!(confusion(&preds(&[U; 8]), &gold(&g)).unwrap(), cm(0, 0, 5, 3));

        let inverted: Vec<Label> = g.iter().map(|l| if *l == B { U } else { B }).collect();
        assert_eq!(confusion(&preds(&inverted), &gold(&g)).unwrap(), cm(0, 5, 0, 3));
    }

    #[test]
    fn confusion_index_mismatch() {
        use Label::Biased as B;
        let mut g = gold(&[B, B]);
        g.remove(&1);
        assert_eq!(confusion(&preds(&[B, B]), &g), Err(Error::MissingGold(1)));
        assert_eq!(
            confusion(&preds(&[B]), &gold(&[B, B])),
            Err(Error::MissingPrediction(1))
        );
    }

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&cm(2, 0, 2, 0)).unwrap(), 1.0);
        assert!((macro_f1(&cm(50, 10, 120, 20)).unwrap() - 0.8291).abs() < 1e-4);
        assert!((macro_f1(&cm(0, 0, 5, 5)).unwrap() - 0.3333).abs() < 1e-4);
        assert_eq!(macro_f1(&cm(0, 0, 0, 0)), Err(Error::Empty("confusion matrix")));
    }

    #[test]
    fn positive_error_rate_examples() {
        assert!((positive_error_rate(&cm(50, 10, 0, 0)).unwrap() - 0.1667).abs() < 1e-4);
        assert_eq!(positive_error_rate(&cm(5, 0, 0, 0)), Some(0.0));
        assert_eq!(positive_error_rate(&cm(0, 5, 0, 0)), Some(1.0));
        assert_eq!(positive_error_rate(&cm(0, 0, 3, 3)), None);
    }

    proptest! {
        #[test]
        fn metric_bounds(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            let c = cm(tp, fp, tn, fn_);
            if c.total() > 0 {
                let f = macro_f1(&c).unwrap();
                prop_assert!((0.0..=1.0).contains(&f));
            }
            if let Some(e) = positive_error_rate(&c) {
                prop_assert!((0.0..=1.0).contains(&e));
            }
        }

        #[test]
        fn argmax_ignores_common_factor(b in -500i32..0, u in -500i32..0, k in -50i32..50) {
            // Multiplying both posteriors by e^k shifts both logs by k.
            let (b, u, k) = (f64::from(b), f64::from(u), f64::from(k));
            prop_assert_eq!(decide(b, u), decide(b + k, u + k));
        }

        #[test]
        fn separable_corpora_are_learned(
            (biased, unbiased) in (1usize..8, 1usize..5).prop_flat_map(|(n, len)| (
                proptest::collection::vec(proptest::collection::vec("[a-f]{2,4}", len), n),
                proptest::collection::vec(proptest::collection::vec("[p-u]{2,4}", len), n),
            )),
        ) {
            // Equal document counts and lengths give equal priors and token
            // totals, so every in-class token outweighs the other class's OOV mass.
            let mut corpus = Vec::new();
            for t in &biased { corpus.push(sample(corpus.len(), &t.join(" "), Label::Biased)); }
            for t in &unbiased { corpus.push(sample(corpus.len(), &t.join(" "), Label::Unbiased)); }
            let model = BowModel::train(&corpus, 1.0).unwrap();
            let cm = confusion(&model.predict(&corpus), &gold_labels(&corpus)).unwrap();
            prop_assert_eq!(macro_f1(&cm).unwrap(), 1.0);
        }

        #[test]
        fn training_is_order_independent(seed in 0u64..1000) {
            let mut corpus = toy_corpus();
            corpus.push(sample(99, "women kind", Label::Biased));
            let a = BowModel::train(&corpus, 1.0).unwrap();
            let n = corpus.len();
            corpus.rotate_left((seed as usize) % n);
            let b = BowModel::train(&corpus, 1.0).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

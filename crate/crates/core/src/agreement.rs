//! Annotation quality: multi-annotator Jaccard, the unanimity score (CUS),
//! gold-sample gating and sample-size planning.
//!
//! When a matrix carries gold samples, agreement is measured on the
//! remaining (study) samples; gold samples only feed [`AnnotationMatrix::gold_gate`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::{Error, Label, Result};

/// Default number of gold answers an annotator must get right.
pub const DEFAULT_GOLD_THRESHOLD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    sample_ids: Vec<String>,
    annotators: Vec<String>,
    /// `labels[annotator][sample]`
    labels: Vec<Vec<Label>>,
    gold: BTreeMap<String, Label>,
}

impl AnnotationMatrix {
    /// Builds a matrix from `(sample_id, annotator, label)` records and an
    /// optional gold list. Samples and annotators keep first-seen order.
    pub fn from_records<I, G>(records: I, gold: G) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, Label)>,
        G: IntoIterator<Item = (String, Label)>,
    {
        let mut sample_ids: Vec<String> = Vec::new();
        let mut sample_pos: BTreeMap<String, usize> = BTreeMap::new();
        let mut annotators: Vec<String> = Vec::new();
        let mut annotator_pos: BTreeMap<String, usize> = BTreeMap::new();
        let mut cells: BTreeMap<(usize, usize), Label> = BTreeMap::new();
        for (sample, annotator, label) in records {
            let s = *sample_pos.entry(sample.clone()).or_insert_with(|| {
                sample_ids.push(sample.clone());
                sample_ids.len() - 1
            });
            let a = *annotator_pos.entry(annotator.clone()).or_insert_with(|| {
                annotators.push(annotator.clone());
                annotators.len() - 1
            });
            if cells.insert((a, s), label).is_some() {
                return Err(Error::DuplicateAnnotation { annotator, sample });
            }
        }
        let mut labels = vec![Vec::with_capacity(sample_ids.len()); annotators.len()];
        for (a, row) in labels.iter_mut().enumerate() {
            for (s, sample) in sample_ids.iter().enumerate() {
                let label = cells.get(&(a, s)).ok_or_else(|| Error::MissingAnnotation {
                    annotator: annotators[a].clone(),
                    sample: sample.clone(),
                })?;
                row.push(*label);
            }
        }
        let mut matrix = AnnotationMatrix {
            sample_ids,
            annotators,
            labels,
            gold: BTreeMap::new(),
        };
        for (id, label) in gold {
            if !sample_pos.contains_key(&id) {
                return Err(Error::UnknownGoldSample(id));
            }
            matrix.gold.insert(id, label);
        }
        Ok(matrix)
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn gold(&self) -> &BTreeMap<String, Label> {
        &self.gold
    }

    /// Positions of the samples agreement is measured on.
    fn study(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.sample_ids.len()).filter(|&s| !self.gold.contains_key(&self.sample_ids[s]))
    }

    pub fn study_len(&self) -> usize {
        self.study().count()
    }

    fn column(&self, s: usize) -> impl Iterator<Item = Label> + '_ {
        self.labels.iter().map(move |row| row[s])
    }

    fn require_annotators(&self) -> Result<()> {
        if self.annotators.len() < 2 {
            return Err(Error::TooFewAnnotators(self.annotators.len()));
        }
        Ok(())
    }

    /// Samples every annotator gave `class`, over samples at least one did.
    /// An empty union counts as full agreement.
    pub fn jaccard(&self, class: Label) -> Result<f64> {
        self.require_annotators()?;
        let (mut inter, mut union) = (0usize, 0usize);
        for s in self.study() {
            let hits = self.column(s).filter(|&l| l == class).count();
            if hits > 0 {
                union += 1;
            }
            if hits == self.annotators.len() {
                inter += 1;
            }
        }
        Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
    }

    /// Samples on which all annotators agree, whichever the class.
    pub fn unanimous_count(&self) -> usize {
        self.study()
            .filter(|&s| {
                let mut col = self.column(s);
                let first = col.next();
                col.all(|l| Some(l) == first)
            })
            .count()
    }

    /// Unanimously labeled samples over all study samples.
    pub fn cus(&self) -> Result<f64> {
        self.require_annotators()?;
        let n = self.study_len();
        if n == 0 {
            return Err(Error::Empty("annotation matrix"));
        }
        Ok(self.unanimous_count() as f64 / n as f64)
    }

    /// Per-annotator gold accuracy; passing needs at least `threshold` correct.
    pub fn gold_gate(&self, threshold: usize) -> Result<Vec<GateResult>> {
        if self.gold.is_empty() {
            return Err(Error::NoGold);
        }
        let gold_pos: Vec<(usize, Label)> = self
            .sample_ids
            .iter()
            .enumerate()
            .filter_map(|(s, id)| self.gold.get(id).map(|&l| (s, l)))
            .collect();
        Ok(self
            .annotators
            .iter()
            .zip(&self.labels)
            .map(|(name, row)| {
                let correct = gold_pos.iter().filter(|&&(s, l)| row[s] == l).count();
                GateResult {
                    annotator: name.clone(),
                    correct,
                    total: gold_pos.len(),
                    passed: correct >= threshold,
                }
            })
            .collect())
    }

    pub fn report(&self, gold_threshold: usize) -> Result<AgreementReport> {
        let jaccard_biased = self.jaccard(Label::Biased)?;
        let jaccard_unbiased = self.jaccard(Label::Unbiased)?;
        let cus = self.cus()?;
        let gold_gate = if self.gold.is_empty() {
            None
        } else {
            Some(self.gold_gate(gold_threshold)?)
        };
        Ok(AgreementReport {
            jaccard: jaccard_biased,
            jaccard_biased,
            jaccard_unbiased,
            cus,
            unanimous: self.unanimous_count(),
            samples: self.study_len(),
            annotators: self.annotators.len(),
            gold_gate,
        })
    }

    /// Same matrix with annotators listed in a different order.
    pub fn with_annotator_order(&self, order: &[usize]) -> Self {
        let seen: BTreeSet<usize> = order.iter().copied().collect();
        assert_eq!(seen.len(), self.annotators.len(), "order must be a permutation");
        AnnotationMatrix {
            sample_ids: self.sample_ids.clone(),
            annotators: order.iter().map(|&i| self.annotators[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            gold: self.gold.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateResult {
    pub annotator: String,
    pub correct: usize,
    pub total: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    /// Headline value: the biased-class Jaccard.
    pub jaccard: f64,
    pub jaccard_biased: f64,
    pub jaccard_unbiased: f64,
    pub cus: f64,
    pub unanimous: usize,
    pub samples: usize,
    pub annotators: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_gate: Option<Vec<GateResult>>,
}

/// Cochran sample size `ceil(z² p (1−p) / margin²)`.
///
/// Results within 1e-9 (relative) of an integer are taken as that integer,
/// so `z = 1.96, margin = 0.07` gives 196 despite rounding in `0.07²`.
pub fn sample_size(z: f64, margin: f64, proportion: f64) -> Result<u64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::OutOfRange {
            what: "z-score",
            range: "(0, inf)",
            value: z,
        });
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::OutOfRange {
            what: "margin",
            range: "(0, 1)",
            value: margin,
        });
    }
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::OutOfRange {
            what: "proportion",
            range: "[0, 1]",
            value: proportion,
        });
    }
    let exact = z * z * proportion * (1.0 - proportion) / (margin * margin);
    let nearest = libm::round(exact);
    let n = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        libm::ceil(exact)
    };
    Ok(n as u64)
}

/// Normal quantile for the common two-sided confidence levels.
pub fn z_for_confidence(percent: f64) -> Option<f64> {
    const TABLE: [(f64, f64); 5] = [
        (80.0, 1.2816),
        (90.0, 1.645),
        (95.0, 1.96),
        (98.0, 2.326),
        (99.0, 2.576),
    ];
    TABLE.iter().find(|(p, _)| (p - percent).abs() < 1e-9).map(|&(_, z)| z)
}

/// Helper for tests and fixtures: a matrix from per-annotator label rows over
/// sample ids `"0"`, `"1"`, ...
pub fn matrix_from_rows(rows: &[Vec<Label>], gold: &[(usize, Label)]) -> Result<AnnotationMatrix> {
    let records = rows.iter().enumerate().flat_map(|(a, row)| {
        row.iter()
            .enumerate()
            .map(move |(s, &l)| (s.to_string(), alloc::format!("a{a}"), l))
    });
    AnnotationMatrix::from_records(records, gold.iter().map(|&(s, l)| (s.to_string(), l)))
}

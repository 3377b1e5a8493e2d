//! Lexica of sensitive terms and per-sample term matching.
//!
//! A [`Lexicon`] is a language-tagged list of axes (gender, racial, ...), each
//! holding two or more named types (female, male, ...) with their terms.
//! Terms are stored in cleaned form and may span several tokens.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::textprep::{clean_text, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub language: String,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub types: Vec<TypeList>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeList {
    pub name: String,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A validation finding, located by axis/type/term where applicable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub axis: Option<String>,
    #[serde(rename = "type")]
    pub type_name: Option<String>,
    pub term: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            axis: None,
            type_name: None,
            term: None,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(message)
        }
    }

    fn at(mut self, axis: &str, type_name: Option<&str>, term: Option<&str>) -> Self {
        self.axis = Some(axis.to_string());
        self.type_name = type_name.map(str::to_string);
        self.term = term.map(str::to_string);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}")?;
        if let Some(axis) = &self.axis {
            write!(f, " [axis {axis:?}")?;
            if let Some(t) = &self.type_name {
                write!(f, ", type {t:?}")?;
            }
            if let Some(term) = &self.term {
                write!(f, ", term {term:?}")?;
            }
            write!(f, "]")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl Lexicon {
    /// Checks every structural invariant. Errors make the lexicon unusable;
    /// warnings flag ambiguity (a term listed under two types of one axis).
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.axes.is_empty() {
            diags.push(Diagnostic::error("lexicon needs at least one axis"));
        }
        let mut axis_names = BTreeSet::new();
        for axis in &self.axes {
            let an = axis.name.as_str();
            if an.is_empty() {
                diags.push(Diagnostic::error("axis name is empty").at(an, None, None));
            }
            if !axis_names.insert(an) {
                diags.push(Diagnostic::error("duplicate axis name").at(an, None, None));
            }
            if axis.types.len() < 2 {
                diags.push(Diagnostic::error("axis needs ≥2 types").at(an, None, None));
            }
            let mut type_names = BTreeSet::new();
            let mut owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for ty in &axis.types {
                let tn = ty.name.as_str();
                if tn.is_empty() {
                    diags.push(Diagnostic::error("type name is empty").at(an, Some(tn), None));
                }
                if !type_names.insert(tn) {
                    diags.push(Diagnostic::error("duplicate type name").at(an, Some(tn), None));
                }
                if ty.terms.is_empty() {
                    diags.push(Diagnostic::error("type needs at least one term").at(an, Some(tn), None));
                }
                let mut seen = BTreeSet::new();
                for term in &ty.terms {
                    let t = term.as_str();
                    if !seen.insert(t) {
                        diags.push(Diagnostic::error("duplicate term").at(an, Some(tn), Some(t)));
                        continue;
                    }
                    let cleaned = clean_text(t);
                    if cleaned.is_empty() {
                        diags.push(Diagnostic::error("term is empty after cleaning").at(an, Some(tn), Some(t)));
                    } else if cleaned != t {
                        diags.push(
                            Diagnostic::error(format!("term is not in cleaned form (expected {cleaned:?})")).at(
                                an,
                                Some(tn),
                                Some(t),
                            ),
                        );
                    }
                    owners.entry(t).or_default().push(tn);
                }
            }
            for (term, types) in owners {
                if types.len() > 1 {
                    diags.push(
                        Diagnostic::warning(format!("term is listed under several types: {}", types.join(", "))).at(
                            an,
                            None,
                            Some(term),
                        ),
                    );
                }
            }
        }
        diags
    }

    pub fn has_errors(&self) -> bool {
        self.validate().iter().any(Diagnostic::is_error)
    }

    /// Total number of terms across all axes and types.
    pub fn term_count(&self) -> usize {
        self.axes.iter().flat_map(|a| &a.types).map(|t| t.terms.len()).sum()
    }
}

/// Term frequencies of one axis in one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisCounts {
    /// Summed frequency per type, in lexicon order.
    pub type_totals: Vec<u64>,
    /// Occurrences per term, `term_counts[type][term]`.
    pub term_counts: Vec<Vec<u64>>,
}

impl AxisCounts {
    fn zeroed(axis: &Axis) -> Self {
        AxisCounts {
            type_totals: vec![0; axis.types.len()],
            term_counts: axis.types.iter().map(|t| vec![0; t.terms.len()]).collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.type_totals.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// Term frequencies of every axis in one sample, in lexicon order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    pub axes: Vec<AxisCounts>,
}

impl SampleCounts {
    pub fn has_matches(&self) -> bool {
        self.axes.iter().any(|a| !a.is_empty())
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    axis: usize,
    ty: usize,
    slot: usize,
    tokens: Vec<String>,
}

/// A lexicon compiled for fast matching: terms are indexed by first token.
///
/// Immutable after construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct TermMatcher {
    lexicon: Lexicon,
    terms: Vec<CompiledTerm>,
    by_first: BTreeMap<String, Vec<usize>>,
}

impl TermMatcher {
    pub fn new(lexicon: &Lexicon) -> Self {
        let mut terms = Vec::new();
        let mut by_first: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (ai, axis) in lexicon.axes.iter().enumerate() {
            for (ti, ty) in axis.types.iter().enumerate() {
                for (slot, term) in ty.terms.iter().enumerate() {
                    let tokens: Vec<String> = tokenize(term).into_iter().map(str::to_string).collect();
                    let Some(first) = tokens.first() else {
                        continue;
                    };
                    by_first.entry(first.clone()).or_default().push(terms.len());
                    terms.push(CompiledTerm {
                        axis: ai,
                        ty: ti,
                        slot,
                        tokens,
                    });
                }
            }
        }
        TermMatcher {
            lexicon: lexicon.clone(),
            terms,
            by_first,
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Counts every term occurrence in `tokens`.
    ///
    /// Single-token terms count every occurrence. Multi-token terms match
    /// contiguous runs, scanning left to right without overlapping earlier
    /// matches of the same term. Each term is counted independently, and a
    /// term listed under several types counts for each of them.
    pub fn match_tokens(&self, tokens: &[&str]) -> SampleCounts {
        let mut axes: Vec<AxisCounts> = self.lexicon.axes.iter().map(AxisCounts::zeroed).collect();
        // Earliest position a multi-token term may start at again.
        let mut resume: BTreeMap<usize, usize> = BTreeMap::new();
        for (pos, tok) in tokens.iter().enumerate() {
            let Some(candidates) = self.by_first.get(*tok) else {
                continue;
            };
            for &id in candidates {
                let term = &self.terms[id];
                let len = term.tokens.len();
                if len > 1 {
                    if resume.get(&id).is_some_and(|&r| pos < r) {
                        continue;
                    }
                    let window = match tokens.get(pos..pos + len) {
                        Some(w) => w,
                        None => continue,
                    };
                    if !window.iter().zip(&term.tokens).all(|(a, b)| *a == b.as_str()) {
                        continue;
                    }
                    resume.insert(id, pos + len);
                }
                let counts = &mut axes[term.axis];
                counts.term_counts[term.ty][term.slot] += 1;
                counts.type_totals[term.ty] += 1;
            }
        }
        SampleCounts { axes }
    }
}

/// One-shot matching against an uncompiled lexicon.
pub fn match_terms(tokens: &[&str], lexicon: &Lexicon) -> SampleCounts {
    TermMatcher::new(lexicon).match_tokens(tokens)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn type_list(name: &str, terms: &[&str]) -> TypeList {
        TypeList {
            name: name.to_string(),
            terms: terms.iter().map(|t| t.to_string()).collect(),
        }
    }

    pub fn axis(name: &str, types: Vec<TypeList>) -> Axis {
        Axis {
            name: name.to_string(),
            types,
        }
    }

    pub fn gender() -> Lexicon {
        Lexicon {
            language: "en".to_string(),
            axes: vec![axis(
                "gender",
                vec![
                    type_list("female", &["women", "she", "her", "woman"]),
                    type_list("male", &["men", "he", "him", "man"]),
                ],
            )],
        }
    }

    pub fn english() -> Lexicon {
        let mut lex = gender();
        lex.axes.push(axis(
            "racial",
            vec![
                type_list("black", &["black", "african"]),
                type_list("white", &["white", "caucasian"]),
            ],
        ));
        lex.axes.push(axis(
            "religious",
            vec![
                type_list("christian", &["christian", "church"]),
                type_list("muslim", &["muslim", "mosque"]),
                type_list("hindu", &["hindu", "temple"]),
            ],
        ));
        lex
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn errors(lex: &Lexicon) -> Vec<Diagnostic> {
        lex.validate().into_iter().filter(Diagnostic::is_error).collect()
    }

    /// Distinct letter-only terms: "aa", "ab", ... prefixed by `stem`.
    fn synthetic_terms(stem: &str, n: usize) -> Vec<String> {
        (0..n)
            .map(|i| {
                let hi = (b'a' + (i / 26 / 26 % 26) as u8) as char;
                let mid = (b'a' + (i / 26 % 26) as u8) as char;
                let lo = (b'a' + (i % 26) as u8) as char;
                format!("{stem}{hi}{mid}{lo}")
            })
            .collect()
    }

    #[test]
    fn full_size_english_shape_validates() {
        let mk = |name: &str, n| TypeList {
            name: name.to_string(),
            terms: synthetic_terms(name, n),
        };
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![
                axis("gender", vec![mk("female", 76), mk("male", 46)]),
                axis("racial", vec![mk("black", 84), mk("white", 127)]),
                axis(
                    "religious",
                    vec![mk("christian", 180), mk("muslim", 465), mk("hindu", 179)],
                ),
            ],
        };
        assert!(lex.validate().is_empty());
        assert_eq!(lex.term_count(), 76 + 46 + 84 + 127 + 180 + 465 + 179);
    }

    #[test]
    fn empty_axes_rejected() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![],
        };
        assert_eq!(errors(&lex).len(), 1);
    }

    #[test]
    fn single_type_axis_rejected() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![axis("gender", vec![type_list("female", &["she"])])],
        };
        let errs = errors(&lex);
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("≥2 types"));
    }

    #[test]
    fn duplicate_term_rejected() {
        let lex = Lexicon {
            language: "it".into(),
            axes: vec![axis(
                "gender",
                vec![type_list("female", &["donna", "donna"]), type_list("male", &["uomo"])],
            )],
        };
        let errs = errors(&lex);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].term.as_deref(), Some("donna"));
        assert_eq!(errs[0].type_name.as_deref(), Some("female"));
    }

    #[test]
    fn uncleaned_term_rejected() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![axis(
                "gender",
                vec![type_list("female", &["She"]), type_list("male", &["he"])],
            )],
        };
        assert_eq!(errors(&lex)[0].term.as_deref(), Some("She"));
    }

    #[test]
    fn shared_term_is_warning() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![axis(
                "gender",
                vec![
                    type_list("female", &["she", "they"]),
                    type_list("male", &["he", "they"]),
                ],
            )],
        };
        let diags = lex.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(diags[0].term.as_deref(), Some("they"));
    }

    #[test]
    fn worked_sentence_counts() {
        let text = clean_text("Women!!! PERSON taught you better than that. Shame on you!");
        let counts = match_terms(&tokenize(&text), &english());
        assert_eq!(counts.axes[0].type_totals, vec![1, 0]);
        assert!(counts.axes[1].is_empty() && counts.axes[2].is_empty());
    }

    #[test]
    fn repeated_tokens() {
        let counts = match_terms(&["he", "he", "she"], &gender());
        assert_eq!(counts.axes[0].type_totals, vec![1, 2]);
        assert_eq!(counts.axes[0].term_counts[1], vec![0, 2, 0, 0]);
    }

    #[test]
    fn empty_tokens() {
        let counts = match_terms(&[], &english());
        assert!(!counts.has_matches());
    }

    #[test]
    fn multi_token_terms_do_not_overlap() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![axis(
                "x",
                vec![type_list("a", &["la la", "la"]), type_list("b", &["lo"])],
            )],
        };
        let counts = match_terms(&["la", "la", "la", "lo"], &lex);
        // "la la" matches at 0 only (position 1 overlaps, 2 has no partner); "la" counts 3 times.
        assert_eq!(counts.axes[0].term_counts[0], vec![1, 3]);
        assert_eq!(counts.axes[0].type_totals, vec![4, 1]);
    }

    #[test]
    fn shared_term_counts_for_both_types() {
        let lex = Lexicon {
            language: "en".into(),
            axes: vec![axis("g", vec![type_list("f", &["they"]), type_list("m", &["they"])])],
        };
        assert_eq!(match_terms(&["they"], &lex).axes[0].type_totals, vec![1, 1]);
    }

    fn single_token_lexicon() -> Lexicon {
        english()
    }

    proptest! {
        #[test]
        fn concatenation_is_additive(
            a in proptest::collection::vec(prop::sample::select(vec!["he", "she", "men", "x", "black", "temple", "y"]), 0..12),
            b in proptest::collection::vec(prop::sample::select(vec!["he", "she", "men", "x", "black", "temple", "y"]), 0..12),
        ) {
            let m = TermMatcher::new(&single_token_lexicon());
            let ca = m.match_tokens(&a);
            let cb = m.match_tokens(&b);
            let joined: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
            let cj = m.match_tokens(&joined);
            for (ax, axis) in cj.axes.iter().enumerate() {
                for (ti, terms) in axis.term_counts.iter().enumerate() {
                    for (k, &n) in terms.iter().enumerate() {
                        prop_assert_eq!(n, ca.axes[ax].term_counts[ti][k] + cb.axes[ax].term_counts[ti][k]);
                    }
                    prop_assert_eq!(axis.type_totals[ti], terms.iter().sum::<u64>());
                }
            }
        }

        #[test]
        fn appending_term_increments_once(
            prefix in proptest::collection::vec(prop::sample::select(vec!["he", "she", "x", "church"]), 0..10),
            extra in prop::sample::select(vec!["he", "she", "church"]),
        ) {
            let m = TermMatcher::new(&single_token_lexicon());
            let before = m.match_tokens(&prefix);
            let mut longer = prefix.clone();
            longer.push(extra);
            let after = m.match_tokens(&longer);
            let diff: u64 = after.axes.iter().map(AxisCounts::total).sum::<u64>()
                - before.axes.iter().map(AxisCounts::total).sum::<u64>();
            prop_assert_eq!(diff, 1);
        }

        #[test]
        fn foreign_tokens_match_nothing(tokens in proptest::collection::vec("[q-z]{3,6}", 0..20)) {
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            prop_assert!(!match_terms(&refs, &english()).has_matches());
        }
    }
}

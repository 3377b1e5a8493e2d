//! Corpus cleaning and tokenization.
//!
//! [`clean_text`] applies a fixed sequence of removal rules:
//!
//! 1. URLs (`http://`, `https://`, `ftp://`, `www.` up to the next whitespace)
//! 2. email addresses
//! 3. dotted-quad IPv4 addresses
//! 4. emoji and pictograph codepoints
//! 5. numeric characters
//! 6. anything that is not a letter, an apostrophe or whitespace
//! 7. lowercasing
//! 8. whitespace collapse and trim
//!
//! Every removed span becomes a single separator, so `"hello,world"` cleans to
//! `"hello world"`. The output is a fixed point of the function.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::Label;

/// One row of an input corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSample {
    /// Position in the source file (or an explicit index column).
    pub index: usize,
    pub text: String,
    pub label: Option<Label>,
}

impl RawSample {
    pub fn new(index: usize, text: impl Into<String>, label: Option<Label>) -> Self {
        RawSample {
            index,
            text: text.into(),
            label,
        }
    }
}

/// A sample that survived cleaning: nonempty, lowercase, single-spaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanSample {
    pub index: usize,
    pub text: String,
    pub label: Option<Label>,
}

impl CleanSample {
    pub fn tokens(&self) -> Vec<&str> {
        tokenize(&self.text)
    }
}

/// Counters reported by corpus cleaning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    pub rows_in: usize,
    pub rows_out: usize,
    pub dropped_empty: usize,
    pub dropped_duplicate: usize,
}

/// Cleans one string. Total: any input is accepted and the result is either
/// empty or a valid clean sample text.
pub fn clean_text(raw: &str) -> String {
    let stripped = strip_ipv4(&strip_emails(&strip_urls(raw)));
    normalize_chars(&stripped)
}

/// Splits clean text into tokens on single spaces.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split(' ').filter(|t| !t.is_empty()).collect()
}

/// Cleans every sample, drops empty results and exact duplicates (the first
/// occurrence wins) and keeps input order and original indices.
pub fn clean_corpus(corpus: &[RawSample]) -> Vec<CleanSample> {
    let mut dedup = Deduplicator::default();
    corpus
        .iter()
        .filter_map(|s| dedup.offer(s.index, clean_text(&s.text), s.label))
        .collect()
}

/// Incremental empty-row and duplicate filter over already-cleaned text.
///
/// Feeding rows in input order reproduces [`clean_corpus`]; the streaming
/// readers clean batches in parallel and then feed this sequentially.
#[derive(Debug, Default)]
pub struct Deduplicator {
    seen: BTreeSet<String>,
    stats: CleanStats,
}

impl Deduplicator {
    pub fn offer(&mut self, index: usize, cleaned: String, label: Option<Label>) -> Option<CleanSample> {
        self.stats.rows_in += 1;
        if cleaned.is_empty() {
            self.stats.dropped_empty += 1;
            return None;
        }
        if self.seen.contains(&cleaned) {
            self.stats.dropped_duplicate += 1;
            return None;
        }
        self.seen.insert(cleaned.clone());
        self.stats.rows_out += 1;
        Some(CleanSample {
            index,
            text: cleaned,
            label,
        })
    }

    pub fn stats(&self) -> CleanStats {
        self.stats
    }
}

const URL_PREFIXES: [&str; 4] = ["http://", "https://", "ftp://", "www."];

fn starts_with_ignore_case(haystack: &str, prefix: &str) -> bool {
    haystack.len() >= prefix.len() && haystack.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn strip_urls(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut last = 0;
    let mut i = 0;
    let mut prev: Option<char> = None;
    while let Some(c) = s[i..].chars().next() {
        let at_boundary = prev.is_none_or(|p| !p.is_alphanumeric());
        if at_boundary && URL_PREFIXES.iter().any(|p| starts_with_ignore_case(&s[i..], p)) {
            let end = s[i..]
                .char_indices()
                .find(|&(_, c)| c.is_whitespace() || matches!(c, '"' | '<' | '>'))
                .map_or(s.len(), |(k, _)| i + k);
            out.push_str(&s[last..i]);
            out.push(' ');
            last = end;
            i = end;
            prev = None;
            continue;
        }
        prev = Some(c);
        i += c.len_utf8();
    }
    out.push_str(&s[last..]);
    out
}

fn is_email_local(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'%' | b'+' | b'-')
}

fn is_email_domain(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-')
}

/// Byte span `[start, end)` of an email whose `@` sits at `at`, if any.
/// The local part may not extend left of `floor`.
fn email_span(bytes: &[u8], at: usize, floor: usize) -> Option<(usize, usize)> {
    let mut start = at;
    while start > floor && is_email_local(bytes[start - 1]) {
        start -= 1;
    }
    let mut end = at + 1;
    while end < bytes.len() && is_email_domain(bytes[end]) {
        end += 1;
    }
    while end > at + 1 && matches!(bytes[end - 1], b'.' | b'-') {
        end -= 1;
    }
    if start == at {
        return None;
    }
    let domain = &bytes[at + 1..end];
    let dot = domain.iter().rposition(|&b| b == b'.')?;
    let tld = &domain[dot + 1..];
    if dot == 0 || tld.len() < 2 || !tld.iter().all(u8::is_ascii_alphabetic) {
        return None;
    }
    Some((start, end))
}

fn strip_emails(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'@' {
            if let Some((start, end)) = email_span(bytes, i, last) {
                out.push_str(&s[last..start]);
                out.push(' ');
                last = end;
                i = end;
                continue;
            }
        }
        i += 1;
    }
    out.push_str(&s[last..]);
    out
}

/// Length of a dotted-quad IPv4 address starting at `i`, if one does.
fn ipv4_len(bytes: &[u8], i: usize) -> Option<usize> {
    let mut pos = i;
    for group in 0..4 {
        if group > 0 {
            if bytes.get(pos) != Some(&b'.') {
                return None;
            }
            pos += 1;
        }
        let digits = bytes[pos..].iter().take_while(|b| b.is_ascii_digit()).count();
        if digits == 0 || digits > 3 {
            return None;
        }
        let value = bytes[pos..pos + digits]
            .iter()
            .fold(0u32, |acc, b| acc * 10 + u32::from(b - b'0'));
        if value > 255 {
            return None;
        }
        pos += digits;
    }
    let continues = match bytes.get(pos) {
        Some(b) if b.is_ascii_digit() => true,
        Some(b'.') => bytes.get(pos + 1).is_some_and(u8::is_ascii_digit),
        _ => false,
    };
    (!continues).then_some(pos - i)
}

fn strip_ipv4(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        let fresh = i == 0 || !(bytes[i - 1].is_ascii_digit() || bytes[i - 1] == b'.');
        if fresh && bytes[i].is_ascii_digit() {
            if let Some(len) = ipv4_len(bytes, i) {
                out.push_str(&s[last..i]);
                out.push(' ');
                last = i + len;
                i = last;
                continue;
            }
        }
        i += 1;
    }
    out.push_str(&s[last..]);
    out
}

/// Emoji and pictograph blocks, plus the joiners and selectors that glue
/// emoji sequences together.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F1E6..=0x1F1FF // regional indicators (flags)
        | 0x1F300..=0x1F5FF // misc symbols and pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport and map
        | 0x1F900..=0x1F9FF // supplemental symbols and pictographs
        | 0x1FA70..=0x1FAFF // symbols and pictographs extended-a
        | 0x2600..=0x26FF // misc symbols
        | 0x2700..=0x27BF // dingbats
        | 0x200D | 0xFE0E | 0xFE0F | 0x20E3
    )
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() && !c.is_numeric() && !is_emoji(c)
}

/// Character-level rules: emoji, digits, special characters, lowercase and
/// whitespace collapse. Lowercase expansions that are not themselves
/// lowercase letters (combining marks, caseless capitals) are dropped so the
/// output is a fixed point.
fn normalize_chars(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut gap = false;
    let emit = |out: &mut String, gap: &mut bool, c: char| {
        if *gap && !out.is_empty() {
            out.push(' ');
        }
        *gap = false;
        out.push(c);
    };
    for c in s.chars() {
        if is_apostrophe(c) {
            emit(&mut out, &mut gap, '\'');
        } else if is_word_char(c) {
            for lower in c.to_lowercase() {
                if is_word_char(lower) && !lower.is_uppercase() {
                    emit(&mut out, &mut gap, lower);
                }
            }
        } else {
            gap = true;
        }
    }
    out
}

//! Corpus ingestion (CSV, TSV, JSONL) and cleaned-corpus output.
//!
//! Rows stream from disk in batches; each batch is cleaned in parallel and
//! then deduplicated sequentially, so output matches a single-threaded run.
//! Rows that fail to parse are skipped and reported on stderr.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use bipolkit_core::textprep::{clean_text, CleanStats, Deduplicator};
use bipolkit_core::{CleanSample, Label, RawSample};
use rayon::prelude::*;
use serde_json::Value;

use crate::{Error, Result};

/// Column (or JSONL field) that, when present, supplies sample indices.
pub const INDEX_COLUMN: &str = "index";

const BATCH: usize = 8192;
const MAX_ROW_WARNINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
    Jsonl,
}

impl Format {
    /// Guesses the format from the file extension; CSV otherwise.
    pub fn infer(path: &Path) -> Format {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("tsv") => Format::Tsv,
            Some("jsonl") | Some("ndjson") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: Format,
    pub text_col: String,
    pub label_col: String,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        InputSpec {
            format: Format::infer(&path),
            path,
            text_col: "comment_text".into(),
            label_col: "label".into(),
        }
    }
}

/// Parses a corpus label. Accepts `biased`/`unbiased` in any case, and `1`/`0`.
pub fn parse_corpus_label(raw: &str) -> std::result::Result<Option<Label>, String> {
    let t = raw.trim();
    if t.is_empty() {
        return Ok(None);
    }
    match t.to_ascii_lowercase().as_str() {
        "biased" | "1" => Ok(Some(Label::Biased)),
        "unbiased" | "0" => Ok(Some(Label::Unbiased)),
        _ => Err(format!("unknown label {t:?}")),
    }
}

/// One source row: a sample, or a warning explaining why it was skipped.
type RowOutcome = std::result::Result<RawSample, String>;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_index(raw: &str) -> std::result::Result<usize, String> {
    raw.trim().parse().map_err(|_| format!("invalid index {raw:?}"))
}

fn delimited_rows(spec: &InputSpec) -> Result<Box<dyn Iterator<Item = RowOutcome>>> {
    let mut builder = csv::ReaderBuilder::new();
    if spec.format == Format::Tsv {
        builder.delimiter(b'\t').quoting(false);
    }
    let mut reader = builder.from_reader(BufReader::new(open(&spec.path)?));
    let headers = reader
        .headers()
        .map_err(|e| Error::format(&spec.path, format!("cannot read header: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text = find(&spec.text_col).ok_or_else(|| Error::MissingColumn {
        path: spec.path.clone(),
        column: spec.text_col.clone(),
    })?;
    let label = find(&spec.label_col);
    let index = find(INDEX_COLUMN);
    let rows = reader.into_records().enumerate().map(move |(ordinal, rec)| {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = rec.position().map_or(ordinal as u64 + 2, |p| p.line());
        let field = |i: usize| rec.get(i).ok_or_else(|| format!("line {line}: missing field {i}"));
        let text = field(text)?.to_string();
        let label = match label {
            Some(i) => parse_corpus_label(field(i)?).map_err(|m| format!("line {line}: {m}"))?,
            None => None,
        };
        let index = match index {
            Some(i) => parse_index(field(i)?).map_err(|m| format!("line {line}: {m}"))?,
            None => ordinal,
        };
        Ok(RawSample { index, text, label })
    });
    Ok(Box::new(rows))
}

fn jsonl_rows(spec: &InputSpec) -> Result<Box<dyn Iterator<Item = RowOutcome>>> {
    let reader = BufReader::new(open(&spec.path)?);
    let text_col = spec.text_col.clone();
    let label_col = spec.label_col.clone();
    let rows = reader.lines().enumerate().filter_map(move |(ordinal, line)| {
        let lineno = ordinal + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(format!("line {lineno}: {e}"))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(parse_json_row(&line, ordinal, &text_col, &label_col).map_err(|m| format!("line {lineno}: {m}")))
    });
    Ok(Box::new(rows))
}

fn parse_json_row(
    line: &str,
    ordinal: usize,
    text_col: &str,
    label_col: &str,
) -> std::result::Result<RawSample, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("expected a JSON object")?;
    let text = match obj.get(text_col) {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(format!("field {text_col:?} is not a string")),
        None => return Err(format!("missing field {text_col:?}")),
    };
    let label = match obj.get(label_col) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => parse_corpus_label(s)?,
        Some(Value::Number(n)) => parse_corpus_label(&n.to_string())?,
        Some(Value::Bool(b)) => Some(if *b { Label::Biased } else { Label::Unbiased }),
        Some(other) => return Err(format!("unsupported label {other}")),
    };
    let index = match obj.get(INDEX_COLUMN) {
        None => ordinal,
        Some(v) => v
            .as_u64()
            .map(|i| i as usize)
            .ok_or_else(|| format!("invalid index {v}"))?,
    };
    Ok(RawSample { index, text, label })
}

/// Streams raw rows from `spec`. Header problems (a missing text column) are
/// errors; per-row problems surface as `Err` items.
pub fn raw_rows(spec: &InputSpec) -> Result<Box<dyn Iterator<Item = RowOutcome>>> {
    match spec.format {
        Format::Csv | Format::Tsv => delimited_rows(spec),
        Format::Jsonl => jsonl_rows(spec),
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub samples: Vec<CleanSample>,
    pub stats: CleanStats,
    /// Rows skipped because they could not be parsed.
    pub malformed: usize,
}

/// Reads and cleans a corpus, stopping once `limit` samples survive
/// (0 reads everything). Runs inside the current rayon pool.
pub fn ingest(spec: &InputSpec, limit: usize) -> Result<Ingested> {
    let mut rows = raw_rows(spec)?;
    let mut dedup = Deduplicator::default();
    let mut samples = Vec::new();
    let mut seen_index = HashSet::new();
    let mut malformed = 0usize;
    let warn = |msg: String, malformed: &mut usize| {
        *malformed += 1;
        if *malformed <= MAX_ROW_WARNINGS {
            eprintln!("warning: {}: skipping row: {msg}", spec.path.display());
        }
    };
    'outer: loop {
        let mut batch = Vec::with_capacity(BATCH);
        for row in rows.by_ref() {
            match row {
                Ok(raw) if !seen_index.insert(raw.index) => {
                    warn(format!("duplicate index {}", raw.index), &mut malformed)
                }
                Ok(raw) => batch.push(raw),
                Err(msg) => warn(msg, &mut malformed),
            }
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let cleaned: Vec<String> = batch.par_iter().map(|r| clean_text(&r.text)).collect();
        for (raw, text) in batch.into_iter().zip(cleaned) {
            if let Some(sample) = dedup.offer(raw.index, text, raw.label) {
                samples.push(sample);
                if limit > 0 && samples.len() == limit {
                    break 'outer;
                }
            }
        }
    }
    if malformed > MAX_ROW_WARNINGS {
        eprintln!(
            "warning: {}: {malformed} malformed rows skipped in total",
            spec.path.display()
        );
    }
    Ok(Ingested {
        samples,
        stats: dedup.stats(),
        malformed,
    })
}

/// Writes a cleaned corpus as CSV with columns `index`, the text column and,
/// when any sample is labeled, the label column. `None` writes to stdout.
pub fn write_clean_corpus(out: Option<&Path>, samples: &[CleanSample], text_col: &str, label_col: &str) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|e| Error::io(path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let shown = out.unwrap_or(Path::new("<stdout>"));
    let io_err = |e: csv::Error| Error::format(shown, e.to_string());
    let labeled = samples.iter().any(|s| s.label.is_some());
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![INDEX_COLUMN, text_col];
    if labeled {
        header.push(label_col);
    }
    w.write_record(&header).map_err(io_err)?;
    for s in samples {
        let index = s.index.to_string();
        let mut rec = vec![index.as_str(), s.text.as_str()];
        if labeled {
            rec.push(s.label.map_or("", Label::as_str));
        }
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(shown, e))
}

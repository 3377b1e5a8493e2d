//! JSON reports and CSV plot data.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use bipolkit_core::bipol::top_k_terms;
use bipolkit_core::{BaselineReport, BipolReport, TermCount};
use serde::Serialize;

use crate::{Error, Result};

/// A report with its top-k listing appended.
#[derive(Debug, Serialize)]
pub struct WithTopK<'a, R> {
    #[serde(flatten)]
    pub report: &'a R,
    pub top_k: Vec<TermCount>,
}

pub fn bipol_json(report: &BipolReport, k: usize) -> String {
    to_json(&WithTopK {
        report,
        top_k: top_k_terms(&report.frequencies, k),
    })
}

pub fn baseline_json(report: &BaselineReport, k: usize) -> String {
    to_json(&WithTopK {
        report,
        top_k: top_k_terms(&report.frequencies, k),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `text` to `out`, or stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// `axis,type,term,count` rows for bar charts.
pub fn write_top_k_csv(path: &Path, rows: &[TermCount]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["axis", "type", "term", "count"]).map_err(err)?;
    for r in rows {
        w.write_record([&r.axis, &r.type_name, &r.term, &r.count.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Default plot-data path next to a JSON report: `report.json` → `report.topk.csv`.
pub fn sidecar_path(report: &Path) -> PathBuf {
    report.with_extension("topk.csv")
}

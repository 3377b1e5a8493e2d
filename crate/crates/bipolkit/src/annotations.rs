//! Annotation files: `sample_id,annotator,label` plus an optional gold file
//! `sample_id,label`.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use bipolkit_core::agreement::AnnotationMatrix;
use bipolkit_core::Label;

use crate::{Error, Result};

fn read_rows(path: &Path, columns: &[&str]) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, format!("cannot read header: {e}")))?
        .clone();
    let positions = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == *c)
                .ok_or_else(|| Error::MissingColumn {
                    path: path.to_path_buf(),
                    column: c.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, format!("row {}: {e}", row + 1)))?;
        rows.push(
            positions
                .iter()
                .map(|&i| rec.get(i).unwrap_or("").trim().to_string())
                .collect(),
        );
    }
    Ok(rows)
}

fn label(path: &Path, row: usize, raw: &str) -> Result<Label> {
    raw.parse()
        .map_err(|e: bipolkit_core::Error| Error::format(path, format!("row {row}: {e}")))
}

pub fn load_annotations(path: &Path, gold: Option<&Path>) -> Result<AnnotationMatrix> {
    let mut records = Vec::new();
    for (i, mut r) in read_rows(path, &["sample_id", "annotator", "label"])?
        .into_iter()
        .enumerate()
    {
        let l = label(path, i + 1, &r[2])?;
        let annotator = std::mem::take(&mut r[1]);
        records.push((std::mem::take(&mut r[0]), annotator, l));
    }
    let mut gold_rows = Vec::new();
    if let Some(gpath) = gold {
        for (i, mut r) in read_rows(gpath, &["sample_id", "label"])?.into_iter().enumerate() {
            let l = label(gpath, i + 1, &r[1])?;
            gold_rows.push((std::mem::take(&mut r[0]), l));
        }
    }
    Ok(AnnotationMatrix::from_records(records, gold_rows)?)
}

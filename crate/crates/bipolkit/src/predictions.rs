//! Prediction files (`index,label,score`) produced by external classifiers.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use bipolkit_core::{CleanSample, Label, Prediction, PredictionSet};

use crate::{Error, Result};

/// Reads every row of a prediction file. `score` is optional per row and as
/// a column.
pub fn read_predictions(path: &Path) -> Result<PredictionSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, format!("cannot read header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let missing = |name: &str| Error::MissingColumn {
        path: path.to_path_buf(),
        column: name.to_string(),
    };
    let index_col = col("index").ok_or_else(|| missing("index"))?;
    let label_col = col("label").ok_or_else(|| missing("label"))?;
    let score_col = col("score");

    let mut set = PredictionSet::new();
    for (row, rec) in reader.records().enumerate() {
        let row = row + 1;
        let rec = rec.map_err(|e| Error::format(path, format!("row {row}: {e}")))?;
        let bad = |msg: String| Error::format(path, format!("row {row}: {msg}"));
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let index: usize = field(index_col)
            .parse()
            .map_err(|_| bad(format!("invalid index {:?}", field(index_col))))?;
        let label: Label = field(label_col)
            .parse()
            .map_err(|e: bipolkit_core::Error| bad(e.to_string()))?;
        let score = match score_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<f64>().map_err(|_| bad(format!("invalid score {s:?}")))?),
        };
        set.insert(index, Prediction { label, score })
            .map_err(|e| bad(e.to_string()))?;
    }
    Ok(set)
}

/// Reads a prediction file and aligns it to `corpus`; every corpus index must
/// be covered.
pub fn load_predictions(path: &Path, corpus: &[CleanSample]) -> Result<PredictionSet> {
    Ok(read_predictions(path)?.aligned_to(corpus)?)
}

pub fn write_predictions(path: &Path, set: &PredictionSet) -> Result<()> {
    let err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["index", "label", "score"]).map_err(err)?;
    for (index, p) in set.iter() {
        let score = p.score.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([index.to_string().as_str(), p.label.as_str(), score.as_str()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn corpus(n: usize) -> Vec<CleanSample> {
        (0..n)
            .map(|index| CleanSample {
                index,
                text: "x".into(),
                label: None,
            })
            .collect()
    }

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn full_coverage() {
        let f = file("index,label,score\n0,biased,0.9\n1,unbiased,\n2,unbiased,0.1\n");
        let set = load_predictions(f.path(), &corpus(3)).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.get(0).unwrap().score, Some(0.9));
        assert_eq!(set.get(1).unwrap().score, None);
    }

    #[test]
    fn missing_index_named() {
        let mut content = String::from("index,label\n");
        for i in (0..10).filter(|&i| i != 7) {
            content.push_str(&format!("{i},unbiased\n"));
        }
        let err = load_predictions(file(&content).path(), &corpus(10)).unwrap_err();
        assert!(err.to_string().contains("index 7"), "{err}");
    }

    #[test]
    fn unknown_label_named() {
        let err = read_predictions(file("index,label\n0,biased\n1,maybe\n").path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("maybe"), "{msg}");
    }

    #[test]
    fn score_out_of_range() {
        let err = read_predictions(file("index,label,score\n0,biased,1.2\n").path()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn write_then_read() {
        let f = file("index,label,score\n3,biased,0.25\n5,unbiased,\n");
        let set = read_predictions(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_predictions(out.path(), &set).unwrap();
        assert_eq!(read_predictions(out.path()).unwrap(), set);
    }
}

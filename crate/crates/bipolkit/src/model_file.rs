//! Versioned JSON persistence for [`BowModel`].

use std::fs;
use std::path::Path;

use bipolkit_core::BowModel;

use crate::{Error, Result};

pub fn model_to_json(model: &BowModel) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("model serializes");
    s.push('\n');
    s
}

pub fn save_model(path: &Path, model: &BowModel) -> Result<()> {
    fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<BowModel> {
    let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model: BowModel = serde_json::from_str(&json)
        .map_err(|e| Error::format(path, format!("line {} column {}: {e}", e.line(), e.column())))?;
    model.check()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bipolkit_core::{CleanSample, Label};

    fn model() -> BowModel {
        let corpus: Vec<CleanSample> = ["kind words", "women stupid"]
            .iter()
            .enumerate()
            .map(|(i, t)| CleanSample {
                index: i,
                text: (*t).into(),
                label: Some(if i == 0 { Label::Unbiased } else { Label::Biased }),
            })
            .collect();
        BowModel::train(&corpus, 1.0).unwrap()
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&path, &model()).unwrap();
        assert_eq!(load_model(&path).unwrap(), model());
    }

    #[test]
    fn wrong_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let json = model_to_json(&model()).replace("\"format_version\": 1", "\"format_version\": 7");
        fs::write(&path, json).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("version 7"), "{err}");
    }
}

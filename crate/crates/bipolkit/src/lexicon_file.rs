//! Lexicon JSON files:
//!
//! ```json
//! { "language": "en", "axes": [ { "name": "gender", "types": [ { "name": "female", "terms": ["she"] } ] } ] }
//! ```

use std::fs;
use std::path::Path;

use bipolkit_core::lexicon::Diagnostic;
use bipolkit_core::Lexicon;

use crate::{Error, Result};

/// Parses a lexicon without validating it.
pub fn parse_lexicon(path: &Path, json: &str) -> Result<Lexicon> {
    serde_json::from_str(json)
        .map_err(|e| Error::format(path, format!("line {} column {}: {}", e.line(), e.column(), e)))
}

/// Loads and validates a lexicon. Validation errors fail the load; warnings
/// are returned alongside the lexicon.
pub fn load_lexicon(path: &Path) -> Result<(Lexicon, Vec<Diagnostic>)> {
    let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lexicon = parse_lexicon(path, &json)?;
    let diagnostics = lexicon.validate();
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(Error::Lexicon {
            path: path.to_path_buf(),
            diagnostics,
        });
    }
    Ok((lexicon, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load(json: &str) -> Result<(Lexicon, Vec<Diagnostic>)> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(json.as_bytes()).unwrap();
        load_lexicon(f.path())
    }

    #[test]
    fn two_axes() {
        let (lex, warnings) = load(
            r#"{"language":"en","axes":[
                {"name":"gender","types":[{"name":"female","terms":["she","her"]},{"name":"male","terms":["he"]}]},
                {"name":"racial","types":[{"name":"black","terms":["black"]},{"name":"white","terms":["white"]}]}
            ]}"#,
        )
        .unwrap();
        assert_eq!(lex.axes.len(), 2);
        assert!(warnings.is_empty());
    }

    #[test]
    fn format_error_names_line() {
        let err = load("{\"language\": \"en\",\n \"axes\": [ }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(matches!(
            load(r#"{"language":"en","axes":[],"extra":1}"#),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn single_type_axis() {
        let err = load(r#"{"language":"en","axes":[{"name":"gender","types":[{"name":"female","terms":["she"]}]}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("axis needs ≥2 types"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duplicate_term() {
        let err = load(
            r#"{"language":"it","axes":[{"name":"gender","types":[{"name":"female","terms":["donna","donna"]},{"name":"male","terms":["uomo"]}]}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("donna") && msg.contains("female") && msg.contains("duplicate"),
            "{msg}"
        );
    }
}

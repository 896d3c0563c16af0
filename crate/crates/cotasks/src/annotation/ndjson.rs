//! Newline-delimited JSON persistence: one compact JSON document per line,
//! UTF-8, LF line endings. Blank lines are ignored on read.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::types::{NormalizedAnnotation, SCHEMA_VERSION};
use crate::error::CotasksError;

/// Write any serializable records as NDJSON.
pub fn write_ndjson<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CotasksError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| CotasksError::Parse {
            what: path.display().to_string(),
            detail: e.to_string(),
        })?;
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    }
    out.flush().map_err(|e| CotasksError::io(path.display().to_string(), e))
}

/// Read NDJSON records, reporting the 1-based line number on failure.
pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CotasksError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CotasksError::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CotasksError::Parse {
            what: format!("{} line {}", path.display(), i + 1),
            detail: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Write normalized annotations as NDJSON.
pub fn write_annotations(path: &Path, items: &[NormalizedAnnotation]) -> Result<(), CotasksError> {
    write_ndjson(path, items)
}

/// Read normalized annotations, rejecting records written by an
/// incompatible schema version.
pub fn read_annotations(path: &Path) -> Result<Vec<NormalizedAnnotation>, CotasksError> {
    let items: Vec<NormalizedAnnotation> = read_ndjson(path)?;
    for item in &items {
        if item.schema_version != SCHEMA_VERSION {
            return Err(CotasksError::SchemaVersion {
                what: format!("{} (video {})", path.display(), item.video_id),
                expected: SCHEMA_VERSION,
                found: item.schema_version,
            });
        }
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::types::EntityRef;

    #[test]
    fn annotations_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotations.ndjson");
        let mut a = NormalizedAnnotation::new("v1", 10);
        a.catalog.push(EntityRef::new(0, "dog"));
        let b = NormalizedAnnotation::new("v2", 5);
        write_annotations(&path, &[a.clone(), b.clone()]).unwrap();
        let back = read_annotations(&path).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn schema_version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotations.ndjson");
        let mut a = NormalizedAnnotation::new("v1", 10);
        a.schema_version = 99;
        write_annotations(&path, &[a]).unwrap();
        let err = read_annotations(&path).unwrap_err();
        assert!(matches!(err, CotasksError::SchemaVersion { found: 99, .. }), "{err}");
    }

    #[test]
    fn read_reports_line_number_of_bad_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ndjson");
        std::fs::write(&path, "{\"qid\": \"a\"}\nnot json\n").unwrap();
        let err = read_ndjson::<serde_json::Value>(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn blank_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gaps.ndjson");
        std::fs::write(&path, "1\n\n2\n\n\n3\n").unwrap();
        let nums: Vec<u32> = read_ndjson(&path).unwrap();
        assert_eq!(nums, vec![1, 2, 3]);
    }
}

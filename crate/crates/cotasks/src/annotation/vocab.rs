//! Predicate vocabulary: the closed sets of spatial and temporal predicates
//! that relation instances are checked against.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::RelationKind;
use crate::error::CotasksError;

/// Closed predicate sets. A predicate belongs to exactly one kind; the
/// builtin vocabulary keeps the two sets disjoint and lookups reject
/// anything outside both.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    pub spatial: BTreeSet<String>,
    pub temporal: BTreeSet<String>,
}

/// Vocabulary shipped with the crate, covering the predicates used by the
/// source annotations (14 spatial configurations, 36 actions).
const BUILTIN: &str = include_str!("../../assets/vocabulary.json");

impl Vocabulary {
    /// The embedded default vocabulary.
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN).expect("embedded vocabulary parses")
    }

    /// Load a replacement vocabulary from a JSON file with the same shape
    /// as the builtin (`{"spatial": [...], "temporal": [...]}`).
    pub fn from_path(path: &Path) -> Result<Self, CotasksError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
        let vocab: Vocabulary = serde_json::from_str(&text).map_err(|e| {
            CotasksError::Parse { what: path.display().to_string(), detail: e.to_string() }
        })?;
        if let Some(shared) = vocab.spatial.intersection(&vocab.temporal).next() {
            return Err(CotasksError::Parse {
                what: path.display().to_string(),
                detail: format!("predicate {shared:?} listed as both spatial and temporal"),
            });
        }
        Ok(vocab)
    }

    /// Classify a predicate, or `None` when it is outside both sets.
    pub fn kind_of(&self, predicate: &str) -> Option<RelationKind> {
        if self.spatial.contains(predicate) {
            Some(RelationKind::Spatial)
        } else if self.temporal.contains(predicate) {
            Some(RelationKind::Temporal)
        } else {
            None
        }
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.kind_of(predicate).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sets_are_disjoint_and_nonempty() {
        let v = Vocabulary::builtin();
        assert!(!v.spatial.is_empty());
        assert!(!v.temporal.is_empty());
        assert!(v.spatial.intersection(&v.temporal).next().is_none());
    }

    #[test]
    fn classifies_known_predicates() {
        let v = Vocabulary::builtin();
        assert_eq!(v.kind_of("next_to"), Some(RelationKind::Spatial));
        assert_eq!(v.kind_of("towards"), Some(RelationKind::Spatial));
        assert_eq!(v.kind_of("hold"), Some(RelationKind::Temporal));
        assert_eq!(v.kind_of("watch"), Some(RelationKind::Temporal));
        assert_eq!(v.kind_of("no_such_predicate"), None);
    }
}

//! Structural validation of normalized annotations.
//!
//! Violations are data, not errors: a report lists everything wrong with a
//! video so callers can decide whether to repair, quarantine, or fail.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::types::NormalizedAnnotation;
use super::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    /// Two catalog entries share a trajectory id.
    DuplicateTid,
    /// Category is empty or contains characters outside `[a-z_]`.
    CategoryMalformed,
    /// A trajectory is keyed by a tid absent from the catalog.
    UnknownTid,
    /// A trajectory places a box at a frame index >= frame_count.
    FidOutOfRange,
    /// Box with non-positive extent or negative coordinates.
    BboxDegenerate,
    /// Box exceeds the declared video width/height.
    BboxOutOfBounds,
    /// Relation endpoint tid absent from the catalog.
    RelationUnknownTid,
    /// Relation with head_tid == tail_tid.
    SelfRelation,
    /// Relation span `[begin, end)` with begin >= end.
    SpanEmpty,
    /// Relation span extends past frame_count.
    SpanOutOfRange,
    /// Predicate outside both vocabulary sets.
    UnknownPredicate,
    /// Predicate is in the vocabulary but under the other kind.
    KindMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub video_id: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, code: ViolationCode) -> usize {
        self.violations.iter().filter(|v| v.code == code).count()
    }
}

fn category_ok(category: &str) -> bool {
    !category.is_empty() && category.bytes().all(|b| b == b'_' || b.is_ascii_lowercase())
}

/// Check one annotation against the structural invariants and the predicate
/// vocabulary. Never fails; every defect becomes a [`Violation`].
pub fn validate(annotation: &NormalizedAnnotation, vocab: &Vocabulary) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |code: ViolationCode, detail: String| violations.push(Violation { code, detail });

    let mut declared: BTreeSet<u32> = BTreeSet::new();
    for entity in &annotation.catalog {
        if !declared.insert(entity.tid) {
            push(ViolationCode::DuplicateTid, format!("tid {} declared twice", entity.tid));
        }
        if !category_ok(&entity.category) {
            push(
                ViolationCode::CategoryMalformed,
                format!("tid {} category {:?}", entity.tid, entity.category),
            );
        }
    }

    for (&tid, track) in &annotation.trajectories {
        if !declared.contains(&tid) {
            push(ViolationCode::UnknownTid, format!("trajectory for undeclared tid {tid}"));
        }
        for (&fid, bbox) in track {
            if fid >= annotation.frame_count {
                push(
                    ViolationCode::FidOutOfRange,
                    format!("tid {tid} has a box at frame {fid} >= frame_count {}", annotation.frame_count),
                );
            }
            if !bbox.is_wellformed() {
                push(ViolationCode::BboxDegenerate, format!("tid {tid} frame {fid}: {bbox:?}"));
            } else if let (Some(w), Some(h)) = (annotation.width, annotation.height) {
                if !bbox.fits_within(w, h) {
                    push(
                        ViolationCode::BboxOutOfBounds,
                        format!("tid {tid} frame {fid}: {bbox:?} exceeds {w}x{h}"),
                    );
                }
            }
        }
    }

    for (i, rel) in annotation.relations.iter().enumerate() {
        for tid in [rel.head_tid, rel.tail_tid] {
            if !declared.contains(&tid) {
                push(
                    ViolationCode::RelationUnknownTid,
                    format!("relation #{i} ({}) references undeclared tid {tid}", rel.predicate),
                );
            }
        }
        if rel.head_tid == rel.tail_tid {
            push(
                ViolationCode::SelfRelation,
                format!("relation #{i} ({}) relates tid {} to itself", rel.predicate, rel.head_tid),
            );
        }
        if rel.begin_fid >= rel.end_fid {
            push(
                ViolationCode::SpanEmpty,
                format!("relation #{i} ({}) span [{}, {})", rel.predicate, rel.begin_fid, rel.end_fid),
            );
        } else if rel.end_fid > annotation.frame_count {
            push(
                ViolationCode::SpanOutOfRange,
                format!(
                    "relation #{i} ({}) span [{}, {}) exceeds frame_count {}",
                    rel.predicate, rel.begin_fid, rel.end_fid, annotation.frame_count
                ),
            );
        }
        match vocab.kind_of(&rel.predicate) {
            None => push(ViolationCode::UnknownPredicate, format!("relation #{i}: {:?}", rel.predicate)),
            Some(kind) if kind != rel.kind => push(
                ViolationCode::KindMismatch,
                format!("relation #{i} ({}) tagged {:?}, vocabulary says {:?}", rel.predicate, rel.kind, kind),
            ),
            Some(_) => {}
        }
    }

    ValidationReport { video_id: annotation.video_id.clone(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::types::{BBox, EntityRef, RelationInstance, RelationKind};

    fn base() -> NormalizedAnnotation {
        let mut a = NormalizedAnnotation::new("v1", 10);
        a.width = Some(640);
        a.height = Some(360);
        a.catalog = vec![EntityRef::new(0, "adult"), EntityRef::new(1, "handbag")];
        a.trajectories
            .entry(0)
            .or_default()
            .insert(0, BBox::new(0, 0, 100, 100));
        a.relations.push(RelationInstance {
            head_tid: 0,
            tail_tid: 1,
            predicate: "hold".into(),
            begin_fid: 0,
            end_fid: 10,
            kind: RelationKind::Temporal,
        });
        a
    }

    #[test]
    fn clean_annotation_yields_empty_report() {
        let report = validate(&base(), &Vocabulary::builtin());
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn flags_duplicate_tid_and_bad_category() {
        let mut a = base();
        a.catalog.push(EntityRef::new(0, "Adult!"));
        let report = validate(&a, &Vocabulary::builtin());
        assert_eq!(report.count(ViolationCode::DuplicateTid), 1);
        assert_eq!(report.count(ViolationCode::CategoryMalformed), 1);
    }

    #[test]
    fn flags_box_problems() {
        let mut a = base();
        a.trajectories.entry(0).or_default().insert(12, BBox::new(0, 0, 10, 10));
        a.trajectories.entry(0).or_default().insert(3, BBox::new(50, 50, 50, 90));
        a.trajectories.entry(0).or_default().insert(4, BBox::new(0, 0, 700, 100));
        let report = validate(&a, &Vocabulary::builtin());
        assert_eq!(report.count(ViolationCode::FidOutOfRange), 1);
        assert_eq!(report.count(ViolationCode::BboxDegenerate), 1);
        assert_eq!(report.count(ViolationCode::BboxOutOfBounds), 1);
    }

    #[test]
    fn flags_relation_problems() {
        let mut a = base();
        a.relations.push(RelationInstance {
            head_tid: 0,
            tail_tid: 0,
            predicate: "next_to".into(),
            begin_fid: 5,
            end_fid: 5,
            kind: RelationKind::Spatial,
        });
        a.relations.push(RelationInstance {
            head_tid: 0,
            tail_tid: 9,
            predicate: "frobnicate".into(),
            begin_fid: 0,
            end_fid: 99,
            kind: RelationKind::Temporal,
        });
        a.relations.push(RelationInstance {
            head_tid: 1,
            tail_tid: 0,
            predicate: "hold".into(),
            begin_fid: 0,
            end_fid: 2,
            kind: RelationKind::Spatial,
        });
        let report = validate(&a, &Vocabulary::builtin());
        assert_eq!(report.count(ViolationCode::SelfRelation), 1);
        assert_eq!(report.count(ViolationCode::SpanEmpty), 1);
        assert_eq!(report.count(ViolationCode::RelationUnknownTid), 1);
        assert_eq!(report.count(ViolationCode::SpanOutOfRange), 1);
        assert_eq!(report.count(ViolationCode::UnknownPredicate), 1);
        assert_eq!(report.count(ViolationCode::KindMismatch), 1);
    }

    #[test]
    fn violation_codes_serialize_screaming_snake() {
        let v = Violation { code: ViolationCode::BboxDegenerate, detail: "x".into() };
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"BBOX_DEGENERATE\""), "{json}");
    }
}

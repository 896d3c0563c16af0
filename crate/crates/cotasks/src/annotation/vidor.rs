//! Reader for VidOR-style per-video annotation JSON.
//!
//! Expected document shape (one JSON object per video):
//!
//! ```json
//! {
//!   "video_id": "4814320993",
//!   "frame_count": 128,
//!   "width": 640,
//!   "height": 360,
//!   "subject/objects": [{"tid": 0, "category": "adult"}],
//!   "trajectories": [
//!     [{"tid": 0, "bbox": {"xmin": 10, "ymin": 20, "xmax": 110, "ymax": 220}}]
//!   ],
//!   "relation_instances": [
//!     {"subject_tid": 0, "object_tid": 1, "predicate": "hold",
//!      "begin_fid": 0, "end_fid": 64}
//!   ]
//! }
//! ```
//!
//! `trajectories` is indexed by original frame id; each element lists the
//! boxes visible in that frame. Relation spans are half-open `[begin, end)`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use super::types::{BBox, EntityRef, NormalizedAnnotation, RelationInstance};
use super::vocab::Vocabulary;
use super::{ParseMode, ParsedVideo, QuarantinedRelation};
use crate::error::CotasksError;

#[derive(Debug, Deserialize)]
struct RawDoc {
    video_id: String,
    frame_count: u32,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
    #[serde(rename = "subject/objects")]
    subject_objects: Vec<RawEntity>,
    #[serde(default)]
    trajectories: Vec<Vec<RawTrackedBox>>,
    #[serde(default)]
    relation_instances: Vec<RawRelation>,
}

#[derive(Debug, Deserialize)]
struct RawEntity {
    tid: u32,
    category: String,
}

#[derive(Debug, Deserialize)]
struct RawTrackedBox {
    tid: u32,
    bbox: RawBBox,
}

#[derive(Debug, Deserialize)]
struct RawBBox {
    xmin: i64,
    ymin: i64,
    xmax: i64,
    ymax: i64,
}

#[derive(Debug, Deserialize)]
struct RawRelation {
    subject_tid: u32,
    object_tid: u32,
    predicate: String,
    begin_fid: u32,
    end_fid: u32,
}

/// Parse one VidOR-style document from a string.
///
/// Referential defects (duplicate tid, undeclared tid, more trajectory
/// frames than `frame_count`) are always fatal. Relation-level defects
/// (unknown predicate, empty or out-of-range span, self-relation) are fatal
/// in [`ParseMode::Strict`] and quarantined in [`ParseMode::Lenient`].
pub fn parse_vidor_str(
    text: &str,
    vocab: &Vocabulary,
    mode: ParseMode,
) -> Result<ParsedVideo, CotasksError> {
    let raw: RawDoc = serde_json::from_str(text).map_err(|e| CotasksError::Parse {
        what: "vidor document".into(),
        detail: e.to_string(),
    })?;
    let video_id = raw.video_id.clone();

    let mut declared: BTreeSet<u32> = BTreeSet::new();
    for ent in &raw.subject_objects {
        if !declared.insert(ent.tid) {
            return Err(CotasksError::integrity(&video_id, format!("tid {} declared twice", ent.tid)));
        }
    }

    if raw.trajectories.len() > raw.frame_count as usize {
        return Err(CotasksError::integrity(
            &video_id,
            format!(
                "{} trajectory frames but frame_count is {}",
                raw.trajectories.len(),
                raw.frame_count
            ),
        ));
    }

    let mut annotation = NormalizedAnnotation::new(&raw.video_id, raw.frame_count);
    annotation.width = raw.width;
    annotation.height = raw.height;
    annotation.catalog = raw
        .subject_objects
        .iter()
        .map(|e| EntityRef::new(e.tid, e.category.clone()))
        .collect();
    annotation.catalog.sort_by_key(|e| e.tid);

    for (fid, frame) in raw.trajectories.iter().enumerate() {
        for tracked in frame {
            if !declared.contains(&tracked.tid) {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("frame {fid} tracks undeclared tid {}", tracked.tid),
                ));
            }
            let bbox = BBox::new(tracked.bbox.xmin, tracked.bbox.ymin, tracked.bbox.xmax, tracked.bbox.ymax);
            let previous = annotation
                .trajectories
                .entry(tracked.tid)
                .or_default()
                .insert(fid as u32, bbox);
            if previous.is_some() {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("frame {fid} lists tid {} twice", tracked.tid),
                ));
            }
        }
    }

    let mut quarantined = Vec::new();
    for rel in &raw.relation_instances {
        let mut reject = |reason: String| -> Result<(), CotasksError> {
            match mode {
                ParseMode::Strict => Err(CotasksError::integrity(
                    &video_id,
                    format!(
                        "relation ({} -[{}]-> {}, [{}, {})): {reason}",
                        rel.subject_tid, rel.predicate, rel.object_tid, rel.begin_fid, rel.end_fid
                    ),
                )),
                ParseMode::Lenient => {
                    quarantined.push(QuarantinedRelation {
                        head_tid: rel.subject_tid,
                        tail_tid: rel.object_tid,
                        predicate: rel.predicate.clone(),
                        begin_fid: rel.begin_fid,
                        end_fid: rel.end_fid,
                        reason,
                    });
                    Ok(())
                }
            }
        };

        for tid in [rel.subject_tid, rel.object_tid] {
            if !declared.contains(&tid) {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("relation ({}) references undeclared tid {tid}", rel.predicate),
                ));
            }
        }

        let kind = match vocab.kind_of(&rel.predicate) {
            Some(kind) => kind,
            None => {
                reject(format!("unknown predicate {:?}", rel.predicate))?;
                continue;
            }
        };
        if rel.subject_tid == rel.object_tid {
            reject("relates an entity to itself".into())?;
            continue;
        }
        if rel.begin_fid >= rel.end_fid {
            reject("empty span".into())?;
            continue;
        }
        if rel.end_fid > raw.frame_count {
            reject(format!("span end {} exceeds frame_count {}", rel.end_fid, raw.frame_count))?;
            continue;
        }

        annotation.relations.push(RelationInstance {
            head_tid: rel.subject_tid,
            tail_tid: rel.object_tid,
            predicate: rel.predicate.clone(),
            begin_fid: rel.begin_fid,
            end_fid: rel.end_fid,
            kind,
        });
    }

    Ok(ParsedVideo { annotation, quarantined })
}

/// Read and parse one VidOR-style JSON file.
pub fn parse_vidor_file(
    path: &Path,
    vocab: &Vocabulary,
    mode: ParseMode,
) -> Result<ParsedVideo, CotasksError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    parse_vidor_str(&text, vocab, mode).map_err(|e| match e {
        CotasksError::Parse { detail, .. } => {
            CotasksError::Parse { what: path.display().to_string(), detail }
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::types::RelationKind;

    const SAMPLE: &str = r#"{
        "video_id": "4814320993",
        "frame_count": 4,
        "width": 640,
        "height": 360,
        "subject/objects": [
            {"tid": 0, "category": "adult"},
            {"tid": 1, "category": "handbag"}
        ],
        "trajectories": [
            [{"tid": 0, "bbox": {"xmin": 10, "ymin": 20, "xmax": 110, "ymax": 220}},
             {"tid": 1, "bbox": {"xmin": 200, "ymin": 30, "xmax": 260, "ymax": 120}}],
            [{"tid": 0, "bbox": {"xmin": 12, "ymin": 20, "xmax": 112, "ymax": 220}}],
            [],
            [{"tid": 1, "bbox": {"xmin": 210, "ymin": 35, "xmax": 270, "ymax": 125}}]
        ],
        "relation_instances": [
            {"subject_tid": 0, "object_tid": 1, "predicate": "carry", "begin_fid": 0, "end_fid": 4},
            {"subject_tid": 1, "object_tid": 0, "predicate": "next_to", "begin_fid": 0, "end_fid": 2}
        ]
    }"#;

    #[test]
    fn parses_sample_document() {
        let parsed = parse_vidor_str(SAMPLE, &Vocabulary::builtin(), ParseMode::Strict).unwrap();
        let a = &parsed.annotation;
        assert_eq!(a.video_id, "4814320993");
        assert_eq!(a.frame_count, 4);
        assert_eq!(a.catalog_labels(), vec!["0_adult", "1_handbag"]);
        assert_eq!(a.trajectories[&0].len(), 2);
        assert_eq!(a.trajectories[&1].len(), 2);
        assert_eq!(a.box_at(1, 3).unwrap().x1, 210);
        assert_eq!(a.relations.len(), 2);
        assert_eq!(a.relations[0].kind, RelationKind::Temporal);
        assert_eq!(a.relations[1].kind, RelationKind::Spatial);
        assert!(parsed.quarantined.is_empty());
    }

    #[test]
    fn duplicate_tid_is_fatal() {
        let doc = SAMPLE.replace(r#"{"tid": 1, "category": "handbag"}"#, r#"{"tid": 0, "category": "handbag"}"#);
        let err = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Lenient).unwrap_err();
        assert!(err.to_string().contains("declared twice"), "{err}");
    }

    #[test]
    fn undeclared_trajectory_tid_is_fatal() {
        let doc = SAMPLE.replace(r#"[{"tid": 1, "bbox": {"xmin": 210"#, r#"[{"tid": 7, "bbox": {"xmin": 210"#);
        let err = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Lenient).unwrap_err();
        assert!(err.to_string().contains("undeclared tid 7"), "{err}");
    }

    #[test]
    fn more_trajectory_frames_than_frame_count_is_fatal() {
        let doc = SAMPLE.replace(r#""frame_count": 4"#, r#""frame_count": 3"#);
        let err = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Lenient).unwrap_err();
        assert!(err.to_string().contains("frame_count"), "{err}");
    }

    #[test]
    fn unknown_predicate_errors_in_strict_names_predicate() {
        let doc = SAMPLE.replace(r#""predicate": "carry""#, r#""predicate": "frobnicates""#);
        let err = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Strict).unwrap_err();
        assert!(err.to_string().contains("frobnicates"), "{err}");
    }

    #[test]
    fn unknown_predicate_quarantines_in_lenient() {
        let doc = SAMPLE.replace(r#""predicate": "carry""#, r#""predicate": "frobnicates""#);
        let parsed = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Lenient).unwrap();
        assert_eq!(parsed.annotation.relations.len(), 1);
        assert_eq!(parsed.quarantined.len(), 1);
        assert_eq!(parsed.quarantined[0].predicate, "frobnicates");
        assert!(parsed.quarantined[0].reason.contains("unknown predicate"));
    }

    #[test]
    fn empty_span_quarantines_in_lenient() {
        let doc = SAMPLE.replace(r#""begin_fid": 0, "end_fid": 2"#, r#""begin_fid": 2, "end_fid": 2"#);
        let parsed = parse_vidor_str(&doc, &Vocabulary::builtin(), ParseMode::Lenient).unwrap();
        assert_eq!(parsed.annotation.relations.len(), 1);
        assert_eq!(parsed.quarantined.len(), 1);
        assert_eq!(parsed.quarantined[0].reason, "empty span");
    }
}

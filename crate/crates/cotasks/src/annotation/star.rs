//! Reader for STAR-style situation-graph JSON.
//!
//! Expected document shape (one JSON object per video):
//!
//! ```json
//! {
//!   "video_id": "XKQ1A",
//!   "frame_count": 120,
//!   "entities": [{"tid": 0, "category": "person"}],
//!   "situations": [
//!     {"keyframe_id": 12,
//!      "entities": [{"tid": 0, "bbox": [10, 20, 110, 220]}],
//!      "relationships": [{"head_tid": 0, "predicate": "hold", "tail_tid": 1}]}
//!   ],
//!   "questions": [
//!     {"question_id": "Interaction_T1_13", "question": "...",
//!      "choices": ["...", "..."], "answer_idx": 0,
//!      "entity_tids": [0, 1], "keyframe_ids": [12]}
//!   ]
//! }
//! ```
//!
//! `frame_count`, `width`, and `height` are optional; when `frame_count` is
//! absent it is inferred as `max keyframe_id + 1`. Situation relationships
//! hold at single keyframes; a triple observed at keyframes that are
//! adjacent in the sorted keyframe list is merged into one half-open span
//! `[first, last + 1)`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::types::{
    BBox, EntityRef, NormalizedAnnotation, QARecord, QType, RelationInstance, Source, StarGrounding,
};
use super::vocab::Vocabulary;
use super::{ParseMode, ParsedVideo, QuarantinedRelation};
use crate::error::CotasksError;

#[derive(Debug, Deserialize)]
struct RawDoc {
    video_id: String,
    #[serde(default)]
    frame_count: Option<u32>,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
    entities: Vec<RawEntity>,
    situations: Vec<RawSituation>,
    #[serde(default)]
    questions: Vec<RawQuestion>,
}

#[derive(Debug, Deserialize)]
struct RawEntity {
    tid: u32,
    category: String,
}

#[derive(Debug, Deserialize)]
struct RawSituation {
    keyframe_id: u32,
    #[serde(default)]
    entities: Vec<RawSituationEntity>,
    #[serde(default)]
    relationships: Vec<RawRelationship>,
}

#[derive(Debug, Deserialize)]
struct RawSituationEntity {
    tid: u32,
    bbox: [i64; 4],
}

#[derive(Debug, Deserialize)]
struct RawRelationship {
    head_tid: u32,
    predicate: String,
    tail_tid: u32,
}

#[derive(Debug, Deserialize)]
struct RawQuestion {
    question_id: String,
    question: String,
    choices: Vec<String>,
    answer_idx: usize,
    #[serde(default)]
    entity_tids: Vec<u32>,
    #[serde(default)]
    keyframe_ids: Vec<u32>,
}

/// A parsed STAR-style document: the normalized video plus its questions.
#[derive(Debug)]
pub struct ParsedStar {
    pub video: ParsedVideo,
    pub questions: Vec<QARecord>,
}

/// Parse one STAR-style document from a string. See the module docs for the
/// merge rule turning per-keyframe relationships into spans.
pub fn parse_star_str(
    text: &str,
    vocab: &Vocabulary,
    mode: ParseMode,
) -> Result<ParsedStar, CotasksError> {
    let raw: RawDoc = serde_json::from_str(text).map_err(|e| CotasksError::Parse {
        what: "star document".into(),
        detail: e.to_string(),
    })?;
    let video_id = raw.video_id.clone();

    let mut declared: BTreeSet<u32> = BTreeSet::new();
    for ent in &raw.entities {
        if !declared.insert(ent.tid) {
            return Err(CotasksError::integrity(&video_id, format!("tid {} declared twice", ent.tid)));
        }
    }

    let mut keyframes: Vec<u32> = Vec::with_capacity(raw.situations.len());
    let mut seen_kf: BTreeSet<u32> = BTreeSet::new();
    for situation in &raw.situations {
        if !seen_kf.insert(situation.keyframe_id) {
            return Err(CotasksError::integrity(
                &video_id,
                format!("keyframe {} appears in two situations", situation.keyframe_id),
            ));
        }
        keyframes.push(situation.keyframe_id);
    }
    keyframes.sort_unstable();

    let max_kf = keyframes.last().copied().unwrap_or(0);
    let frame_count = match raw.frame_count {
        Some(n) if n < max_kf + 1 => {
            return Err(CotasksError::integrity(
                &video_id,
                format!("frame_count {n} smaller than last keyframe {max_kf}"),
            ));
        }
        Some(n) => n,
        None => max_kf + 1,
    };

    let mut annotation = NormalizedAnnotation::new(&raw.video_id, frame_count);
    annotation.width = raw.width;
    annotation.height = raw.height;
    annotation.catalog = raw.entities.iter().map(|e| EntityRef::new(e.tid, e.category.clone())).collect();
    annotation.catalog.sort_by_key(|e| e.tid);

    // Which sorted-keyframe positions each triple is observed at.
    let mut observed: BTreeMap<(u32, String, u32), Vec<usize>> = BTreeMap::new();
    let mut quarantined = Vec::new();

    for situation in &raw.situations {
        let kf = situation.keyframe_id;
        let position = keyframes.binary_search(&kf).expect("keyframe was collected");
        for ent in &situation.entities {
            if !declared.contains(&ent.tid) {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("keyframe {kf} tracks undeclared tid {}", ent.tid),
                ));
            }
            annotation.trajectories.entry(ent.tid).or_default().insert(kf, BBox::from(ent.bbox));
        }
        for rel in &situation.relationships {
            for tid in [rel.head_tid, rel.tail_tid] {
                if !declared.contains(&tid) {
                    return Err(CotasksError::integrity(
                        &video_id,
                        format!("keyframe {kf} relationship references undeclared tid {tid}"),
                    ));
                }
            }
            let defect = if rel.head_tid == rel.tail_tid {
                Some("relates an entity to itself".to_string())
            } else if !vocab.contains(&rel.predicate) {
                Some(format!("unknown predicate {:?}", rel.predicate))
            } else {
                None
            };
            if let Some(reason) = defect {
                match mode {
                    ParseMode::Strict => {
                        return Err(CotasksError::integrity(
                            &video_id,
                            format!(
                                "keyframe {kf} relationship ({} -[{}]-> {}): {reason}",
                                rel.head_tid, rel.predicate, rel.tail_tid
                            ),
                        ));
                    }
                    ParseMode::Lenient => {
                        quarantined.push(QuarantinedRelation {
                            head_tid: rel.head_tid,
                            tail_tid: rel.tail_tid,
                            predicate: rel.predicate.clone(),
                            begin_fid: kf,
                            end_fid: kf + 1,
                            reason,
                        });
                        continue;
                    }
                }
            }
            observed
                .entry((rel.head_tid, rel.predicate.clone(), rel.tail_tid))
                .or_default()
                .push(position);
        }
    }

    for ((head_tid, predicate, tail_tid), mut positions) in observed {
        positions.sort_unstable();
        positions.dedup();
        let kind = vocab.kind_of(&predicate).expect("predicate was vetted");
        let mut run_start = positions[0];
        let mut run_end = positions[0];
        let flush = |from: usize, to: usize, annotation: &mut NormalizedAnnotation| {
            annotation.relations.push(RelationInstance {
                head_tid,
                tail_tid,
                predicate: predicate.clone(),
                begin_fid: keyframes[from],
                end_fid: keyframes[to] + 1,
                kind,
            });
        };
        for &p in &positions[1..] {
            if p == run_end + 1 {
                run_end = p;
            } else {
                flush(run_start, run_end, &mut annotation);
                run_start = p;
                run_end = p;
            }
        }
        flush(run_start, run_end, &mut annotation);
    }

    let mut questions = Vec::with_capacity(raw.questions.len());
    for q in &raw.questions {
        if q.answer_idx >= q.choices.len() {
            return Err(CotasksError::integrity(
                &video_id,
                format!(
                    "question {} answer_idx {} out of range for {} choices",
                    q.question_id,
                    q.answer_idx,
                    q.choices.len()
                ),
            ));
        }
        for tid in &q.entity_tids {
            if !declared.contains(tid) {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("question {} references undeclared tid {tid}", q.question_id),
                ));
            }
        }
        for kf in &q.keyframe_ids {
            if !seen_kf.contains(kf) {
                return Err(CotasksError::integrity(
                    &video_id,
                    format!("question {} references missing keyframe {kf}", q.question_id),
                ));
            }
        }
        let mut keyframe_fids = q.keyframe_ids.clone();
        keyframe_fids.sort_unstable();
        keyframe_fids.dedup();
        questions.push(QARecord {
            qid: q.question_id.clone(),
            video_id: video_id.clone(),
            question: q.question.clone(),
            answer: q.choices[q.answer_idx].clone(),
            qtype: QType::STAR,
            source: Source::Star,
            mc_options: Some(q.choices.clone()),
            star: Some(StarGrounding { entity_tids: q.entity_tids.clone(), keyframe_fids }),
        });
    }

    Ok(ParsedStar { video: ParsedVideo { annotation, quarantined }, questions })
}

/// Read and parse one STAR-style JSON file.
pub fn parse_star_file(
    path: &Path,
    vocab: &Vocabulary,
    mode: ParseMode,
) -> Result<ParsedStar, CotasksError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CotasksError::io(path.display().to_string(), e))?;
    parse_star_str(&text, vocab, mode).map_err(|e| match e {
        CotasksError::Parse { detail, .. } => {
            CotasksError::Parse { what: path.display().to_string(), detail }
        }
        other => other,
    })
}

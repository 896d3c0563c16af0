//! Uniform frame sampling and re-indexing of annotations onto the sampled
//! timeline.
//!
//! A video with `N` original frames is reduced to at most `k` slots. Slot
//! `i` (0-based) shows original frame `floor(i * N / k)` when `N >= k`;
//! shorter videos keep every frame. Downstream artifacts address slots by
//! 1-based *timestamps* `1..=k'` where `k'` is the number of slots.
//!
//! Relations annotated over half-open original-frame spans `[begin, end)`
//! are mapped to the inclusive timestamp range covering every sampled slot
//! whose original frame falls inside the span; relations whose span
//! contains no sampled frame are dropped and reported.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::{BBox, EntityRef, NormalizedAnnotation, RelationKind};

/// Mapping from sampled slots to original frame indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMap {
    pub k: u32,
    pub frame_count: u32,
    /// `orig_of[i]` is the original frame shown in slot `i`; non-decreasing.
    pub orig_of: Vec<u32>,
}

impl SampleMap {
    /// Uniformly sample up to `k` of `frame_count` frames.
    pub fn uniform(frame_count: u32, k: u32) -> SampleMap {
        let orig_of = if frame_count >= k {
            (0..k)
                .map(|i| (u64::from(i) * u64::from(frame_count) / u64::from(k.max(1))) as u32)
                .collect()
        } else {
            (0..frame_count).collect()
        };
        SampleMap { k, frame_count, orig_of }
    }

    /// Number of sampled slots (`k'`): `min(k, frame_count)`.
    pub fn len(&self) -> u32 {
        self.orig_of.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.orig_of.is_empty()
    }

    /// Original frame behind 1-based timestamp `t`.
    pub fn orig_of_timestamp(&self, t: u32) -> Option<u32> {
        if t == 0 {
            return None;
        }
        self.orig_of.get(t as usize - 1).copied()
    }

    /// Map a half-open original-frame span `[begin, end)` onto the sampled
    /// timeline: the smallest and largest timestamps whose original frame
    /// lies inside the span, or `None` when no sampled frame does.
    pub fn map_span(&self, begin: u32, end: u32) -> Option<(u32, u32)> {
        if begin >= end {
            return None;
        }
        // orig_of is non-decreasing, so the qualifying slots are contiguous.
        let first = self.orig_of.partition_point(|&f| f < begin);
        let last = self.orig_of.partition_point(|&f| f < end);
        if first >= last {
            return None;
        }
        Some((first as u32 + 1, last as u32))
    }
}

/// One relation expressed in timestamp coordinates with entity labels.
/// `start_frame..=end_frame` is inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedRelation {
    pub head_label: String,
    pub predicate: String,
    pub tail_label: String,
    pub start_frame: u32,
    pub end_frame: u32,
}

/// An annotation re-addressed to sampled timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReindexedAnnotation {
    pub video_id: String,
    /// Number of sampled slots; timestamps run `1..=len`.
    pub len: u32,
    pub catalog: Vec<EntityRef>,
    /// timestamp -> tid -> box (only entities visible in that slot's frame).
    pub boxes: BTreeMap<u32, BTreeMap<u32, BBox>>,
    pub spatial_relations: Vec<MappedRelation>,
    pub temporal_relations: Vec<MappedRelation>,
}

/// A relation dropped during re-indexing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedRelation {
    pub head_tid: u32,
    pub tail_tid: u32,
    pub predicate: String,
    pub begin_fid: u32,
    pub end_fid: u32,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DropReport {
    pub video_id: String,
    pub dropped: Vec<DroppedRelation>,
}

/// Project an annotation onto the sampled timeline. Relations whose span
/// covers no sampled frame land in the [`DropReport`] (also logged); both
/// relation lists come back sorted by
/// `(start_frame, head_label, predicate, tail_label, end_frame)`.
pub fn reindex(annotation: &NormalizedAnnotation, map: &SampleMap) -> (ReindexedAnnotation, DropReport) {
    let mut boxes: BTreeMap<u32, BTreeMap<u32, BBox>> = BTreeMap::new();
    for (slot, &fid) in map.orig_of.iter().enumerate() {
        let t = slot as u32 + 1;
        for (&tid, track) in &annotation.trajectories {
            if let Some(&bbox) = track.get(&fid) {
                boxes.entry(t).or_default().insert(tid, bbox);
            }
        }
    }

    let mut spatial = Vec::new();
    let mut temporal = Vec::new();
    let mut report = DropReport { video_id: annotation.video_id.clone(), dropped: Vec::new() };

    for rel in &annotation.relations {
        let (Some(head_label), Some(tail_label)) =
            (annotation.label_of(rel.head_tid), annotation.label_of(rel.tail_tid))
        else {
            report.dropped.push(DroppedRelation {
                head_tid: rel.head_tid,
                tail_tid: rel.tail_tid,
                predicate: rel.predicate.clone(),
                begin_fid: rel.begin_fid,
                end_fid: rel.end_fid,
                reason: "endpoint missing from catalog".into(),
            });
            continue;
        };
        match map.map_span(rel.begin_fid, rel.end_fid) {
            Some((start_frame, end_frame)) => {
                let mapped = MappedRelation {
                    head_label,
                    predicate: rel.predicate.clone(),
                    tail_label,
                    start_frame,
                    end_frame,
                };
                match rel.kind {
                    RelationKind::Spatial => spatial.push(mapped),
                    RelationKind::Temporal => temporal.push(mapped),
                }
            }
            None => {
                report.dropped.push(DroppedRelation {
                    head_tid: rel.head_tid,
                    tail_tid: rel.tail_tid,
                    predicate: rel.predicate.clone(),
                    begin_fid: rel.begin_fid,
                    end_fid: rel.end_fid,
                    reason: "span covers no sampled frame".into(),
                });
            }
        }
    }

    if !report.dropped.is_empty() {
        log::warn!(
            "video {}: dropped {} relation(s) during re-indexing",
            annotation.video_id,
            report.dropped.len()
        );
    }

    let key = |r: &MappedRelation| {
        (r.start_frame, r.head_label.clone(), r.predicate.clone(), r.tail_label.clone(), r.end_frame)
    };
    spatial.sort_by_key(key);
    temporal.sort_by_key(key);

    (
        ReindexedAnnotation {
            video_id: annotation.video_id.clone(),
            len: map.len(),
            catalog: annotation.catalog.clone(),
            boxes,
            spatial_relations: spatial,
            temporal_relations: temporal,
        },
        report,
    )
}

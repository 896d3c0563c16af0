//! The four-subtask decomposition: answer payloads ([`answers`]), builders
//! that derive them from re-indexed annotations ([`build`]), and expansion
//! into flat instruction instances ([`expand`]).

pub mod answers;
pub mod build;
pub mod expand;

pub use answers::{
    cap_timestamps, CoTask1Answer, FrameObjects, LabeledBox, RelationTriple, DEFAULT_TIMESTAMP_CAP,
};
pub use build::{
    build_cotask1_lexical, build_cotask1_llm, build_cotask1_star, build_cotask2, build_cotask3,
    build_cotask4, reformulate_mc, GroundingOutcome, LexicalOptions, LlmGrounding, Q1_TEXT, Q2_TEXT,
    Q3_TEXT, Q4_TEXT,
};
pub use expand::{expand, DatasetInstance, ExpansionStats};

use serde::{Deserialize, Serialize};

use crate::annotation::{QARecord, QType, Source};
use crate::error::CotasksError;
use crate::timeline::ReindexedAnnotation;

/// How A1 was obtained for a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Read straight out of situation-graph grounding.
    StarDirect,
    /// Produced by the grounding model.
    LlmGrounded,
    /// Produced by the offline lexical fallback.
    LexicalFallback,
}

/// One question with its full subtask chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTaskBundle {
    pub qid: String,
    pub video_id: String,
    pub qtype: QType,
    pub source: Source,
    pub q0: String,
    pub a0: String,
    pub q1: String,
    pub a1: CoTask1Answer,
    pub q2: String,
    pub a2: Vec<FrameObjects>,
    pub q3: String,
    pub a3: Vec<RelationTriple>,
    pub q4: String,
    pub a4: Vec<RelationTriple>,
    pub provenance: Provenance,
}

/// One schema problem found in a bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleViolation {
    pub qid: String,
    /// Stable machine-readable code, e.g. `CHAIN_MISMATCH`.
    pub code: String,
    pub detail: String,
}

/// Check one bundle against the schema every persisted bundle must hold:
/// grounding bounds (1..=`cap` strictly increasing timestamps within
/// `[1, k]`, at least one entity), chain consistency (A2 frames equal the
/// A1 timestamps; A2 labels and A3/A4 endpoints come from the A1 entity
/// list), span sanity, and well-formed boxes. Returns every violation
/// found, empty when clean.
pub fn check_bundle(bundle: &CoTaskBundle, k: u32, cap: usize) -> Vec<BundleViolation> {
    let mut violations = Vec::new();
    let mut push = |code: &str, detail: String| {
        violations.push(BundleViolation { qid: bundle.qid.clone(), code: code.into(), detail });
    };

    let timestamps = &bundle.a1.timestamps;
    if timestamps.is_empty() {
        push("TIMESTAMP_BOUNDS", "A1 has no timestamps".into());
    }
    if timestamps.len() > cap {
        push("TIMESTAMP_BOUNDS", format!("{} timestamps exceed the cap of {cap}", timestamps.len()));
    }
    if !timestamps.windows(2).all(|w| w[0] < w[1]) {
        push("TIMESTAMP_BOUNDS", "timestamps are not strictly increasing".into());
    }
    if timestamps.first().is_some_and(|&t| t < 1) || timestamps.last().is_some_and(|&t| t > k) {
        push("TIMESTAMP_BOUNDS", format!("timestamps leave [1, {k}]"));
    }
    if bundle.a1.entities.is_empty() {
        push("NO_ENTITIES", "A1 names no entities".into());
    }

    let frames: Vec<u32> = bundle.a2.iter().map(|f| f.frame).collect();
    if frames != *timestamps {
        push("CHAIN_MISMATCH", format!("A2 frames {frames:?} != A1 timestamps {timestamps:?}"));
    }
    for frame in &bundle.a2 {
        for object in &frame.objects {
            if !bundle.a1.entities.contains(&object.label) {
                push(
                    "ENTITY_UNKNOWN",
                    format!("A2 frame {} lists {} outside the A1 entities", frame.frame, object.label),
                );
            }
            if object.bbox.x2 <= object.bbox.x1 || object.bbox.y2 <= object.bbox.y1 {
                push(
                    "BBOX_INVALID",
                    format!("A2 frame {} box for {} is degenerate: {:?}", frame.frame, object.label, object.bbox),
                );
            }
        }
    }

    for (name, triples) in [("A3", &bundle.a3), ("A4", &bundle.a4)] {
        for triple in triples {
            for endpoint in [&triple.head, &triple.tail] {
                if !bundle.a1.entities.contains(endpoint) {
                    push(
                        "RELATION_ENDPOINT",
                        format!("{name} endpoint {endpoint} outside the A1 entities"),
                    );
                }
            }
            if triple.start_frame < 1
                || triple.end_frame > k
                || triple.start_frame > triple.end_frame
            {
                push(
                    "RELATION_SPAN",
                    format!(
                        "{name} span [{}, {}] leaves [1, {k}]",
                        triple.start_frame, triple.end_frame
                    ),
                );
            }
        }
    }

    violations
}

/// Complete a bundle from a record and its already-built A1, running the
/// rest of the chain (A2 -> A3 -> A4) and stamping the canonical subtask
/// question texts.
pub fn assemble(
    record: &QARecord,
    reindexed: &ReindexedAnnotation,
    a1: CoTask1Answer,
    provenance: Provenance,
) -> Result<CoTaskBundle, CotasksError> {
    let a2 = build::build_cotask2(&a1, reindexed);
    let a3 = build::build_cotask3(&a1, reindexed);
    let a4 = build::build_cotask4(&a1, &a2, &a3, reindexed)?;
    Ok(CoTaskBundle {
        qid: record.qid.clone(),
        video_id: record.video_id.clone(),
        qtype: record.qtype,
        source: record.source,
        q0: record.question.clone(),
        a0: record.answer.clone(),
        q1: Q1_TEXT.into(),
        a1,
        q2: Q2_TEXT.into(),
        a2,
        q3: Q3_TEXT.into(),
        a3,
        q4: Q4_TEXT.into(),
        a4,
        provenance,
    })
}

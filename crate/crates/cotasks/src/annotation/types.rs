//! Normalized object-centric annotation schema shared by all source datasets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Version tag written into every serialized [`NormalizedAnnotation`].
pub const SCHEMA_VERSION: u32 = 1;

/// One entity in a video's catalog, identified by its trajectory id.
///
/// The label `"{tid}_{category}"` (e.g. `"0_adult"`, `"3_handbag"`) is the
/// entity-naming symbol used in every downstream answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRef {
    pub tid: u32,
    pub category: String,
}

impl EntityRef {
    pub fn new(tid: u32, category: impl Into<String>) -> Self {
        Self { tid, category: category.into() }
    }

    /// Derived label: decimal tid, underscore, category.
    pub fn label(&self) -> String {
        format!("{}_{}", self.tid, self.category)
    }
}

/// Axis-aligned box in integer pixel coordinates, `[x1, y1, x2, y2]` with
/// `x1 < x2` and `y1 < y2` when well-formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i64; 4]", into = "[i64; 4]")]
pub struct BBox {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl BBox {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// True iff the box has positive area and no negative coordinate.
    pub fn is_wellformed(&self) -> bool {
        self.x1 < self.x2 && self.y1 < self.y2 && self.x1 >= 0 && self.y1 >= 0
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x2 <= i64::from(width) && self.y2 <= i64::from(height)
    }
}

impl From<[i64; 4]> for BBox {
    fn from(v: [i64; 4]) -> Self {
        Self { x1: v[0], y1: v[1], x2: v[2], y2: v[3] }
    }
}

impl From<BBox> for [i64; 4] {
    fn from(b: BBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

/// Whether a predicate describes an intra-frame configuration or an action
/// unfolding across frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Spatial,
    Temporal,
}

/// A `(head, predicate, tail)` triple holding over a half-open span
/// `[begin_fid, end_fid)` of original frame indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub head_tid: u32,
    pub tail_tid: u32,
    pub predicate: String,
    pub begin_fid: u32,
    pub end_fid: u32,
    pub kind: RelationKind,
}

/// Per-video object catalog, per-frame trajectories, and relation instances:
/// the common denominator both source datasets are normalized into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAnnotation {
    pub schema_version: u32,
    pub video_id: String,
    pub frame_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    pub catalog: Vec<EntityRef>,
    /// tid -> original frame index -> box.
    pub trajectories: BTreeMap<u32, BTreeMap<u32, BBox>>,
    pub relations: Vec<RelationInstance>,
}

impl NormalizedAnnotation {
    pub fn new(video_id: impl Into<String>, frame_count: u32) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            video_id: video_id.into(),
            frame_count,
            width: None,
            height: None,
            catalog: Vec::new(),
            trajectories: BTreeMap::new(),
            relations: Vec::new(),
        }
    }

    pub fn entity(&self, tid: u32) -> Option<&EntityRef> {
        self.catalog.iter().find(|e| e.tid == tid)
    }

    pub fn label_of(&self, tid: u32) -> Option<String> {
        self.entity(tid).map(EntityRef::label)
    }

    pub fn catalog_labels(&self) -> Vec<String> {
        self.catalog.iter().map(EntityRef::label).collect()
    }

    pub fn box_at(&self, tid: u32, fid: u32) -> Option<&BBox> {
        self.trajectories.get(&tid).and_then(|t| t.get(&fid))
    }
}

/// Question type code: the eight NeXT-QA codes plus a catch-all for STAR.
///
/// CW = Why, CH = How, TP = Previous, TC = Current, TN = Next, DC = Count,
/// DL = Location, DO = Other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QType {
    CW,
    CH,
    TP,
    TC,
    TN,
    DC,
    DL,
    DO,
    STAR,
}

impl QType {
    pub const NEXTQA_CODES: [QType; 8] = [
        QType::CW,
        QType::CH,
        QType::TP,
        QType::TC,
        QType::TN,
        QType::DC,
        QType::DL,
        QType::DO,
    ];

    pub fn parse(code: &str) -> Option<QType> {
        match code {
            "CW" => Some(QType::CW),
            "CH" => Some(QType::CH),
            "TP" => Some(QType::TP),
            "TC" => Some(QType::TC),
            "TN" => Some(QType::TN),
            "DC" => Some(QType::DC),
            "DL" => Some(QType::DL),
            "DO" => Some(QType::DO),
            "STAR" => Some(QType::STAR),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            QType::CW => "CW",
            QType::CH => "CH",
            QType::TP => "TP",
            QType::TC => "TC",
            QType::TN => "TN",
            QType::DC => "DC",
            QType::DL => "DL",
            QType::DO => "DO",
            QType::STAR => "STAR",
        }
    }
}

impl std::fmt::Display for QType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Nextqa,
    Star,
}

/// Grounding carried by STAR questions: which catalog entities and which
/// keyframes the question's situation graph references. Lets subtask 1 be
/// constructed directly without a grounding model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarGrounding {
    pub entity_tids: Vec<u32>,
    pub keyframe_fids: Vec<u32>,
}

/// One source question (Q0) with its free-form target answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub qid: String,
    pub video_id: String,
    pub question: String,
    pub answer: String,
    pub qtype: QType,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_options: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarGrounding>,
}

//! Source-dataset ingestion and the normalized annotation model.
//!
//! Two source formats are supported — VidOR-style per-video JSON
//! ([`vidor`]) and STAR-style situation graphs ([`star`]) — both normalized
//! into [`NormalizedAnnotation`]: an object catalog, per-frame box
//! trajectories, and relation instances over half-open frame spans.
//! Questions come from NeXT-QA-style CSVs ([`nextqa`]) or ride along inside
//! STAR documents. [`validate`] checks structural invariants and reports
//! defects as data; [`ndjson`] persists normalized records one JSON
//! document per line.

pub mod ndjson;
pub mod nextqa;
pub mod star;
pub mod types;
pub mod validate;
pub mod vidor;
pub mod vocab;

pub use ndjson::{read_annotations, read_ndjson, write_annotations, write_ndjson};
pub use nextqa::{parse_nextqa_questions, parse_nextqa_questions_str};
pub use star::{parse_star_file, parse_star_str, ParsedStar};
pub use types::{
    BBox, EntityRef, NormalizedAnnotation, QARecord, QType, RelationInstance, RelationKind, Source,
    StarGrounding, SCHEMA_VERSION,
};
pub use validate::{validate, ValidationReport, Violation, ViolationCode};
pub use vidor::{parse_vidor_file, parse_vidor_str};
pub use vocab::Vocabulary;

use serde::{Deserialize, Serialize};

/// How readers treat relation-level defects: fail the whole document, or
/// set the defective relation aside and keep going.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    Strict,
    Lenient,
}

/// A relation a lenient parse refused to keep, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantinedRelation {
    pub head_tid: u32,
    pub tail_tid: u32,
    pub predicate: String,
    pub begin_fid: u32,
    pub end_fid: u32,
    pub reason: String,
}

/// Result of parsing one source video.
#[derive(Debug, Clone)]
pub struct ParsedVideo {
    pub annotation: NormalizedAnnotation,
    pub quarantined: Vec<QuarantinedRelation>,
}

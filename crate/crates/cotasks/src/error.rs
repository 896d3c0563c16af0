//! Crate-wide error type for parsing, validation, and pipeline failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CotasksError {
    #[error("i/o on {what}: {source}")]
    Io {
        what: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {detail}")]
    Parse { what: String, detail: String },

    /// Structural defect in a source document that makes the video unusable
    /// (undeclared trajectory id, duplicate tid, trajectory longer than the
    /// video, out-of-range answer index, ...).
    #[error("integrity error in {video_id}: {detail}")]
    Integrity { video_id: String, detail: String },

    #[error("unsupported schema_version {found} in {what} (this build reads {expected})")]
    SchemaVersion { what: String, expected: u32, found: u32 },

    /// A question that cannot be decomposed into subtasks (no groundable
    /// entities, no visible frames, ...). Such records are quarantined,
    /// not fatal to the corpus.
    #[error("cannot construct subtasks for {qid}: {detail}")]
    Construction { qid: String, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("template error: {0}")]
    Template(#[from] crate::prompt::TemplateError),

    #[error("model gateway error: {0}")]
    Gateway(#[from] crate::gateway::EndpointError),

    #[error("{0}")]
    Other(String),
}

impl CotasksError {
    pub fn io(what: impl Into<String>, source: std::io::Error) -> Self {
        CotasksError::Io { what: what.into(), source }
    }

    pub fn integrity(video_id: impl Into<String>, detail: impl Into<String>) -> Self {
        CotasksError::Integrity { video_id: video_id.into(), detail: detail.into() }
    }
}

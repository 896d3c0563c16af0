//! Chat request/response shapes and content-addressed request digests.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::CotasksError;
use crate::util::sha256_hex;

/// One piece of user-turn content. Image files are referenced by path and
/// only read when the request is sent (or digested).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum ContentPart {
    Text(String),
    ImagePath(PathBuf),
    ImageUrl(String),
}

/// A single chat turn against a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub user_parts: Vec<ContentPart>,
    pub temperature: f32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    /// Text-only request at temperature 0.
    pub fn text(model_id: impl Into<String>, user_text: impl Into<String>) -> Self {
        ChatRequest {
            model_id: model_id.into(),
            system: None,
            user_parts: vec![ContentPart::Text(user_text.into())],
            temperature: 0.0,
            max_tokens: None,
        }
    }

    pub fn with_system(mut self, system: impl Into<String>) -> Self {
        self.system = Some(system.into());
        self
    }

    pub fn with_images(mut self, paths: impl IntoIterator<Item = PathBuf>) -> Self {
        self.user_parts.extend(paths.into_iter().map(ContentPart::ImagePath));
        self
    }

    /// Concatenated text parts (what a text-only consumer would see).
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        for part in &self.user_parts {
            if let ContentPart::Text(t) = part {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(t);
            }
        }
        out
    }

    /// Content digest identifying this request for caching. Image files
    /// contribute their *content* hash, so the digest is stable across
    /// machines but changes when a frame file changes.
    pub fn digest(&self) -> Result<String, CotasksError> {
        let mut parts = Vec::with_capacity(self.user_parts.len());
        for part in &self.user_parts {
            let encoded = match part {
                ContentPart::Text(t) => format!("text:{t}"),
                ContentPart::ImageUrl(u) => format!("image_url:{u}"),
                ContentPart::ImagePath(p) => {
                    let bytes = std::fs::read(p)
                        .map_err(|e| CotasksError::io(p.display().to_string(), e))?;
                    format!("image_sha256:{}", sha256_hex(&bytes))
                }
            };
            parts.push(encoded);
        }
        let canonical = serde_json::json!({
            "model_id": self.model_id,
            "system": self.system,
            "user_parts": parts,
            "temperature": format!("{:?}", self.temperature),
            "max_tokens": self.max_tokens,
        });
        Ok(sha256_hex(canonical.to_string().as_bytes()))
    }
}

/// What the gateway hands back for one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub text: String,
    /// Served from the disk cache without touching the endpoint.
    pub cached: bool,
    pub latency_ms: u64,
    /// Transient failures absorbed before this response.
    pub retries: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = ChatRequest::text("m", "hello");
        let b = ChatRequest::text("m", "hello");
        assert_eq!(a.digest().unwrap(), b.digest().unwrap());

        assert_ne!(a.digest().unwrap(), ChatRequest::text("m", "hello!").digest().unwrap());
        assert_ne!(a.digest().unwrap(), ChatRequest::text("m2", "hello").digest().unwrap());
        assert_ne!(
            a.digest().unwrap(),
            ChatRequest::text("m", "hello").with_system("s").digest().unwrap()
        );
    }

    #[test]
    fn digest_tracks_image_content_not_path() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("frame1.jpg");
        let p2 = dir.path().join("frame2.jpg");
        std::fs::write(&p1, b"same-bytes").unwrap();
        std::fs::write(&p2, b"same-bytes").unwrap();

        let d1 = ChatRequest::text("m", "q").with_images([p1.clone()]).digest().unwrap();
        let d2 = ChatRequest::text("m", "q").with_images([p2]).digest().unwrap();
        assert_eq!(d1, d2);

        std::fs::write(&p1, b"different").unwrap();
        let d3 = ChatRequest::text("m", "q").with_images([p1]).digest().unwrap();
        assert_ne!(d1, d3);
    }

    #[test]
    fn digest_fails_on_missing_image() {
        let req = ChatRequest::text("m", "q").with_images([PathBuf::from("/nonexistent/frame.jpg")]);
        assert!(req.digest().is_err());
    }
}

//! The endpoint abstraction the gateway drives.

use thiserror::Error;

use super::request::ChatRequest;

/// Failure classes that decide retry behavior: transient errors are
/// retried with backoff, fatal ones are not, and authentication failures
/// abort immediately (retrying a bad key only burns quota and time).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndpointError {
    #[error("transient endpoint failure: {0}")]
    Transient(String),

    #[error("endpoint failure: {0}")]
    Fatal(String),

    #[error("authentication rejected: {0}")]
    Auth(String),
}

impl EndpointError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, EndpointError::Transient(_))
    }
}

/// Anything that can answer a chat request synchronously. Implementations
/// must be shareable across the gateway's worker threads.
pub trait ChatEndpoint: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, EndpointError>;
}

//! Model gateway: caching, retry with exponential backoff, and bounded
//! concurrent batch execution over any [`ChatEndpoint`].
//!
//! Everything here is synchronous; batches fan out over plain scoped
//! threads with an atomic work index, which preserves result order and
//! bounds in-flight requests by construction.

pub mod cache;
pub mod endpoint;
pub mod http;
pub mod mock;
pub mod request;

pub use cache::DiskCache;
pub use endpoint::{ChatEndpoint, EndpointError};
pub use http::HttpEndpoint;
pub use mock::{echo_answers, exact_match_judge, MockEndpoint};
pub use request::{ChatRequest, ChatResponse, ContentPart};

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::CotasksError;

/// Backoff schedule for transient failures: attempt `n` (0-based) sleeps
/// `base_delay_ms * 2^n`, capped at `max_delay_ms`. No jitter — runs stay
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay_ms: 250, max_delay_ms: 4_000 }
    }
}

impl RetryPolicy {
    pub fn delay_for_attempt(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Counters over one gateway's lifetime.
#[derive(Debug, Default)]
struct Stats {
    requests: AtomicU64,
    cache_hits: AtomicU64,
    upstream_calls: AtomicU64,
    retries: AtomicU64,
    failures: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub requests: u64,
    pub cache_hits: u64,
    pub upstream_calls: u64,
    pub retries: u64,
    pub failures: u64,
}

pub struct Gateway {
    endpoint: Arc<dyn ChatEndpoint>,
    cache: Option<DiskCache>,
    retry: RetryPolicy,
    stats: Stats,
}

impl Gateway {
    pub fn new(endpoint: Arc<dyn ChatEndpoint>) -> Self {
        Gateway { endpoint, cache: None, retry: RetryPolicy::default(), stats: Stats::default() }
    }

    pub fn with_cache(mut self, cache: DiskCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn stats(&self) -> StatsSnapshot {
        StatsSnapshot {
            requests: self.stats.requests.load(Ordering::Relaxed),
            cache_hits: self.stats.cache_hits.load(Ordering::Relaxed),
            upstream_calls: self.stats.upstream_calls.load(Ordering::Relaxed),
            retries: self.stats.retries.load(Ordering::Relaxed),
            failures: self.stats.failures.load(Ordering::Relaxed),
        }
    }

    /// Send one request: cache lookup, then the endpoint with retry on
    /// transient failures. Authentication failures abort without retrying.
    pub fn send(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        self.stats.requests.fetch_add(1, Ordering::Relaxed);

        let digest = match request.digest() {
            Ok(d) => d,
            Err(e) => {
                self.stats.failures.fetch_add(1, Ordering::Relaxed);
                return Err(EndpointError::Fatal(format!("cannot digest request: {e}")));
            }
        };

        if let Some(cache) = &self.cache {
            match cache.get(&digest) {
                Ok(Some(text)) => {
                    self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(ChatResponse { text, cached: true, latency_ms: 0, retries: 0 });
                }
                Ok(None) => {}
                Err(e) => log::warn!("cache read failed for {digest}: {e}"),
            }
        }

        let started = Instant::now();
        let mut retries = 0u32;
        loop {
            match self.endpoint.send(request) {
                Ok(text) => {
                    self.stats.upstream_calls.fetch_add(1, Ordering::Relaxed);
                    if let Some(cache) = &self.cache {
                        if let Err(e) = cache.put(&digest, &text) {
                            log::warn!("cache write failed for {digest}: {e}");
                        }
                    }
                    return Ok(ChatResponse {
                        text,
                        cached: false,
                        latency_ms: started.elapsed().as_millis() as u64,
                        retries,
                    });
                }
                Err(e) => {
                    self.stats.upstream_calls.fetch_add(1, Ordering::Relaxed);
                    if e.is_retryable() && retries < self.retry.max_retries {
                        let delay = self.retry.delay_for_attempt(retries);
                        log::debug!("transient failure ({e}); retrying in {delay:?}");
                        std::thread::sleep(delay);
                        retries += 1;
                        self.stats.retries.fetch_add(1, Ordering::Relaxed);
                        continue;
                    }
                    self.stats.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
            }
        }
    }

    /// Run many requests with at most `max_in_flight` concurrently active.
    /// The result vector is index-aligned with `requests`; individual
    /// failures don't abort the batch.
    pub fn run_batch(
        &self,
        requests: &[ChatRequest],
        max_in_flight: usize,
    ) -> Result<Vec<Result<ChatResponse, EndpointError>>, CotasksError> {
        if max_in_flight == 0 {
            return Err(CotasksError::Config("max_in_flight must be at least 1".into()));
        }
        let slots: Vec<Mutex<Option<Result<ChatResponse, EndpointError>>>> =
            requests.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = max_in_flight.min(requests.len());

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= requests.len() {
                        break;
                    }
                    let result = self.send(&requests[i]);
                    *slots[i].lock().expect("result slot lock") = Some(result);
                });
            }
        });

        Ok(slots
            .into_iter()
            .map(|slot| slot.into_inner().expect("result slot lock").expect("every slot is filled"))
            .collect())
    }
}

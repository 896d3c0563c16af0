//! The chat gateway: disk cache, retry, and bounded-concurrency batches.
//!
//! Every model call goes through [`Gateway`]. With a cache attached,
//! repeated identical requests are served from disk — which is what makes
//! reruns of the inference commands byte-identical and free. The endpoint
//! here is a mock so the example runs offline; swap in `HttpEndpoint` for
//! a real chat-completions server.
//!
//! ```sh
//! cargo run --example gateway_caching
//! ```

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use cotasks::gateway::{ChatRequest, DiskCache, EndpointError, Gateway, MockEndpoint, RetryPolicy};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;

    // A flaky endpoint: the first call for each unseen prompt fails with a
    // transient error, the retry succeeds. MockEndpoint counts every
    // upstream call it absorbs.
    let seen = Mutex::new(BTreeMap::<String, u32>::new());
    let endpoint = Arc::new(
        MockEndpoint::new(move |request: &ChatRequest| {
            let text = request.text_content();
            let mut seen = seen.lock().unwrap();
            let attempts = seen.entry(text.clone()).or_insert(0);
            *attempts += 1;
            if *attempts == 1 {
                Err(EndpointError::Transient("simulated hiccup".into()))
            } else {
                Ok(format!("echo: {text}"))
            }
        })
        // Hold calls open briefly so the concurrency bound is observable.
        .with_delay(std::time::Duration::from_millis(15)),
    );

    let gateway = Gateway::new(endpoint.clone())
        .with_cache(DiskCache::open(dir.path().join("cache"))?)
        .with_retry(RetryPolicy { max_retries: 3, base_delay_ms: 1, max_delay_ms: 10 });

    let requests: Vec<ChatRequest> = (0..6)
        .map(|i| ChatRequest::text("demo-model", format!("prompt #{i}")))
        .collect();

    // First batch: every request reaches the endpoint twice (fail + retry).
    let first = gateway.run_batch(&requests, 3)?;
    let ok = first.iter().filter(|r| r.is_ok()).count();
    println!("first batch: {ok}/{} answered, {} upstream calls", requests.len(), endpoint.calls());

    // Second batch of the same requests: all served from the disk cache,
    // zero new upstream calls.
    let before = endpoint.calls();
    let second = gateway.run_batch(&requests, 3)?;
    assert!(second.iter().all(|r| r.is_ok()));
    println!(
        "second batch: {} answered, {} new upstream calls",
        second.len(),
        endpoint.calls() - before
    );

    let stats = gateway.stats();
    println!(
        "gateway stats: requests={} cache_hits={} upstream={} retries={} failures={}",
        stats.requests, stats.cache_hits, stats.upstream_calls, stats.retries, stats.failures
    );
    println!("peak concurrent in-flight calls: {}", endpoint.peak_in_flight());
    Ok(())
}

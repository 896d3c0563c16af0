//! Scriptable in-process endpoint for tests and dry runs.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use super::endpoint::{ChatEndpoint, EndpointError};
use super::request::ChatRequest;

type ReplyFn = dyn Fn(&ChatRequest) -> Result<String, EndpointError> + Send + Sync;

/// Endpoint that answers from a closure and records call statistics,
/// including the peak number of concurrent in-flight calls (used to verify
/// the batch runner's concurrency bound).
pub struct MockEndpoint {
    reply: Box<ReplyFn>,
    delay: Option<Duration>,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    peak_in_flight: AtomicUsize,
}

impl MockEndpoint {
    pub fn new<F>(reply: F) -> Self
    where
        F: Fn(&ChatRequest) -> Result<String, EndpointError> + Send + Sync + 'static,
    {
        MockEndpoint {
            reply: Box::new(reply),
            delay: None,
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            peak_in_flight: AtomicUsize::new(0),
        }
    }

    /// Hold each call open for `delay`, making concurrency observable.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.peak_in_flight.load(Ordering::SeqCst)
    }
}

impl ChatEndpoint for MockEndpoint {
    fn send(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak_in_flight.fetch_max(now, Ordering::SeqCst);
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }
        let result = (self.reply)(request);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        result
    }
}

/// Value of the last prompt line starting with `prefix`, trimmed.
fn last_line_value<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    text.lines().rev().find_map(|line| line.strip_prefix(prefix)).map(str::trim)
}

/// Mock subject model: finds the question inside a rendered answering
/// prompt (the `Q0:` line, or the quoted `Contextual question:` line) and
/// replies with the mapped text. Unmapped questions are a fatal error so
/// tests fail loudly instead of scoring garbage.
pub fn echo_answers(answers_by_question: BTreeMap<String, String>) -> MockEndpoint {
    MockEndpoint::new(move |request| {
        let text = request.text_content();
        let question = last_line_value(&text, "Q0: ")
            .or_else(|| {
                last_line_value(&text, "Contextual question: ")
                    .map(|q| q.trim_matches('"'))
            })
            .ok_or_else(|| EndpointError::Fatal("echo mock: no question line in prompt".into()))?;
        answers_by_question
            .get(question)
            .cloned()
            .ok_or_else(|| EndpointError::Fatal(format!("echo mock: unmapped question {question:?}")))
    })
}

/// Mock judge: reads the last `Answer:` / `Response:` lines of a rendered
/// grading prompt and marks 5 on exact (case-insensitive) match, 1
/// otherwise.
pub fn exact_match_judge() -> MockEndpoint {
    MockEndpoint::new(|request| {
        let text = request.text_content();
        let answer = last_line_value(&text, "Answer: ")
            .ok_or_else(|| EndpointError::Fatal("judge mock: no Answer line".into()))?;
        let response = last_line_value(&text, "Response: ")
            .ok_or_else(|| EndpointError::Fatal("judge mock: no Response line".into()))?;
        let mark = if answer.eq_ignore_ascii_case(response) { 5 } else { 1 };
        Ok(format!("Your mark: {mark}"))
    })
}

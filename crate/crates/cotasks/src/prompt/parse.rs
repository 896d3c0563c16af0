//! Tolerant parsing of model responses.
//!
//! Models asked for "only JSON" still wrap answers in code fences, lead
//! with prose, or emit Python-repr dicts with single quotes. Lenient
//! parsing peels those layers: strip fences, locate the first balanced
//! JSON-ish value, and if strict JSON parsing fails, convert Python-style
//! quoting (`'`, `True`, `False`, `None`) to JSON and try again. Strict
//! parsing accepts exactly one JSON document and nothing else.

use regex::Regex;
use serde::de::DeserializeOwned;
use std::sync::OnceLock;

use crate::annotation::ParseMode;
use crate::cotask::answers::{CoTask1Answer, FrameObjects, RelationTriple};
use crate::error::CotasksError;

fn parse_error(detail: impl Into<String>) -> CotasksError {
    CotasksError::Parse { what: "model response".into(), detail: detail.into() }
}

/// Remove code fences and wrapping backticks, keep the fenced content.
fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    if let Some(open) = t.find("```") {
        let after = &t[open + 3..];
        // Skip an optional language tag on the fence line.
        let content_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        let content = &after[content_start..];
        let content = match content.find("```") {
            Some(close) => &content[..close],
            None => content,
        };
        return content.trim();
    }
    t.trim_matches('`').trim()
}

/// Slice out the first balanced `{...}` or `[...]`, respecting both
/// single- and double-quoted strings and backslash escapes.
fn first_json_slice(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = bytes.iter().position(|&b| b == b'{' || b == b'[')?;
    let mut depth = 0usize;
    let mut quote: Option<u8> = None;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == q {
                quote = None;
            }
            continue;
        }
        match b {
            b'"' | b'\'' => quote = Some(b),
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Convert Python-repr style to JSON: single-quoted strings become
/// double-quoted (escaping embedded `"`), `True`/`False`/`None` become
/// `true`/`false`/`null`. Content inside double-quoted strings is left
/// untouched.
fn pythonish_to_json(text: &str) -> String {
    #[derive(PartialEq)]
    enum St {
        Out,
        InSingle,
        InDouble,
    }
    let mut out = String::with_capacity(text.len());
    let mut state = St::Out;
    let mut chars = text.chars().peekable();
    let mut prev_word_char = false;
    while let Some(c) = chars.next() {
        match state {
            St::Out => match c {
                '\'' => {
                    state = St::InSingle;
                    out.push('"');
                    prev_word_char = false;
                }
                '"' => {
                    state = St::InDouble;
                    out.push('"');
                    prev_word_char = false;
                }
                'T' | 'F' | 'N' if !prev_word_char => {
                    let mut word = String::from(c);
                    while let Some(&n) = chars.peek() {
                        if n.is_ascii_alphanumeric() || n == '_' {
                            word.push(n);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    match word.as_str() {
                        "True" => out.push_str("true"),
                        "False" => out.push_str("false"),
                        "None" => out.push_str("null"),
                        other => out.push_str(other),
                    }
                    prev_word_char = true;
                }
                c => {
                    prev_word_char = c.is_ascii_alphanumeric() || c == '_';
                    out.push(c);
                }
            },
            St::InSingle => match c {
                '\\' => match chars.next() {
                    Some('\'') => out.push('\''),
                    Some(n) => {
                        out.push('\\');
                        out.push(n);
                    }
                    None => out.push('\\'),
                },
                '"' => out.push_str("\\\""),
                '\'' => {
                    state = St::Out;
                    out.push('"');
                }
                c => out.push(c),
            },
            St::InDouble => match c {
                '\\' => {
                    out.push('\\');
                    if let Some(n) = chars.next() {
                        out.push(n);
                    }
                }
                '"' => {
                    state = St::Out;
                    out.push('"');
                }
                c => out.push(c),
            },
        }
    }
    out
}

/// Parse a typed value out of a model response under the given mode.
pub fn parse_value<T: DeserializeOwned>(text: &str, mode: ParseMode) -> Result<T, CotasksError> {
    match mode {
        ParseMode::Strict => serde_json::from_str(text.trim())
            .map_err(|e| parse_error(format!("strict JSON parse failed: {e}"))),
        ParseMode::Lenient => {
            let stripped = strip_fences(text);
            let slice = first_json_slice(stripped)
                .ok_or_else(|| parse_error("no JSON object or array found"))?;
            match serde_json::from_str(slice) {
                Ok(v) => Ok(v),
                Err(first_err) => serde_json::from_str(&pythonish_to_json(slice)).map_err(|e| {
                    parse_error(format!(
                        "JSON parse failed ({first_err}); Python-style fallback failed ({e})"
                    ))
                }),
            }
        }
    }
}

/// Parse a frame-localization answer (`{"entities": [...], "timestamps":
/// [...]}`, `"objects"` accepted for `"entities"`).
pub fn parse_cotask1(text: &str, mode: ParseMode) -> Result<CoTask1Answer, CotasksError> {
    parse_value(text, mode)
}

/// Parse a tracking answer (`[{"frame": 1, "objects": [...]}, ...]`).
pub fn parse_cotask2(text: &str, mode: ParseMode) -> Result<Vec<FrameObjects>, CotasksError> {
    parse_value(text, mode)
}

/// Parse a relation list (`[{"head": ..., "relation": ..., ...}]`), used
/// for both spatial and temporal subtasks.
pub fn parse_relations(text: &str, mode: ParseMode) -> Result<Vec<RelationTriple>, CotasksError> {
    parse_value(text, mode)
}

/// Extract a 1-5 grade from judge output. Prefers the last
/// `mark: <n>`-style occurrence whose value is in range; falls back to the
/// last standalone in-range integer; `None` when neither exists.
pub fn parse_judge_score(text: &str) -> Option<u8> {
    static MARK: OnceLock<Regex> = OnceLock::new();
    static DENOM: OnceLock<Regex> = OnceLock::new();
    static INT: OnceLock<Regex> = OnceLock::new();
    let mark = MARK.get_or_init(|| Regex::new(r"(?i)mark\s*[:\-]?\s*\**\s*([0-9]+)").unwrap());
    // "3 out of 5" and "3/5" grade the numerator; the scale ceiling is noise.
    let denom = DENOM.get_or_init(|| Regex::new(r"(?i)\s*(?:/\s*5|out\s+of\s+5)\b").unwrap());
    let int = INT.get_or_init(|| Regex::new(r"\b([0-9]+)\b").unwrap());

    let in_range = |m: &str| m.parse::<u8>().ok().filter(|v| (1..=5).contains(v));
    if let Some(v) = mark.captures_iter(text).filter_map(|c| in_range(&c[1])).last() {
        return Some(v);
    }
    let cleaned = denom.replace_all(text, "");
    int.captures_iter(&cleaned).filter_map(|c| in_range(&c[1])).last()
}

/// Clean a free-form phrase answer: drop fences and wrapping quotes, trim.
pub fn parse_phrase(text: &str) -> String {
    let t = strip_fences(text);
    let t = t.trim();
    for (open, close) in [('"', '"'), ('\'', '\'')] {
        if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
            return t[1..t.len() - 1].trim().to_string();
        }
    }
    t.to_string()
}

//! Prompt templates, stored as text assets and filled by `{{marker}}`
//! substitution.
//!
//! Templates come in two flavors of slot: *required* slots must always be
//! provided; *optional* slots may be omitted, in which case every line that
//! mentions the marker is removed wholesale (used to ablate individual
//! answer lines out of the answering prompt). After substitution, any
//! marker left in the text is an error — a rendered prompt never leaks
//! `{{...}}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::util::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateId {
    /// Dataset construction: ground entities/frames for one question.
    Cotask1Gen,
    /// Evaluation of subtask 1 (frame localization).
    Cotask1Eval,
    /// Evaluation of subtask 2 (object tracking).
    Cotask2Eval,
    /// Evaluation of subtask 3 (spatial relations).
    Cotask3Eval,
    /// Evaluation of subtask 4 (temporal relations / actions).
    Cotask4Eval,
    /// Final question answering with optional subtask context lines.
    FinalAnswer,
    /// Answer grading on a 1-5 scale.
    Judge,
}

impl TemplateId {
    pub const ALL: [TemplateId; 7] = [
        TemplateId::Cotask1Gen,
        TemplateId::Cotask1Eval,
        TemplateId::Cotask2Eval,
        TemplateId::Cotask3Eval,
        TemplateId::Cotask4Eval,
        TemplateId::FinalAnswer,
        TemplateId::Judge,
    ];

    pub fn name(self) -> &'static str {
        self.spec().name
    }

    pub fn spec(self) -> &'static TemplateSpec {
        match self {
            TemplateId::Cotask1Gen => &COTASK1_GEN,
            TemplateId::Cotask1Eval => &COTASK1_EVAL,
            TemplateId::Cotask2Eval => &COTASK2_EVAL,
            TemplateId::Cotask3Eval => &COTASK3_EVAL,
            TemplateId::Cotask4Eval => &COTASK4_EVAL,
            TemplateId::FinalAnswer => &FINAL_ANSWER,
            TemplateId::Judge => &JUDGE,
        }
    }

    /// Raw template text.
    pub fn body(self) -> &'static str {
        self.spec().body
    }

    /// SHA-256 of the raw template text, for asset-integrity checks.
    pub fn checksum(self) -> String {
        sha256_hex(self.body().as_bytes())
    }
}

pub struct TemplateSpec {
    pub name: &'static str,
    pub body: &'static str,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
}

static COTASK1_GEN: TemplateSpec = TemplateSpec {
    name: "cotask1_gen",
    body: include_str!("../../assets/prompts/cotask1_gen.txt"),
    required: &["YOUR_QUESTION_HERE", "Ground-truth entities"],
    optional: &[],
};

static COTASK1_EVAL: TemplateSpec = TemplateSpec {
    name: "cotask1_eval",
    body: include_str!("../../assets/prompts/cotask1_eval.txt"),
    required: &["contextual_question"],
    optional: &[],
};

static COTASK2_EVAL: TemplateSpec = TemplateSpec {
    name: "cotask2_eval",
    body: include_str!("../../assets/prompts/cotask2_eval.txt"),
    required: &["q0", "a1", "entities", "frames"],
    optional: &[],
};

static COTASK3_EVAL: TemplateSpec = TemplateSpec {
    name: "cotask3_eval",
    body: include_str!("../../assets/prompts/cotask3_eval.txt"),
    required: &["q0", "a1", "a2", "entities", "frames"],
    optional: &[],
};

static COTASK4_EVAL: TemplateSpec = TemplateSpec {
    name: "cotask4_eval",
    body: include_str!("../../assets/prompts/cotask4_eval.txt"),
    required: &["q0", "a1", "a2", "a3", "entities", "frames"],
    optional: &[],
};

static FINAL_ANSWER: TemplateSpec = TemplateSpec {
    name: "final_answer",
    body: include_str!("../../assets/prompts/final_answer.txt"),
    required: &["q0"],
    optional: &["a1", "a2", "a3", "a4"],
};

static JUDGE: TemplateSpec = TemplateSpec {
    name: "judge",
    body: include_str!("../../assets/prompts/judge.txt"),
    required: &["question", "answer", "prediction"],
    optional: &[],
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template {template}: required slot {slot:?} not provided")]
    MissingSlot { template: &'static str, slot: String },

    #[error("template {template}: slot {slot:?} is not declared")]
    UnknownSlot { template: &'static str, slot: String },

    #[error("template {template}: markers left unfilled: {markers:?}")]
    Unfilled { template: &'static str, markers: Vec<String> },
}

fn marker(slot: &str) -> String {
    format!("{{{{{slot}}}}}")
}

/// All `{{...}}` markers present in a text, in order of appearance.
pub fn markers_in(text: &str) -> Vec<String> {
    let mut found = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                found.push(after[..end].to_string());
                rest = &after[end + 2..];
            }
            None => break,
        }
    }
    found
}

/// Fill a template. Required slots must be present in `slots`; declared
/// optional slots may be absent, which removes each line containing the
/// marker. Providing an undeclared slot is an error. Substitution is a
/// single pass, so slot values are never themselves scanned for markers.
pub fn render(id: TemplateId, slots: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let spec = id.spec();
    for &slot in slots.keys() {
        if !spec.required.contains(&slot) && !spec.optional.contains(&slot) {
            return Err(TemplateError::UnknownSlot { template: spec.name, slot: slot.to_string() });
        }
    }
    for &slot in spec.required {
        if !slots.contains_key(slot) {
            return Err(TemplateError::MissingSlot { template: spec.name, slot: slot.to_string() });
        }
    }

    let omitted: Vec<String> =
        spec.optional.iter().filter(|s| !slots.contains_key(*s as &str)).map(|s| marker(s)).collect();
    let body: String = if omitted.is_empty() {
        spec.body.to_string()
    } else {
        let mut kept = spec
            .body
            .lines()
            .filter(|line| !omitted.iter().any(|m| line.contains(m.as_str())))
            .collect::<Vec<_>>()
            .join("\n");
        if spec.body.ends_with('\n') {
            kept.push('\n');
        }
        kept
    };

    let mut out = String::with_capacity(body.len());
    let mut rest = body.as_str();
    let mut unfilled = Vec::new();
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                let name = &after[..end];
                match slots.get(name) {
                    Some(value) => out.push_str(value),
                    None => unfilled.push(name.to_string()),
                }
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);

    if !unfilled.is_empty() {
        return Err(TemplateError::Unfilled { template: spec.name, markers: unfilled });
    }
    Ok(out)
}

/// Whitespace normalization used when comparing rendered prompts against
/// reference texts: CRLF to LF, trailing whitespace stripped from each
/// line, exactly one trailing newline.
pub fn normalize(text: &str) -> String {
    let mut out: String = text
        .replace("\r\n", "\n")
        .lines()
        .map(|line| line.trim_end())
        .collect::<Vec<_>>()
        .join("\n");
    while out.ends_with('\n') {
        out.pop();
    }
    out.push('\n');
    out
}

//! Inference runs: render per-condition prompts, call the model through the
//! gateway, and normalize the replies for judging.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::annotation::{ParseMode, QType};
use crate::cotask::CoTaskBundle;
use crate::error::CotasksError;
use crate::gateway::{ChatRequest, Gateway};
use crate::prompt::{
    json_inline, parse_cotask1, parse_cotask2, parse_phrase, parse_relations, py_inline, render,
    TemplateId,
};

use super::condition::ConditionId;

/// One model reply for one question under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub qid: String,
    pub condition: ConditionId,
    pub model_id: String,
    pub qtype: QType,
    /// Raw model reply; `None` when the endpoint failed after retries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    /// What the judge compares: the cleaned phrase (final-answer runs) or
    /// the re-serialized typed answer (subtask probes). `None` when the
    /// reply could not be parsed into the expected shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_text: Option<String>,
    /// Endpoint failure detail, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Knobs shared by every inference run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub model_id: String,
    pub max_in_flight: usize,
    pub parse_mode: ParseMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { model_id: "subject".into(), max_in_flight: 4, parse_mode: ParseMode::Lenient }
    }
}

/// Render the main-question prompt for one ablation condition. Subtask
/// answers outside the condition's set are omitted entirely, which removes
/// their `A{n}:` lines from the prompt rather than leaving them blank.
pub fn final_answer_prompt(
    bundle: &CoTaskBundle,
    condition: ConditionId,
) -> Result<String, CotasksError> {
    if condition.per_cotask().is_some() {
        return Err(CotasksError::Config(format!(
            "condition {condition} probes a subtask and has no main-question prompt"
        )));
    }
    let mut slots: BTreeMap<&str, String> = BTreeMap::new();
    slots.insert("q0", bundle.q0.clone());
    for &n in condition.included_answers() {
        match n {
            1 => slots.insert("a1", py_inline(&bundle.a1)),
            2 => slots.insert("a2", py_inline(&bundle.a2)),
            3 => slots.insert("a3", py_inline(&bundle.a3)),
            4 => slots.insert("a4", py_inline(&bundle.a4)),
            _ => unreachable!("answer index out of range"),
        };
    }
    Ok(render(TemplateId::FinalAnswer, &slots)?)
}

/// Render the probe prompt for subtask `n`, feeding the chained
/// ground-truth inputs (the answers to every earlier subtask).
pub fn per_cotask_prompt(bundle: &CoTaskBundle, n: u8) -> Result<String, CotasksError> {
    let mut slots: BTreeMap<&str, String> = BTreeMap::new();
    let id = match n {
        1 => {
            slots.insert("contextual_question", bundle.q0.clone());
            TemplateId::Cotask1Eval
        }
        2 => {
            slots.insert("q0", bundle.q0.clone());
            slots.insert("a1", json_inline(&bundle.a1));
            TemplateId::Cotask2Eval
        }
        3 => {
            slots.insert("q0", bundle.q0.clone());
            slots.insert("a1", json_inline(&bundle.a1));
            slots.insert("a2", json_inline(&bundle.a2));
            TemplateId::Cotask3Eval
        }
        4 => {
            slots.insert("q0", bundle.q0.clone());
            slots.insert("a1", json_inline(&bundle.a1));
            slots.insert("a2", json_inline(&bundle.a2));
            slots.insert("a3", json_inline(&bundle.a3));
            TemplateId::Cotask4Eval
        }
        other => {
            return Err(CotasksError::Config(format!("no subtask {other}; expected 1..=4")));
        }
    };
    if n >= 2 {
        slots.insert("entities", json_inline(&bundle.a1.entities));
        slots.insert("frames", json_inline(&bundle.a1.timestamps));
    }
    Ok(render(id, &slots)?)
}

/// The (question, reference answer) pair the judge grades against for this
/// condition: the main QA pair for final-answer runs, the subtask question
/// and serialized ground-truth answer for probes.
pub fn judged_pair(bundle: &CoTaskBundle, condition: ConditionId) -> (String, String) {
    match condition.per_cotask() {
        None => (bundle.q0.clone(), bundle.a0.clone()),
        Some(1) => (bundle.q1.clone(), json_inline(&bundle.a1)),
        Some(2) => (bundle.q2.clone(), json_inline(&bundle.a2)),
        Some(3) => (bundle.q3.clone(), json_inline(&bundle.a3)),
        Some(_) => (bundle.q4.clone(), json_inline(&bundle.a4)),
    }
}

/// Parse a raw reply into the judgeable text for this condition. Final
/// answers always yield a phrase; probe replies must parse into the
/// subtask's answer type and are re-serialized canonically so the judge
/// compares structure, not formatting.
fn normalize_reply(condition: ConditionId, raw: &str, mode: ParseMode) -> Option<String> {
    match condition.per_cotask() {
        None => Some(parse_phrase(raw)),
        Some(1) => parse_cotask1(raw, mode).ok().map(|a| json_inline(&a)),
        Some(2) => parse_cotask2(raw, mode).ok().map(|a| json_inline(&a)),
        Some(_) => parse_relations(raw, mode).ok().map(|a| json_inline(&a)),
    }
}

/// Run one condition over a set of bundles. `frames_for` resolves the video
/// frames attached to each request (return an empty vec for text-only
/// endpoints). Endpoint failures are recorded on the affected prediction;
/// the run continues.
pub fn run_condition<F>(
    bundles: &[CoTaskBundle],
    condition: ConditionId,
    gateway: &Gateway,
    options: &RunOptions,
    frames_for: F,
) -> Result<Vec<Prediction>, CotasksError>
where
    F: Fn(&CoTaskBundle) -> Vec<PathBuf>,
{
    let mut requests = Vec::with_capacity(bundles.len());
    for bundle in bundles {
        let prompt = match condition.per_cotask() {
            Some(n) => per_cotask_prompt(bundle, n)?,
            None => final_answer_prompt(bundle, condition)?,
        };
        requests
            .push(ChatRequest::text(&options.model_id, prompt).with_images(frames_for(bundle)));
    }
    let responses = gateway.run_batch(&requests, options.max_in_flight)?;

    let mut predictions = Vec::with_capacity(bundles.len());
    for (bundle, response) in bundles.iter().zip(responses) {
        let prediction = match response {
            Ok(reply) => {
                let answer_text = normalize_reply(condition, &reply.text, options.parse_mode);
                if answer_text.is_none() {
                    log::warn!(
                        "{}: unparseable {condition} reply ({} bytes)",
                        bundle.qid,
                        reply.text.len()
                    );
                }
                Prediction {
                    qid: bundle.qid.clone(),
                    condition,
                    model_id: options.model_id.clone(),
                    qtype: bundle.qtype,
                    raw: Some(reply.text),
                    answer_text,
                    error: None,
                }
            }
            Err(e) => Prediction {
                qid: bundle.qid.clone(),
                condition,
                model_id: options.model_id.clone(),
                qtype: bundle.qtype,
                raw: None,
                answer_text: None,
                error: Some(e.to_string()),
            },
        };
        predictions.push(prediction);
    }
    Ok(predictions)
}

//! Judging: grade each prediction against its reference answer with a
//! rating model, retrying once when the rating can't be extracted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::QType;
use crate::cotask::CoTaskBundle;
use crate::error::CotasksError;
use crate::gateway::{ChatRequest, Gateway};
use crate::prompt::{parse_judge_score, render, TemplateId};

use super::condition::ConditionId;
use super::run::{judged_pair, Prediction};

/// Question-family grouping used in the comparison tables. Situation-graph
/// questions don't belong to any of the three families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Causal,
    Temporal,
    Descriptive,
}

/// Map a question-type code to its family.
pub fn category_of(qtype: QType) -> Option<Category> {
    match qtype {
        QType::CW | QType::CH => Some(Category::Causal),
        QType::TP | QType::TC | QType::TN => Some(Category::Temporal),
        QType::DC | QType::DL | QType::DO => Some(Category::Descriptive),
        QType::STAR => None,
    }
}

/// One judged prediction. `judge_score` is `None` when no valid rating
/// could be obtained (unparseable judge output after a retry, judge
/// transport failure, or a missing prediction); such records are excluded
/// from means but always counted. A prediction that was present but failed
/// to parse into the expected answer shape keeps `prediction_invalid =
/// true` and scores 1, the floor of the rating scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub qid: String,
    pub condition: ConditionId,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_score: Option<u8>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub prediction_invalid: bool,
    pub qtype: QType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

/// Render the grading prompt for one (question, reference, prediction)
/// triple.
pub fn judge_prompt(
    question: &str,
    answer: &str,
    prediction: &str,
) -> Result<String, CotasksError> {
    let mut slots: BTreeMap<&str, String> = BTreeMap::new();
    slots.insert("question", question.to_string());
    slots.insert("answer", answer.to_string());
    slots.insert("prediction", prediction.to_string());
    Ok(render(TemplateId::Judge, &slots)?)
}

/// Ask the judge once; retry once with a sharper instruction when the first
/// reply has no extractable rating. The retry carries an extra line so it
/// is a distinct request (a verbatim resend would just replay the cached
/// reply).
fn judge_once(
    gateway: &Gateway,
    judge_model: &str,
    question: &str,
    answer: &str,
    prediction: &str,
) -> Result<Option<u8>, CotasksError> {
    let prompt = judge_prompt(question, answer, prediction)?;
    let first = match gateway.send(&ChatRequest::text(judge_model, &prompt)) {
        Ok(reply) => parse_judge_score(&reply.text),
        Err(e) => {
            log::warn!("judge call failed: {e}");
            return Ok(None);
        }
    };
    if first.is_some() {
        return Ok(first);
    }
    let retry_prompt =
        format!("{prompt}\nRespond with a single integer between 1 and 5 and nothing else.");
    match gateway.send(&ChatRequest::text(judge_model, retry_prompt)) {
        Ok(reply) => Ok(parse_judge_score(&reply.text)),
        Err(e) => {
            log::warn!("judge retry failed: {e}");
            Ok(None)
        }
    }
}

/// Judge a batch of predictions against their source bundles. Produces one
/// record per prediction; predictions whose bundle is missing are an error
/// (the run and the dataset don't match).
pub fn judge_predictions(
    bundles: &BTreeMap<String, CoTaskBundle>,
    predictions: &[Prediction],
    gateway: &Gateway,
    judge_model: &str,
) -> Result<Vec<EvalRecord>, CotasksError> {
    let mut records = Vec::with_capacity(predictions.len());
    for p in predictions {
        let bundle = bundles.get(&p.qid).ok_or_else(|| {
            CotasksError::Config(format!("prediction {} has no bundle in the dataset", p.qid))
        })?;
        let (question, answer) = judged_pair(bundle, p.condition);

        let (judge_score, prediction_invalid) = match (&p.answer_text, &p.raw) {
            // Parsed (or phrase) prediction: grade it.
            (Some(text), _) => (judge_once(gateway, judge_model, &question, &answer, text)?, false),
            // The model replied but the typed answer didn't parse: floor
            // score, flagged.
            (None, Some(_)) => (Some(1), true),
            // No reply at all: nothing to grade.
            (None, None) => (None, false),
        };

        records.push(EvalRecord {
            qid: p.qid.clone(),
            condition: p.condition,
            model_id: p.model_id.clone(),
            prediction: p.answer_text.clone(),
            judge_score,
            prediction_invalid,
            qtype: p.qtype,
            category: category_of(p.qtype),
        });
    }
    Ok(records)
}

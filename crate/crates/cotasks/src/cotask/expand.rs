//! Expansion of bundles into flat instruction-tuning instances: every
//! bundle yields exactly four records, one per subtask.

use serde::{Deserialize, Serialize};

use super::{CoTaskBundle, Provenance};
use crate::prompt::json_inline;

/// One training/evaluation instance of one subtask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetInstance {
    pub qid: String,
    /// 1..=4.
    pub task_index: u8,
    pub question_text: String,
    /// The target answer in the same one-line JSON style prompts embed.
    pub answer_json: String,
    pub video_id: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStats {
    pub bundles: usize,
    pub instances: usize,
    pub per_task: [usize; 4],
}

fn question_text(subtask_question: &str, q0: &str) -> String {
    format!("Q: {subtask_question}\nContextual question: \"{q0}\"")
}

/// Flatten bundles into instances, four per bundle, in bundle order with
/// task order 1..4.
pub fn expand(bundles: &[CoTaskBundle]) -> (Vec<DatasetInstance>, ExpansionStats) {
    let mut instances = Vec::with_capacity(bundles.len() * 4);
    for bundle in bundles {
        let rows: [(u8, &str, String); 4] = [
            (1, bundle.q1.as_str(), json_inline(&bundle.a1)),
            (2, bundle.q2.as_str(), json_inline(&bundle.a2)),
            (3, bundle.q3.as_str(), json_inline(&bundle.a3)),
            (4, bundle.q4.as_str(), json_inline(&bundle.a4)),
        ];
        for (task_index, question, answer_json) in rows {
            instances.push(DatasetInstance {
                qid: bundle.qid.clone(),
                task_index,
                question_text: question_text(question, &bundle.q0),
                answer_json,
                video_id: bundle.video_id.clone(),
                provenance: bundle.provenance,
            });
        }
    }
    let mut per_task = [0usize; 4];
    for instance in &instances {
        per_task[instance.task_index as usize - 1] += 1;
    }
    let stats = ExpansionStats { bundles: bundles.len(), instances: instances.len(), per_task };
    (instances, stats)
}

//! Ablation conditions: which subtask answers are exposed to the model when
//! it answers the main question, plus the per-subtask probe runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One inference condition.
///
/// The first four feed the *final answer* prompt with different subsets of
/// the subtask answers spliced in; `PerCotask(n)` instead asks the model to
/// produce subtask `n`'s answer itself, given the ground-truth answers of
/// the earlier subtasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ConditionId {
    /// Question only, no subtask context.
    Baseline,
    /// Grounding + boxes (answers 1 and 2).
    Ct12,
    /// Spatial + temporal relations (answers 3 and 4).
    Ct34,
    /// The full chain (answers 1 through 4).
    Ct14,
    /// Probe subtask `n` (1..=4) directly.
    PerCotask(u8),
}

impl ConditionId {
    /// The four final-answer ablation conditions, in canonical order.
    pub const FINAL_ANSWER_SET: [ConditionId; 4] =
        [ConditionId::Baseline, ConditionId::Ct12, ConditionId::Ct34, ConditionId::Ct14];

    /// Which subtask answers are spliced into the final-answer prompt.
    /// Empty for `Baseline`; per-subtask probes do not use this prompt at
    /// all, so they also report an empty set.
    pub fn included_answers(self) -> &'static [u8] {
        match self {
            ConditionId::Baseline | ConditionId::PerCotask(_) => &[],
            ConditionId::Ct12 => &[1, 2],
            ConditionId::Ct34 => &[3, 4],
            ConditionId::Ct14 => &[1, 2, 3, 4],
        }
    }

    /// `Some(n)` when this condition probes subtask `n` directly.
    pub fn per_cotask(self) -> Option<u8> {
        match self {
            ConditionId::PerCotask(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::Baseline => f.write_str("baseline"),
            ConditionId::Ct12 => f.write_str("ct12"),
            ConditionId::Ct34 => f.write_str("ct34"),
            ConditionId::Ct14 => f.write_str("ct14"),
            ConditionId::PerCotask(n) => write!(f, "cotask{n}"),
        }
    }
}

impl From<ConditionId> for String {
    fn from(c: ConditionId) -> String {
        c.to_string()
    }
}

impl FromStr for ConditionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ConditionId::Baseline),
            "ct12" => Ok(ConditionId::Ct12),
            "ct34" => Ok(ConditionId::Ct34),
            "ct14" => Ok(ConditionId::Ct14),
            "cotask1" => Ok(ConditionId::PerCotask(1)),
            "cotask2" => Ok(ConditionId::PerCotask(2)),
            "cotask3" => Ok(ConditionId::PerCotask(3)),
            "cotask4" => Ok(ConditionId::PerCotask(4)),
            other => Err(format!(
                "unknown condition {other:?} (expected baseline, ct12, ct34, ct14, or cotask1..cotask4)"
            )),
        }
    }
}

impl TryFrom<String> for ConditionId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

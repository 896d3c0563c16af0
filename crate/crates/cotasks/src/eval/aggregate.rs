//! Score aggregation: ratings scaled to 0–100 and averaged per question
//! type, per question family, and overall.
//!
//! Means are computed from integer score sums, so results are exact for
//! exact inputs and independent of record order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::QType;
use crate::error::CotasksError;
use crate::util::sha256_hex;

use super::condition::ConditionId;
use super::judge::{Category, EvalRecord};

/// A 1–5 rating mapped onto 0–100.
pub fn scaled(score: u8) -> f64 {
    (f64::from(score) - 1.0) / 4.0 * 100.0
}

/// Mean scaled score over `judged` valid records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanScore {
    pub mean: f64,
    pub judged: usize,
}

/// Accuracy over situation-graph records: a prediction counts as correct
/// when its rating reaches the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarStats {
    pub threshold: u8,
    pub judged: usize,
    pub hits: usize,
    pub accuracy: f64,
}

/// Aggregated scores for one condition of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub condition: ConditionId,
    pub model_id: String,
    /// All records, judged or not.
    pub total: usize,
    /// Records with no valid rating; excluded from every mean but always
    /// reported.
    pub invalid_judge: usize,
    /// Replies that failed to parse into the expected answer shape; they
    /// are scored at the floor of the scale and included in means.
    pub invalid_prediction: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overall: Option<MeanScore>,
    pub per_qtype: BTreeMap<QType, MeanScore>,
    pub per_category: BTreeMap<Category, MeanScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarStats>,
    /// Digest of the sorted question ids, used to refuse comparisons
    /// between runs over different question sets.
    pub qid_digest: String,
}

/// Aggregation knobs.
#[derive(Debug, Clone, Copy)]
pub struct AggregateOptions {
    /// Minimum rating for a situation-graph answer to count as correct.
    pub star_threshold: u8,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { star_threshold: 4 }
    }
}

#[derive(Default, Clone, Copy)]
struct Bucket {
    sum: u64,
    judged: usize,
}

impl Bucket {
    fn add(&mut self, score: u8) {
        self.sum += u64::from(score);
        self.judged += 1;
    }

    /// Exact mean of `(score - 1) / 4 * 100` over the bucket, computed from
    /// the integer sum so record order can't perturb it.
    fn mean(self) -> Option<MeanScore> {
        if self.judged == 0 {
            return None;
        }
        let n = self.judged as f64;
        let mean = (self.sum as f64 - n) / (4.0 * n) * 100.0;
        Some(MeanScore { mean, judged: self.judged })
    }
}

/// Digest of the sorted, deduplicated qid set.
pub fn qid_digest<S: AsRef<str>>(qids: impl IntoIterator<Item = S>) -> String {
    let mut sorted: Vec<String> = qids.into_iter().map(|s| s.as_ref().to_string()).collect();
    sorted.sort();
    sorted.dedup();
    sha256_hex(sorted.join("\n").as_bytes())
}

/// Aggregate the records of a single run (one condition, one model).
pub fn aggregate(
    records: &[EvalRecord],
    options: &AggregateOptions,
) -> Result<ScoreReport, CotasksError> {
    let first = records
        .first()
        .ok_or_else(|| CotasksError::Config("cannot aggregate an empty run".into()))?;
    if let Some(odd) = records.iter().find(|r| r.condition != first.condition) {
        return Err(CotasksError::Config(format!(
            "records mix conditions {} and {}; aggregate one run at a time",
            first.condition, odd.condition
        )));
    }

    let mut overall = Bucket::default();
    let mut per_qtype: BTreeMap<QType, Bucket> = BTreeMap::new();
    let mut per_category: BTreeMap<Category, Bucket> = BTreeMap::new();
    let mut invalid_judge = 0usize;
    let mut invalid_prediction = 0usize;
    let mut star_judged = 0usize;
    let mut star_hits = 0usize;
    let mut any_star = false;

    for record in records {
        if record.prediction_invalid {
            invalid_prediction += 1;
        }
        any_star |= record.qtype == QType::STAR;
        let Some(score) = record.judge_score else {
            invalid_judge += 1;
            continue;
        };
        overall.add(score);
        per_qtype.entry(record.qtype).or_default().add(score);
        if let Some(category) = record.category {
            per_category.entry(category).or_default().add(score);
        }
        if record.qtype == QType::STAR {
            star_judged += 1;
            if score >= options.star_threshold {
                star_hits += 1;
            }
        }
    }

    let star = any_star.then(|| StarStats {
        threshold: options.star_threshold,
        judged: star_judged,
        hits: star_hits,
        accuracy: if star_judged == 0 {
            0.0
        } else {
            star_hits as f64 / star_judged as f64 * 100.0
        },
    });

    Ok(ScoreReport {
        condition: first.condition,
        model_id: first.model_id.clone(),
        total: records.len(),
        invalid_judge,
        invalid_prediction,
        overall: overall.mean(),
        per_qtype: per_qtype.into_iter().filter_map(|(k, b)| Some((k, b.mean()?))).collect(),
        per_category: per_category.into_iter().filter_map(|(k, b)| Some((k, b.mean()?))).collect(),
        star,
        qid_digest: qid_digest(records.iter().map(|r| r.qid.as_str())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(qid: &str, qtype: QType, score: Option<u8>) -> EvalRecord {
        EvalRecord {
            qid: qid.into(),
            condition: ConditionId::Ct14,
            model_id: "m".into(),
            prediction: Some("p".into()),
            judge_score: score,
            prediction_invalid: false,
            qtype,
            category: super::super::judge::category_of(qtype),
        }
    }

    #[test]
    fn scale_anchors_are_exact() {
        assert_eq!(scaled(1), 0.0);
        assert_eq!(scaled(2), 25.0);
        assert_eq!(scaled(3), 50.0);
        assert_eq!(scaled(4), 75.0);
        assert_eq!(scaled(5), 100.0);
    }

    #[test]
    fn mean_of_three_five_one_is_fifty() {
        let records = vec![
            record("a", QType::CW, Some(3)),
            record("b", QType::CW, Some(5)),
            record("c", QType::CW, Some(1)),
        ];
        let report = aggregate(&records, &AggregateOptions::default()).unwrap();
        assert_eq!(report.overall.unwrap().mean, 50.0);
        assert_eq!(report.overall.unwrap().judged, 3);
    }

    #[test]
    fn invalid_records_excluded_from_means_but_counted() {
        let records = vec![
            record("a", QType::CW, Some(5)),
            record("b", QType::CW, None),
            record("c", QType::TP, Some(5)),
        ];
        let report = aggregate(&records, &AggregateOptions::default()).unwrap();
        assert_eq!(report.total, 3);
        assert_eq!(report.invalid_judge, 1);
        assert_eq!(report.overall.unwrap().mean, 100.0);
        assert_eq!(report.overall.unwrap().judged, 2);
        assert_eq!(report.per_qtype[&QType::CW].judged, 1);
        assert_eq!(report.per_category[&Category::Causal].mean, 100.0);
        assert_eq!(report.per_category[&Category::Temporal].mean, 100.0);
    }

    #[test]
    fn permutation_of_records_never_changes_any_mean() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;

        let mut records: Vec<EvalRecord> = (0..57)
            .map(|i| {
                let qtype = QType::NEXTQA_CODES[i % 8];
                record(&format!("q{i}"), qtype, Some((i % 5 + 1) as u8))
            })
            .collect();
        let reference = aggregate(&records, &AggregateOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            records.shuffle(&mut rng);
            let shuffled = aggregate(&records, &AggregateOptions::default()).unwrap();
            assert_eq!(shuffled, reference, "aggregation must be order-independent");
        }
    }

    #[test]
    fn star_accuracy_uses_threshold() {
        let records = vec![
            record("a", QType::STAR, Some(5)),
            record("b", QType::STAR, Some(4)),
            record("c", QType::STAR, Some(3)),
            record("d", QType::STAR, None),
        ];
        let report = aggregate(&records, &AggregateOptions::default()).unwrap();
        let star = report.star.unwrap();
        assert_eq!(star.judged, 3);
        assert_eq!(star.hits, 2);
        assert!((star.accuracy - 200.0 / 3.0).abs() < 1e-9);
        assert!(report.per_category.is_empty(), "situation-graph records have no family");

        let strict = aggregate(&records, &AggregateOptions { star_threshold: 5 }).unwrap();
        assert_eq!(strict.star.unwrap().hits, 1);
    }

    #[test]
    fn mixed_conditions_are_rejected() {
        let mut records = vec![record("a", QType::CW, Some(5))];
        let mut other = record("b", QType::CW, Some(5));
        other.condition = ConditionId::Baseline;
        records.push(other);
        assert!(aggregate(&records, &AggregateOptions::default()).is_err());
    }

    #[test]
    fn qid_digest_ignores_order_and_duplicates() {
        let a = qid_digest(["x", "y", "z"]);
        let b = qid_digest(["z", "y", "x", "y"]);
        assert_eq!(a, b);
        assert_ne!(a, qid_digest(["x", "y"]));
    }
}

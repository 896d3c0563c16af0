//! Ablation evaluation: run the model with different subtask-context
//! conditions ([`run`]), grade replies with a rating model ([`judge`]),
//! average the ratings ([`aggregate`]), and compare conditions
//! ([`report`]).

pub mod aggregate;
pub mod condition;
pub mod judge;
pub mod report;
pub mod run;

pub use aggregate::{
    aggregate, qid_digest, scaled, AggregateOptions, MeanScore, ScoreReport, StarStats,
};
pub use condition::ConditionId;
pub use judge::{category_of, judge_predictions, judge_prompt, Category, EvalRecord};
pub use report::{comparison, render_markdown, ComparisonTable, TableRow, COLUMNS};
pub use run::{
    final_answer_prompt, judged_pair, per_cotask_prompt, run_condition, Prediction, RunOptions,
};

//! Toolkit for decomposing object-centric VideoQA questions into four chained
//! grounding subtasks (frame localization, object tracking, spatial relation
//! extraction, temporal relation extraction), building instruction datasets
//! from the decomposition, and scoring VideoLLM inference with and without the
//! subtask context injected.
//!
//! The pipeline stages map onto the top-level modules:
//!
//! 1. [`annotation`] — parse VidOR-style and STAR-style source files into one
//!    normalized object-centric schema.
//! 2. [`timeline`] — uniformly sample each video down to a fixed number of
//!    timeline slots (default 64) and re-index trajectories and relation
//!    spans onto it.
//! 3. [`cotask`] — construct the four chained subtask answers A1–A4 per source
//!    question and expand them into line-delimited dataset instances.
//! 4. [`prompt`] — render the fixed prompt templates and parse model replies
//!    back into typed answers.
//! 5. [`gateway`] — chat-completions client with disk cache, retry, and a
//!    bounded-concurrency batch runner.
//! 6. [`eval`] — run inference under answer-subset conditions, judge replies
//!    on a 1–5 rubric, and aggregate scores into comparison tables.
//! 7. [`pipeline`] — the command layer tying the stages together behind the
//!    `build` / `validate` / `stats` / `infer` / `judge` / `report`
//!    subcommands of the `cotasks` binary.
//!
//! See the crate `examples/` directory for one runnable example per stage.

pub mod annotation;
pub mod cli;
pub mod config;
pub mod cotask;
pub mod error;
pub mod eval;
pub mod gateway;
pub mod pipeline;
pub mod prompt;
pub mod synth;
pub mod timeline;
pub mod util;

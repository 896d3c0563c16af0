//! Prompt templates, inline value serialization, and tolerant response
//! parsing.
//!
//! Every prompt sent to a model is produced by filling one of the seven
//! text templates in `assets/prompts/` ([`template`]). Values embedded in
//! prompts use one of two one-line styles ([`serialize`]); whatever comes
//! back is recovered by the lenient readers in [`parse`].

pub mod parse;
pub mod serialize;
pub mod template;

pub use parse::{
    parse_cotask1, parse_cotask2, parse_judge_score, parse_phrase, parse_relations, parse_value,
};
pub use serialize::{json_inline, py_inline};
pub use template::{markers_in, normalize, render, TemplateError, TemplateId, TemplateSpec};

//! Parse raw annotation documents into the normalized schema.
//!
//! Two source shapes are supported: trajectory documents (per-frame boxes
//! plus relation spans, VidOR-style) and situation-graph documents
//! (per-keyframe boxes and relationships with embedded multiple-choice
//! questions, STAR-style). Both normalize to the same
//! [`NormalizedAnnotation`] so the rest of the pipeline never cares which
//! corpus a video came from.
//!
//! ```sh
//! cargo run --example parse_annotations
//! ```

use cotasks::annotation::{
    parse_star_str, parse_vidor_str, validate, NormalizedAnnotation, ParseMode, Vocabulary,
};

const TRAJECTORY_DOC: &str = r#"{
  "video_id": "4000000001",
  "frame_count": 12,
  "width": 640,
  "height": 360,
  "subject/objects": [
    {"tid": 0, "category": "adult"},
    {"tid": 1, "category": "cup"}
  ],
  "trajectories": [
    [{"tid": 0, "bbox": {"xmin": 5, "ymin": 5, "xmax": 100, "ymax": 300}}],
    [{"tid": 0, "bbox": {"xmin": 6, "ymin": 5, "xmax": 101, "ymax": 300}},
     {"tid": 1, "bbox": {"xmin": 200, "ymin": 250, "xmax": 230, "ymax": 280}}],
    [{"tid": 0, "bbox": {"xmin": 7, "ymin": 5, "xmax": 102, "ymax": 300}},
     {"tid": 1, "bbox": {"xmin": 201, "ymin": 250, "xmax": 231, "ymax": 280}}]
  ],
  "relation_instances": [
    {"subject_tid": 0, "object_tid": 1, "predicate": "hold",
     "begin_fid": 1, "end_fid": 3}
  ]
}"#;

const SITUATION_DOC: &str = r#"{
  "video_id": "SYN00001",
  "frame_count": 40,
  "entities": [
    {"tid": 0, "category": "adult"},
    {"tid": 1, "category": "table"}
  ],
  "situations": [
    {"keyframe_id": 4,
     "entities": [{"tid": 0, "bbox": [10, 10, 60, 200]}],
     "relationships": []},
    {"keyframe_id": 9,
     "entities": [{"tid": 0, "bbox": [12, 10, 62, 200]},
                  {"tid": 1, "bbox": [100, 150, 300, 250]}],
     "relationships": [{"head_tid": 0, "predicate": "next_to", "tail_tid": 1}]},
    {"keyframe_id": 14,
     "entities": [{"tid": 0, "bbox": [14, 10, 64, 200]},
                  {"tid": 1, "bbox": [100, 150, 300, 250]}],
     "relationships": [{"head_tid": 0, "predicate": "next_to", "tail_tid": 1}]}
  ],
  "questions": [
    {"question_id": "Interaction_T1_00001",
     "question": "where is the adult in relation to the table?",
     "choices": ["next to it", "far away", "behind it", "under it"],
     "answer_idx": 0,
     "entity_tids": [0, 1],
     "keyframe_ids": [9, 14]}
  ]
}"#;

fn describe(annotation: &NormalizedAnnotation) {
    println!(
        "  {}: {} frames, {} entities, {} relations",
        annotation.video_id,
        annotation.frame_count,
        annotation.catalog.len(),
        annotation.relations.len()
    );
    for entity in &annotation.catalog {
        let boxed = annotation.trajectories.get(&entity.tid).map_or(0, |t| t.len());
        println!("    {} visible in {boxed} frames", entity.label());
    }
    for relation in &annotation.relations {
        println!(
            "    {} --{}--> {} on frames [{}, {}) ({:?})",
            annotation.label_of(relation.head_tid).unwrap(),
            relation.predicate,
            annotation.label_of(relation.tail_tid).unwrap(),
            relation.begin_fid,
            relation.end_fid,
            relation.kind
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocabulary = Vocabulary::builtin();

    println!("trajectory document:");
    let video = parse_vidor_str(TRAJECTORY_DOC, &vocabulary, ParseMode::Strict)?;
    describe(&video.annotation);

    println!("\nsituation-graph document:");
    let star = parse_star_str(SITUATION_DOC, &vocabulary, ParseMode::Strict)?;
    describe(&star.video.annotation);
    for question in &star.questions {
        println!("    embedded question {}: {}", question.qid, question.question);
        println!("    answer: {}", question.answer);
    }

    // The validator re-checks the normalized invariants (unique tids, boxes
    // inside the frame, spans inside the video, known predicates), which
    // matters for files that arrive from outside the parsers.
    let report = validate(&video.annotation, &vocabulary);
    println!("\nvalidation violations: {}", report.violations.len());
    Ok(())
}

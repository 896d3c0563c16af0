//! Construct the four chained subtask answers for one question.
//!
//! Given a normalized annotation and a question about the video, the chain
//! is: A1 names the relevant entities and timestamps, A2 tracks their boxes
//! across exactly those timestamps, A3 lists the spatial relations among
//! them there, and A4 does the same for temporal relations. Each answer is
//! derived from the previous ones, never independently.
//!
//! ```sh
//! cargo run --example cotask_chain
//! ```

use std::collections::BTreeMap;

use cotasks::annotation::{
    BBox, EntityRef, NormalizedAnnotation, QARecord, QType, RelationInstance, RelationKind, Source,
};
use cotasks::cotask::{
    assemble, build_cotask1_lexical, expand, reformulate_mc, LexicalOptions, Provenance,
};
use cotasks::prompt::py_inline;
use cotasks::timeline::{reindex, SampleMap};

fn demo_annotation() -> NormalizedAnnotation {
    let mut annotation = NormalizedAnnotation::new("4000000042", 120);
    annotation.catalog = vec![
        EntityRef::new(0, "adult"),
        EntityRef::new(1, "handbag"),
        EntityRef::new(2, "dog"),
    ];
    let track = |from: u32, to: u32, x: i64| -> BTreeMap<u32, BBox> {
        (from..to).map(|fid| (fid, BBox::new(x, 40, x + 80, 300))).collect()
    };
    annotation.trajectories.insert(0, track(0, 120, 10));
    annotation.trajectories.insert(1, track(30, 120, 120));
    annotation.trajectories.insert(2, track(0, 60, 400));
    annotation.relations = vec![
        RelationInstance {
            head_tid: 0,
            tail_tid: 1,
            predicate: "carry".into(),
            begin_fid: 30,
            end_fid: 120,
            kind: RelationKind::Temporal,
        },
        RelationInstance {
            head_tid: 0,
            tail_tid: 1,
            predicate: "next_to".into(),
            begin_fid: 30,
            end_fid: 90,
            kind: RelationKind::Spatial,
        },
        RelationInstance {
            head_tid: 2,
            tail_tid: 0,
            predicate: "in_front_of".into(),
            begin_fid: 0,
            end_fid: 60,
            kind: RelationKind::Spatial,
        },
    ];
    annotation
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let annotation = demo_annotation();
    let map = SampleMap::uniform(annotation.frame_count, 16);
    let (reindexed, _) = reindex(&annotation, &map);

    // A multiple-choice question is first reformulated to open-ended: the
    // answer keeps only the correct option's text.
    let record = QARecord {
        qid: "demo-0".into(),
        video_id: annotation.video_id.clone(),
        question: "what does the adult do with the handbag while walking past the dog?".into(),
        answer: "carries it".into(),
        qtype: QType::DO,
        source: Source::Nextqa,
        mc_options: Some(vec![
            "carries it".into(),
            "drops it".into(),
            "ignores it".into(),
            "opens it".into(),
            "kicks it".into(),
        ]),
        star: None,
    };
    let record = reformulate_mc(&record)?;
    println!("Q0: {}", record.question);
    println!("A0: {}\n", record.answer);

    // Offline grounding: entity categories are matched lexically against
    // the question text, and the grounded timestamps are the slots where
    // all matched entities are visible together.
    let a1 = build_cotask1_lexical(&record, &reindexed, &LexicalOptions::default(), 16)?;
    let bundle = assemble(&record, &reindexed, a1, Provenance::LexicalFallback)?;

    println!("Q1: {}\nA1: {}\n", bundle.q1, py_inline(&bundle.a1));
    println!("Q2: {}\nA2: {}\n", bundle.q2, py_inline(&bundle.a2));
    println!("Q3: {}\nA3: {}\n", bundle.q3, py_inline(&bundle.a3));
    println!("Q4: {}\nA4: {}\n", bundle.q4, py_inline(&bundle.a4));

    // Expansion flattens one bundle into four instruction instances, each
    // pairing a subtask question with the original question as context.
    let (instances, stats) = expand(std::slice::from_ref(&bundle));
    println!("{} bundle -> {} instances", stats.bundles, stats.instances);
    println!("first instance question:\n{}", instances[0].question_text);
    Ok(())
}

//! Uniform timeline sampling and span re-indexing.
//!
//! Videos arrive with trajectories and relation spans addressed by original
//! frame id. Downstream everything speaks 1-based timeline slots, so the
//! first step is always: build a [`SampleMap`], then [`reindex`] the
//! annotation onto it.
//!
//! ```sh
//! cargo run --example timeline_sampling
//! ```

use std::collections::BTreeMap;

use cotasks::annotation::{BBox, EntityRef, NormalizedAnnotation, RelationInstance, RelationKind};
use cotasks::timeline::{reindex, SampleMap};

fn main() {
    // A 100-frame clip sampled down to 8 slots.
    let map = SampleMap::uniform(100, 8);
    println!("sampling 100 frames down to {} slots", map.len());
    println!("slot -> original frame: {:?}", map.orig_of);

    // Short videos are kept whole: slots never outnumber frames.
    let short = SampleMap::uniform(5, 8);
    println!("a 5-frame clip keeps all frames: {:?}\n", short.orig_of);

    // Half-open source spans land on inclusive 1-based slot ranges. Spans
    // that fall entirely between two sampled frames map to nothing.
    for (begin, end) in [(0u32, 100u32), (40, 60), (51, 62), (13, 14)] {
        match map.map_span(begin, end) {
            Some((first, last)) => println!("frames [{begin:>3}, {end:>3}) -> slots {first}..={last}"),
            None => println!("frames [{begin:>3}, {end:>3}) -> no sampled frame; dropped"),
        }
    }

    // Re-index a small annotation: boxes are looked up at each slot's
    // original frame, relation spans are mapped, and unmappable relations
    // are reported rather than silently lost.
    let mut annotation = NormalizedAnnotation::new("demo-video", 100);
    annotation.catalog = vec![EntityRef::new(0, "adult"), EntityRef::new(1, "cup")];
    annotation.trajectories.insert(
        0,
        (0..100).map(|fid| (fid, BBox::new(10, 10, 60, 200))).collect::<BTreeMap<_, _>>(),
    );
    annotation.trajectories.insert(
        1,
        (20..30).map(|fid| (fid, BBox::new(70, 120, 90, 140))).collect::<BTreeMap<_, _>>(),
    );
    annotation.relations = vec![
        RelationInstance {
            head_tid: 0,
            tail_tid: 1,
            predicate: "hold".into(),
            begin_fid: 20,
            end_fid: 30,
            kind: RelationKind::Temporal,
        },
        RelationInstance {
            head_tid: 0,
            tail_tid: 1,
            predicate: "behind".into(),
            begin_fid: 13,
            end_fid: 14, // between sampled frames: will be dropped
            kind: RelationKind::Spatial,
        },
    ];

    let (reindexed, drops) = reindex(&annotation, &map);
    println!("\ntimeline length: {}", reindexed.len);
    for (t, boxes) in &reindexed.boxes {
        let labels: Vec<String> = boxes
            .keys()
            .map(|tid| reindexed.catalog.iter().find(|e| e.tid == *tid).unwrap().label())
            .collect();
        println!("slot {t:>2}: {} visible {labels:?}", boxes.len());
    }
    for relation in &reindexed.temporal_relations {
        println!(
            "kept   {} {} {} on slots {}..={}",
            relation.head_label,
            relation.predicate,
            relation.tail_label,
            relation.start_frame,
            relation.end_frame
        );
    }
    for dropped in &drops.dropped {
        println!(
            "dropped tid{} {} tid{} (frames [{}, {})): {}",
            dropped.head_tid,
            dropped.predicate,
            dropped.tail_tid,
            dropped.begin_fid,
            dropped.end_fid,
            dropped.reason
        );
    }
}

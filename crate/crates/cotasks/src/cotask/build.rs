//! Builders for the four chained subtask answers.
//!
//! The chain runs A1 -> A2 -> A3 -> A4: frame localization decides which
//! entities and timestamps matter, tracking reads their boxes off those
//! timestamps, and the two relation subtasks keep exactly the annotated
//! relations that touch the localized entities and frames.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::annotation::{ParseMode, QARecord};
use crate::cotask::answers::{
    cap_timestamps, CoTask1Answer, FrameObjects, LabeledBox, RelationTriple,
};
use crate::error::CotasksError;
use crate::gateway::{ChatRequest, Gateway};
use crate::prompt::{self, TemplateId};
use crate::timeline::{MappedRelation, ReindexedAnnotation, SampleMap};

/// Canonical wording of the four subtask questions as stored in bundles
/// and expanded datasets.
pub const Q1_TEXT: &str =
    "Ground entities and identify frames matching context in the target question.";
pub const Q2_TEXT: &str = "Get object locations (bounding boxes) in frames listed in CoTask 1.";
pub const Q3_TEXT: &str =
    "Infer spatial relations between objects in frames of CoTask 1 and CoTask 2.";
pub const Q4_TEXT: &str =
    "Identify actions among entities using spatial and temporal cues from CoTask 1-3.";

fn construction(qid: &str, detail: impl Into<String>) -> CotasksError {
    CotasksError::Construction { qid: qid.to_string(), detail: detail.into() }
}

/// Turn a multiple-choice record into an open-ended one: the answer becomes
/// the correct option's text and the options are dropped. Records without
/// options pass through unchanged.
pub fn reformulate_mc(record: &QARecord) -> Result<QARecord, CotasksError> {
    let Some(options) = &record.mc_options else {
        return Ok(record.clone());
    };
    if !options.iter().any(|o| o == &record.answer) {
        return Err(CotasksError::integrity(
            &record.video_id,
            format!("question {}: answer {:?} is not among the options", record.qid, record.answer),
        ));
    }
    let mut open = record.clone();
    open.mc_options = None;
    Ok(open)
}

/// A1 from grounding carried by the record (STAR-style sources): entities
/// are the situation graph's, timestamps are the sampled slots that land
/// exactly on its keyframes.
pub fn build_cotask1_star(
    record: &QARecord,
    reindexed: &ReindexedAnnotation,
    map: &SampleMap,
    cap: usize,
) -> Result<CoTask1Answer, CotasksError> {
    let grounding = record
        .star
        .as_ref()
        .ok_or_else(|| construction(&record.qid, "record carries no situation grounding"))?;

    let label_of: BTreeMap<u32, String> =
        reindexed.catalog.iter().map(|e| (e.tid, e.label())).collect();
    let mut entities = Vec::new();
    for &tid in &grounding.entity_tids {
        let label = label_of
            .get(&tid)
            .ok_or_else(|| construction(&record.qid, format!("grounded tid {tid} not in catalog")))?;
        if !entities.contains(label) {
            entities.push(label.clone());
        }
    }
    if entities.is_empty() {
        return Err(construction(&record.qid, "situation grounding names no entities"));
    }

    let keyframes: BTreeSet<u32> = grounding.keyframe_fids.iter().copied().collect();
    let timestamps: Vec<u32> = map
        .orig_of
        .iter()
        .enumerate()
        .filter(|(_, fid)| keyframes.contains(fid))
        .map(|(i, _)| i as u32 + 1)
        .collect();
    if timestamps.is_empty() {
        return Err(construction(&record.qid, "no grounded keyframe survives frame sampling"));
    }

    Ok(CoTask1Answer { entities, timestamps: cap_timestamps(&timestamps, cap) })
}

/// Knobs for lexical grounding: extra surface forms per category.
#[derive(Debug, Clone, Default)]
pub struct LexicalOptions {
    pub synonyms: BTreeMap<String, Vec<String>>,
}

fn category_mentioned(question: &str, category: &str, options: &LexicalOptions) -> bool {
    let mut phrases = vec![category.to_string(), category.replace('_', " ")];
    if let Some(extra) = options.synonyms.get(category) {
        phrases.extend(extra.iter().cloned());
    }
    phrases.sort();
    phrases.dedup();
    phrases.iter().any(|phrase| {
        let pattern = format!(r"(?i)\b{}\b", regex::escape(phrase));
        regex::Regex::new(&pattern).map(|re| re.is_match(question)).unwrap_or(false)
    })
}

/// Deterministic offline A1: entities whose category is mentioned in the
/// question (word-boundary, case-insensitive, optional synonyms);
/// timestamps where all of them are visible together, relaxed to "any of
/// them visible" when they never co-occur.
pub fn build_cotask1_lexical(
    record: &QARecord,
    reindexed: &ReindexedAnnotation,
    options: &LexicalOptions,
    cap: usize,
) -> Result<CoTask1Answer, CotasksError> {
    let matched: Vec<_> = reindexed
        .catalog
        .iter()
        .filter(|e| category_mentioned(&record.question, &e.category, options))
        .collect();
    if matched.is_empty() {
        return Err(construction(&record.qid, "question mentions no catalog category"));
    }
    let entities: Vec<String> = matched.iter().map(|e| e.label()).collect();
    let tids: Vec<u32> = matched.iter().map(|e| e.tid).collect();

    let visible = |t: u32, tid: u32| {
        reindexed.boxes.get(&t).is_some_and(|frame| frame.contains_key(&tid))
    };
    let all_present: Vec<u32> =
        (1..=reindexed.len).filter(|&t| tids.iter().all(|&tid| visible(t, tid))).collect();
    let timestamps = if all_present.is_empty() {
        (1..=reindexed.len).filter(|&t| tids.iter().any(|&tid| visible(t, tid))).collect()
    } else {
        all_present
    };
    if timestamps.is_empty() {
        return Err(construction(&record.qid, "matched entities are never visible on the sampled timeline"));
    }

    Ok(CoTask1Answer { entities, timestamps: cap_timestamps(&timestamps, cap) })
}

/// Everything [`build_cotask1_llm`] needs besides the record itself.
pub struct LlmGrounding<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    /// Image files for the sampled frames, in timestamp order.
    pub frames: Vec<PathBuf>,
    pub parse_mode: ParseMode,
    pub options: &'a LexicalOptions,
    pub cap: usize,
}

/// Outcome of model grounding, carrying how the answer was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundingOutcome {
    Model,
    LexicalFallback,
}

/// A1 by asking a grounding model. The prompt carries the question, the
/// catalog labels, and the sampled frames. An invalid answer earns one
/// retry with the problem spelled out; a second invalid answer falls back
/// to lexical grounding. Endpoint failures and twice-unparseable replies
/// are construction errors.
pub fn build_cotask1_llm(
    record: &QARecord,
    reindexed: &ReindexedAnnotation,
    grounding: &LlmGrounding<'_>,
) -> Result<(CoTask1Answer, GroundingOutcome), CotasksError> {
    let labels: Vec<String> = reindexed.catalog.iter().map(|e| e.label()).collect();
    let label_set: BTreeSet<String> = labels.iter().cloned().collect();
    let slots = BTreeMap::from([
        ("YOUR_QUESTION_HERE", record.question.clone()),
        ("Ground-truth entities", prompt::py_inline(&labels)),
    ]);
    let base_prompt = prompt::render(TemplateId::Cotask1Gen, &slots)?;

    let mut correction: Option<String> = None;
    for attempt in 0..2 {
        let text = match &correction {
            None => base_prompt.clone(),
            Some(problem) => format!(
                "{base_prompt}\n\nYour previous reply was invalid: {problem}. \
                 Reply again with exactly one JSON object in the required format."
            ),
        };
        let request = ChatRequest::text(grounding.model_id, text).with_images(grounding.frames.clone());
        let response = grounding
            .gateway
            .send(&request)
            .map_err(|e| construction(&record.qid, format!("grounding model call failed: {e}")))?;

        match prompt::parse_cotask1(&response.text, grounding.parse_mode) {
            Ok(answer) => match answer.check(&label_set, reindexed.len, grounding.cap) {
                Ok(()) => return Ok((answer, GroundingOutcome::Model)),
                Err(problem) => {
                    log::debug!("{}: grounding attempt {attempt} invalid: {problem}", record.qid);
                    correction = Some(problem);
                }
            },
            Err(e) if attempt == 0 => {
                log::debug!("{}: grounding attempt {attempt} unparseable: {e}", record.qid);
                correction = Some("the reply was not parseable JSON".into());
            }
            Err(e) => {
                return Err(construction(&record.qid, format!("grounding reply unparseable after retry: {e}")));
            }
        }
    }

    let fallback = build_cotask1_lexical(record, reindexed, grounding.options, grounding.cap)?;
    Ok((fallback, GroundingOutcome::LexicalFallback))
}

/// A2: one frame record per A1 timestamp, ascending, listing the boxes of
/// the A1 entities visible there (in A1 entity order). Bbox values are
/// copied bit-for-bit.
pub fn build_cotask2(a1: &CoTask1Answer, reindexed: &ReindexedAnnotation) -> Vec<FrameObjects> {
    let tid_of: BTreeMap<String, u32> =
        reindexed.catalog.iter().map(|e| (e.label(), e.tid)).collect();
    let mut timestamps = a1.timestamps.clone();
    timestamps.sort_unstable();

    timestamps
        .into_iter()
        .map(|t| {
            let objects = a1
                .entities
                .iter()
                .filter_map(|label| {
                    let tid = *tid_of.get(label)?;
                    let bbox = *reindexed.boxes.get(&t)?.get(&tid)?;
                    Some(LabeledBox { label: label.clone(), bbox })
                })
                .collect();
            FrameObjects { frame: t, objects }
        })
        .collect()
}

fn filter_relations(
    a1: &CoTask1Answer,
    relations: &[MappedRelation],
) -> Vec<RelationTriple> {
    let entities: BTreeSet<&str> = a1.entities.iter().map(String::as_str).collect();
    let timestamps: BTreeSet<u32> = a1.timestamps.iter().copied().collect();
    relations
        .iter()
        .filter(|r| {
            entities.contains(r.head_label.as_str())
                && entities.contains(r.tail_label.as_str())
                && timestamps.iter().any(|&t| r.start_frame <= t && t <= r.end_frame)
        })
        .map(|r| RelationTriple {
            head: r.head_label.clone(),
            relation: r.predicate.clone(),
            tail: r.tail_label.clone(),
            start_frame: r.start_frame,
            end_frame: r.end_frame,
        })
        .collect()
}

/// A3: annotated spatial relations whose endpoints are both A1 entities
/// and whose mapped span touches at least one A1 timestamp. Order follows
/// the re-indexed annotation's deterministic sort.
pub fn build_cotask3(a1: &CoTask1Answer, reindexed: &ReindexedAnnotation) -> Vec<RelationTriple> {
    filter_relations(a1, &reindexed.spatial_relations)
}

/// A4: as [`build_cotask3`] but over temporal relations. A2/A3 are taken
/// as arguments to assert the chain is consistent before the final link is
/// built.
pub fn build_cotask4(
    a1: &CoTask1Answer,
    a2: &[FrameObjects],
    a3: &[RelationTriple],
    reindexed: &ReindexedAnnotation,
) -> Result<Vec<RelationTriple>, CotasksError> {
    let a1_frames: BTreeSet<u32> = a1.timestamps.iter().copied().collect();
    let a2_frames: BTreeSet<u32> = a2.iter().map(|f| f.frame).collect();
    if a1_frames != a2_frames {
        return Err(CotasksError::Other(format!(
            "chain inconsistency: A2 frames {a2_frames:?} differ from A1 timestamps {a1_frames:?}"
        )));
    }
    let entities: BTreeSet<&str> = a1.entities.iter().map(String::as_str).collect();
    for r in a3 {
        if !entities.contains(r.head.as_str()) || !entities.contains(r.tail.as_str()) {
            return Err(CotasksError::Other(format!(
                "chain inconsistency: A3 relation {} -[{}]-> {} references entities outside A1",
                r.head, r.relation, r.tail
            )));
        }
    }
    Ok(filter_relations(a1, &reindexed.temporal_relations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{BBox, EntityRef, QType, Source, StarGrounding};
    use crate::gateway::{EndpointError, MockEndpoint};
    use std::sync::atomic::{AtomicU32, Ordering};
    use std::sync::Arc;

    fn record(question: &str) -> QARecord {
        QARecord {
            qid: "v1_0".into(),
            video_id: "v1".into(),
            question: question.into(),
            answer: "a handbag".into(),
            qtype: QType::DO,
            source: Source::Nextqa,
            mc_options: None,
            star: None,
        }
    }

    /// 16-slot timeline; adult everywhere, handbag at odd timestamps,
    /// fruits pair at 4..=6; one spatial + two temporal relations.
    fn fixture() -> ReindexedAnnotation {
        let mut boxes: BTreeMap<u32, BTreeMap<u32, BBox>> = BTreeMap::new();
        for t in 1..=16u32 {
            boxes.entry(t).or_default().insert(0, BBox::new(0, 0, 100, 200));
            if t % 2 == 1 {
                boxes.entry(t).or_default().insert(3, BBox::new(150, 50, 200, 90));
            }
            if (4..=6).contains(&t) {
                boxes.entry(t).or_default().insert(4, BBox::new(10, 10, 20, 20));
                boxes.entry(t).or_default().insert(5, BBox::new(30, 10, 40, 20));
            }
        }
        ReindexedAnnotation {
            video_id: "v1".into(),
            len: 16,
            catalog: vec![
                EntityRef::new(0, "adult"),
                EntityRef::new(3, "handbag"),
                EntityRef::new(4, "fruits"),
                EntityRef::new(5, "fruits"),
            ],
            boxes,
            spatial_relations: vec![MappedRelation {
                head_label: "0_adult".into(),
                predicate: "beside".into(),
                tail_label: "3_handbag".into(),
                start_frame: 1,
                end_frame: 9,
            }],
            temporal_relations: vec![
                MappedRelation {
                    head_label: "0_adult".into(),
                    predicate: "carry".into(),
                    tail_label: "3_handbag".into(),
                    start_frame: 1,
                    end_frame: 15,
                },
                MappedRelation {
                    head_label: "0_adult".into(),
                    predicate: "watch".into(),
                    tail_label: "4_fruits".into(),
                    start_frame: 4,
                    end_frame: 6,
                },
            ],
        }
    }

    #[test]
    fn reformulate_keeps_open_ended_and_resolves_mc() {
        let open = record("what is carried?");
        assert_eq!(reformulate_mc(&open).unwrap(), open);

        let mut mc = record("what is carried?");
        mc.mc_options = Some(vec!["a handbag".into(), "a phone".into()]);
        let out = reformulate_mc(&mc).unwrap();
        assert_eq!(out.answer, "a handbag");
        assert!(out.mc_options.is_none());

        let mut bad = mc.clone();
        bad.answer = "a suitcase".into();
        assert!(reformulate_mc(&bad).is_err());
    }

    #[test]
    fn lexical_grounding_matches_words_and_cooccurrence() {
        let re = fixture();
        let a1 = build_cotask1_lexical(
            &record("what else does the adult carry aside from the handbag?"),
            &re,
            &LexicalOptions::default(),
            16,
        )
        .unwrap();
        assert_eq!(a1.entities, vec!["0_adult", "3_handbag"]);
        // Both visible together only at odd timestamps.
        assert_eq!(a1.timestamps, vec![1, 3, 5, 7, 9, 11, 13, 15]);
    }

    #[test]
    fn lexical_grounding_shares_categories_and_relaxes() {
        let re = fixture();
        // Both fruits entities match the one category word.
        let a1 = build_cotask1_lexical(
            &record("why point to the fruits?"),
            &re,
            &LexicalOptions::default(),
            16,
        )
        .unwrap();
        assert_eq!(a1.entities, vec!["4_fruits", "5_fruits"]);
        assert_eq!(a1.timestamps, vec![4, 5, 6]);

        // adult + fruits never co-occur in *all*-mode at handbag-free even
        // frames... they do co-occur (adult is everywhere), so force the
        // relax path with a category visible nowhere together: handbag
        // (odd frames) + fruits (4..6) overlap only at t=5.
        let a1 = build_cotask1_lexical(
            &record("is the handbag near the fruits?"),
            &re,
            &LexicalOptions::default(),
            16,
        )
        .unwrap();
        assert_eq!(a1.timestamps, vec![5]);
    }

    #[test]
    fn lexical_grounding_relaxes_to_any_when_never_together() {
        let mut re = fixture();
        // Remove the only co-occurrence of handbag (odd) and fruits (4..6).
        re.boxes.get_mut(&5).unwrap().remove(&3);
        let a1 = build_cotask1_lexical(
            &record("is the handbag near the fruits?"),
            &re,
            &LexicalOptions::default(),
            16,
        )
        .unwrap();
        // Union of visibility: odd handbag frames (minus 5) plus 4..6.
        assert_eq!(a1.timestamps, vec![1, 3, 4, 5, 6, 7, 9, 11, 13, 15]);
    }

    #[test]
    fn lexical_grounding_supports_synonyms_and_word_boundaries() {
        let re = fixture();
        // "handbags" must not match "handbag" by substring.
        assert!(build_cotask1_lexical(
            &record("where are the handbagss placed?"),
            &re,
            &LexicalOptions::default(),
            16
        )
        .is_err());

        let options = LexicalOptions {
            synonyms: BTreeMap::from([("adult".to_string(), vec!["man".to_string()])]),
        };
        let a1 =
            build_cotask1_lexical(&record("what does the man hold?"), &re, &options, 16).unwrap();
        assert_eq!(a1.entities, vec!["0_adult"]);
        assert_eq!(a1.timestamps.len(), 16);
    }

    #[test]
    fn star_grounding_maps_keyframes_through_sampling() {
        let map = SampleMap::uniform(128, 64); // orig_of[i] = 2i
        let re = fixture();
        let mut rec = record("which object was taken?");
        rec.star = Some(StarGrounding {
            entity_tids: vec![0, 3],
            keyframe_fids: vec![4, 10, 11], // 11 is odd: never sampled
        });
        let a1 = build_cotask1_star(&rec, &re, &map, 16).unwrap();
        assert_eq!(a1.entities, vec!["0_adult", "3_handbag"]);
        assert_eq!(a1.timestamps, vec![3, 6]); // slots showing frames 4, 10

        rec.star = Some(StarGrounding { entity_tids: vec![0], keyframe_fids: vec![11] });
        assert!(build_cotask1_star(&rec, &re, &map, 16).is_err());

        rec.star = Some(StarGrounding { entity_tids: vec![], keyframe_fids: vec![4] });
        assert!(build_cotask1_star(&rec, &re, &map, 16).is_err());
    }

    #[test]
    fn star_grounding_caps_forty_keyframes_to_sixteen() {
        let map = SampleMap::uniform(64, 64);
        let mut re = fixture();
        re.len = 64;
        let mut rec = record("q");
        rec.star = Some(StarGrounding {
            entity_tids: vec![0],
            keyframe_fids: (0..40).collect(), // timestamps 1..=40
        });
        let a1 = build_cotask1_star(&rec, &re, &map, 16).unwrap();
        let expected: Vec<u32> =
            vec![0, 2, 5, 7, 10, 12, 15, 17, 20, 22, 25, 27, 30, 32, 35, 37].into_iter().map(|i| i + 1).collect();
        assert_eq!(a1.timestamps, expected);
    }

    #[test]
    fn cotask2_reads_boxes_off_a1_timestamps() {
        let re = fixture();
        let a1 = CoTask1Answer {
            entities: vec!["0_adult".into(), "3_handbag".into()],
            timestamps: vec![1, 2, 5],
        };
        let a2 = build_cotask2(&a1, &re);
        assert_eq!(a2.len(), 3);
        assert_eq!(a2[0].frame, 1);
        assert_eq!(a2[0].objects.len(), 2);
        assert_eq!(a2[0].objects[0].label, "0_adult");
        assert_eq!(a2[0].objects[0].bbox, BBox::new(0, 0, 100, 200));
        // Handbag is absent at even timestamps.
        assert_eq!(a2[1].frame, 2);
        assert_eq!(a2[1].objects.len(), 1);
        // Brute-force cross-check over all (entity, timestamp) pairs.
        for frame in &a2 {
            for entity in &a1.entities {
                let tid = re.catalog.iter().find(|e| &e.label() == entity).unwrap().tid;
                let expected = re.boxes.get(&frame.frame).and_then(|m| m.get(&tid));
                let got = frame.objects.iter().find(|o| &o.label == entity).map(|o| &o.bbox);
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn relation_subtasks_filter_by_entities_and_span() {
        let re = fixture();
        let a1 = CoTask1Answer {
            entities: vec!["0_adult".into(), "3_handbag".into()],
            timestamps: vec![1, 5, 9, 12, 15],
        };
        let a2 = build_cotask2(&a1, &re);
        let a3 = build_cotask3(&a1, &re);
        assert_eq!(a3.len(), 1);
        assert_eq!(a3[0].relation, "beside");
        assert_eq!((a3[0].start_frame, a3[0].end_frame), (1, 9));

        let a4 = build_cotask4(&a1, &a2, &a3, &re).unwrap();
        // "watch" touches 4_fruits, which is not an A1 entity.
        assert_eq!(a4.len(), 1);
        assert_eq!(a4[0].relation, "carry");

        // Span intersection: restrict A1 to timestamps beyond the spatial
        // relation's span.
        let narrow = CoTask1Answer { entities: a1.entities.clone(), timestamps: vec![12, 15] };
        assert!(build_cotask3(&narrow, &re).is_empty());
    }

    #[test]
    fn cotask4_rejects_inconsistent_chains() {
        let re = fixture();
        let a1 = CoTask1Answer { entities: vec!["0_adult".into()], timestamps: vec![1, 3] };
        let a2 = build_cotask2(&a1, &re);
        let foreign_a3 = vec![RelationTriple {
            head: "9_ghost".into(),
            relation: "beside".into(),
            tail: "0_adult".into(),
            start_frame: 1,
            end_frame: 2,
        }];
        assert!(build_cotask4(&a1, &a2, &foreign_a3, &re).is_err());

        let wrong_frames = vec![FrameObjects { frame: 7, objects: vec![] }];
        assert!(build_cotask4(&a1, &wrong_frames, &[], &re).is_err());
    }

    fn llm_grounding<'a>(
        gateway: &'a Gateway,
        options: &'a LexicalOptions,
    ) -> LlmGrounding<'a> {
        LlmGrounding {
            gateway,
            model_id: "mock-grounder",
            frames: vec![],
            parse_mode: ParseMode::Lenient,
            options,
            cap: 16,
        }
    }

    #[test]
    fn llm_grounding_accepts_valid_first_reply() {
        let endpoint = MockEndpoint::new(|req| {
            assert!(req.text_content().contains("### Your Turn:"));
            Ok(r#"{"entities": ['0_adult', '3_handbag'], "timestamps": [1, 5, 9]}"#.into())
        });
        let gateway = Gateway::new(Arc::new(endpoint));
        let options = LexicalOptions::default();
        let (a1, outcome) = build_cotask1_llm(
            &record("what else does the adult carry aside from the handbag?"),
            &fixture(),
            &llm_grounding(&gateway, &options),
        )
        .unwrap();
        assert_eq!(outcome, GroundingOutcome::Model);
        assert_eq!(a1.entities, vec!["0_adult", "3_handbag"]);
        assert_eq!(a1.timestamps, vec![1, 5, 9]);
    }

    #[test]
    fn llm_grounding_retries_with_correction_then_succeeds() {
        let calls = AtomicU32::new(0);
        let endpoint = MockEndpoint::new(move |req| {
            let n = calls.fetch_add(1, Ordering::SeqCst);
            if n == 0 {
                // 17 timestamps: violates the cap.
                Ok(format!(
                    r#"{{"entities": ["0_adult"], "timestamps": {:?}}}"#,
                    (1..=17).collect::<Vec<u32>>()
                ))
            } else {
                assert!(
                    req.text_content().contains("previous reply was invalid"),
                    "retry must carry the correction"
                );
                Ok(r#"{"entities": ["0_adult"], "timestamps": [1, 2]}"#.into())
            }
        });
        let gateway = Gateway::new(Arc::new(endpoint));
        let options = LexicalOptions::default();
        let (a1, outcome) =
            build_cotask1_llm(&record("the adult?"), &fixture(), &llm_grounding(&gateway, &options))
                .unwrap();
        assert_eq!(outcome, GroundingOutcome::Model);
        assert_eq!(a1.timestamps, vec![1, 2]);
    }

    #[test]
    fn llm_grounding_falls_back_to_lexical_after_two_invalid_replies() {
        let endpoint = MockEndpoint::new(|_| {
            Ok(r#"{"entities": ["9_ghost"], "timestamps": [1]}"#.into())
        });
        let gateway = Gateway::new(Arc::new(endpoint));
        let options = LexicalOptions::default();
        let (a1, outcome) = build_cotask1_llm(
            &record("where is the handbag?"),
            &fixture(),
            &llm_grounding(&gateway, &options),
        )
        .unwrap();
        assert_eq!(outcome, GroundingOutcome::LexicalFallback);
        assert_eq!(a1.entities, vec!["3_handbag"]);
    }

    #[test]
    fn llm_grounding_errors_on_unparseable_retry_and_endpoint_failure() {
        let endpoint = MockEndpoint::new(|_| Ok("I cannot answer that.".into()));
        let gateway = Gateway::new(Arc::new(endpoint));
        let options = LexicalOptions::default();
        let err = build_cotask1_llm(
            &record("where is the handbag?"),
            &fixture(),
            &llm_grounding(&gateway, &options),
        )
        .unwrap_err();
        assert!(err.to_string().contains("unparseable after retry"), "{err}");

        let endpoint = MockEndpoint::new(|_| Err(EndpointError::Fatal("boom".into())));
        let gateway = Gateway::new(Arc::new(endpoint));
        let err = build_cotask1_llm(
            &record("where is the handbag?"),
            &fixture(),
            &llm_grounding(&gateway, &options),
        )
        .unwrap_err();
        assert!(err.to_string().contains("call failed"), "{err}");
    }
}

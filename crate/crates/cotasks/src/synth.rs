//! Deterministic synthetic corpora shaped like the two supported sources.
//!
//! Generators emit *raw* per-video documents (trajectory JSON, question
//! CSV, situation-graph JSON) and then feed them through the real parsers,
//! so the in-memory corpus and the on-disk corpus can never disagree.
//!
//! Every trajectory covers at least 80% of the video as one contiguous
//! block, so the entities named by a question always co-occur somewhere
//! and offline lexical grounding succeeds for every generated question.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::annotation::{
    parse_nextqa_questions_str, parse_star_str, parse_vidor_str, ParseMode, ParsedVideo, QARecord,
    QType, Vocabulary,
};
use crate::error::CotasksError;

/// Object categories the generators draw from. Each appears verbatim (with
/// underscores shown as spaces) in question texts, so keyword grounding
/// can always find them.
pub const CATEGORIES: &[&str] = &[
    "adult", "child", "baby", "dog", "cat", "handbag", "laptop", "table", "chair", "cup", "ball",
    "toy", "bicycle", "car", "bird", "horse", "sofa", "bottle", "backpack", "guitar", "baby_seat",
];

const PHRASES: &[&str] = &[
    "sit down",
    "walk away",
    "pick it up",
    "play with it",
    "run in circles",
    "look around",
    "lean forward",
    "wave hands",
    "hold it tight",
    "move closer",
    "push it aside",
    "lie down",
];

fn display_name(category: &str) -> String {
    category.replace('_', " ")
}

/// The correct answer for a generated question is a stable function of its
/// text, never of RNG state: category pools are small, so two videos can
/// produce the same question, and mocks that key responses on question
/// text need duplicates to agree on one answer.
fn answer_phrase(question: &str) -> &'static str {
    let hex = crate::util::sha256_hex(question.as_bytes());
    let byte = usize::from_str_radix(&hex[..2], 16).expect("two hex chars");
    PHRASES[byte % PHRASES.len()]
}

fn question_text(qtype: QType, a: &str, b: &str) -> String {
    let a = display_name(a);
    let b = display_name(b);
    match qtype {
        QType::CW => format!("why did the {a} move towards the {b}?"),
        QType::CH => format!("how did the {a} get close to the {b}?"),
        QType::TP => format!("what did the {a} do before reaching the {b}?"),
        QType::TC => format!("what is the {a} doing while staying near the {b}?"),
        QType::TN => format!("what did the {a} do after leaving the {b}?"),
        QType::DC => format!("how many times did the {a} approach the {b}?"),
        QType::DL => format!("where is the {a} in relation to the {b}?"),
        QType::DO | QType::STAR => format!("what did the {a} use next to the {b}?"),
    }
}

struct EntityPlan {
    tid: u32,
    category: &'static str,
    /// Contiguous visible block `[start, end)`.
    start: u32,
    end: u32,
    base: (i64, i64, i64, i64),
}

impl EntityPlan {
    fn box_at(&self, frame: u32) -> (i64, i64, i64, i64) {
        // Small deterministic drift that stays inside the canvas.
        let (x1, y1, x2, y2) = self.base;
        let dx = i64::from(frame % 9) - 4;
        let dy = i64::from(frame % 7) - 3;
        let dx = dx.clamp(-x1, 640 - x2);
        let dy = dy.clamp(-y1, 360 - y2);
        (x1 + dx, y1 + dy, x2 + dx, y2 + dy)
    }
}

fn plan_entities(
    rng: &mut ChaCha8Rng,
    frame_count: u32,
    range: (usize, usize),
) -> Vec<EntityPlan> {
    let n_entities = rng.gen_range(range.0..=range.1);
    let categories: Vec<&'static str> =
        CATEGORIES.choose_multiple(rng, n_entities).copied().collect();
    categories
        .into_iter()
        .enumerate()
        .map(|(i, category)| {
            let slack = frame_count / 10;
            let start = rng.gen_range(0..=slack);
            let end = frame_count - rng.gen_range(0..=slack);
            let w = rng.gen_range(40..=200_i64);
            let h = rng.gen_range(40..=150_i64);
            let x1 = rng.gen_range(0..=(640 - w));
            let y1 = rng.gen_range(0..=(360 - h));
            EntityPlan {
                tid: i as u32,
                category,
                start,
                end,
                base: (x1, y1, x1 + w, y1 + h),
            }
        })
        .collect()
}

/// The frame range where every planned entity is visible. Non-empty by
/// construction (every block covers the middle of the video).
fn common_span(entities: &[EntityPlan]) -> (u32, u32) {
    let start = entities.iter().map(|e| e.start).max().unwrap_or(0);
    let end = entities.iter().map(|e| e.end).min().unwrap_or(0);
    (start, end)
}

fn predicate_pools(vocabulary: &Vocabulary) -> (Vec<String>, Vec<String>) {
    (
        vocabulary.spatial.iter().cloned().collect(),
        vocabulary.temporal.iter().cloned().collect(),
    )
}

/// Tuning knobs for the trajectory-corpus generator.
#[derive(Debug, Clone)]
pub struct NextqaSynthOptions {
    pub seed: u64,
    pub videos: usize,
    pub questions: usize,
    pub frame_count_range: (u32, u32),
    pub entities_range: (usize, usize),
    pub relations_range: (usize, usize),
}

impl Default for NextqaSynthOptions {
    fn default() -> Self {
        NextqaSynthOptions {
            seed: 7,
            videos: 10,
            questions: 25,
            frame_count_range: (40, 100),
            entities_range: (2, 5),
            relations_range: (2, 8),
        }
    }
}

/// A generated trajectory-style corpus: the raw documents and the same
/// data parsed back through the production readers.
pub struct SynthNextqa {
    /// video id -> annotation JSON document.
    pub annotation_docs: BTreeMap<String, String>,
    pub questions_csv: String,
    pub videos: Vec<ParsedVideo>,
    pub questions: Vec<QARecord>,
}

/// Generate a trajectory corpus plus a multiple-choice question CSV.
pub fn nextqa_corpus(options: &NextqaSynthOptions) -> Result<SynthNextqa, CotasksError> {
    let vocabulary = Vocabulary::builtin();
    let (spatial, temporal) = predicate_pools(&vocabulary);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut annotation_docs = BTreeMap::new();
    let mut videos = Vec::with_capacity(options.videos);
    let mut catalogs: Vec<(String, Vec<&'static str>)> = Vec::with_capacity(options.videos);

    for index in 0..options.videos {
        let video_id = format!("{}", 4_000_000_000_u64 + index as u64);
        let frame_count =
            rng.gen_range(options.frame_count_range.0..=options.frame_count_range.1);
        let entities = plan_entities(&mut rng, frame_count, options.entities_range);
        let (lo, hi) = common_span(&entities);

        let trajectories: Vec<Value> = (0..frame_count)
            .map(|frame| {
                let boxes: Vec<Value> = entities
                    .iter()
                    .filter(|e| (e.start..e.end).contains(&frame))
                    .map(|e| {
                        let (x1, y1, x2, y2) = e.box_at(frame);
                        json!({"tid": e.tid, "bbox": {"xmin": x1, "ymin": y1, "xmax": x2, "ymax": y2}})
                    })
                    .collect();
                Value::Array(boxes)
            })
            .collect();

        let mut relations = Vec::new();
        if entities.len() >= 2 {
            let n_relations = rng.gen_range(options.relations_range.0..=options.relations_range.1);
            for r in 0..n_relations {
                let pair: Vec<&EntityPlan> = entities.choose_multiple(&mut rng, 2).collect();
                let pool = if r % 2 == 0 { &spatial } else { &temporal };
                let predicate = pool.choose(&mut rng).expect("non-empty predicate pool");
                let min_len = (frame_count / 8).max(2).min(hi - lo);
                let begin = rng.gen_range(lo..=(hi - min_len));
                let end = rng.gen_range((begin + min_len)..=hi);
                relations.push(json!({
                    "subject_tid": pair[0].tid,
                    "object_tid": pair[1].tid,
                    "predicate": predicate,
                    "begin_fid": begin,
                    "end_fid": end,
                }));
            }
        }

        let doc = json!({
            "video_id": video_id,
            "frame_count": frame_count,
            "width": 640,
            "height": 360,
            "subject/objects": entities
                .iter()
                .map(|e| json!({"tid": e.tid, "category": e.category}))
                .collect::<Vec<Value>>(),
            "trajectories": trajectories,
            "relation_instances": relations,
        });
        let text = serde_json::to_string(&doc).expect("synthetic doc serializes");
        videos.push(parse_vidor_str(&text, &vocabulary, ParseMode::Lenient)?);
        catalogs.push((video_id.clone(), entities.iter().map(|e| e.category).collect()));
        annotation_docs.insert(video_id, text);
    }

    // Multiple-choice questions, cycling through all eight type codes.
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "video", "frame_count", "width", "height", "question", "answer", "qid", "type", "a0",
        "a1", "a2", "a3", "a4",
    ])
    .expect("csv header");
    let mut per_video_counter: BTreeMap<&str, u32> = BTreeMap::new();
    for i in 0..options.questions {
        let (video_id, catalog) = &catalogs[i % catalogs.len()];
        let qtype = QType::NEXTQA_CODES[i % QType::NEXTQA_CODES.len()];
        let picked: Vec<&&str> = catalog.choose_multiple(&mut rng, 2).collect();
        let (a, b) = (*picked[0], *picked.get(1).copied().unwrap_or(picked[0]));
        let question = question_text(qtype, a, b);

        let answer = answer_phrase(&question);
        let distractors: Vec<&str> = PHRASES.iter().copied().filter(|p| *p != answer).collect();
        let mut options_pool: Vec<&str> =
            distractors.choose_multiple(&mut rng, 4).copied().collect();
        options_pool.push(answer);
        options_pool.shuffle(&mut rng);
        let answer_idx = options_pool.iter().position(|p| *p == answer).expect("answer in pool");

        let counter = per_video_counter.entry(video_id.as_str()).or_insert(0);
        let qid = counter.to_string();
        *counter += 1;

        csv.write_record([
            video_id.as_str(),
            "",
            "",
            "",
            &question,
            &answer_idx.to_string(),
            &qid,
            qtype.as_str(),
            options_pool[0],
            options_pool[1],
            options_pool[2],
            options_pool[3],
            options_pool[4],
        ])
        .expect("csv row");
    }
    let questions_csv =
        String::from_utf8(csv.into_inner().expect("csv flush")).expect("csv is utf-8");
    let questions = parse_nextqa_questions_str(&questions_csv, "synthetic questions")?;

    Ok(SynthNextqa { annotation_docs, questions_csv, videos, questions })
}

/// Write a generated corpus to disk in the layout the pipeline commands
/// read: `<dir>/videos/<video_id>.json` plus `<dir>/questions.csv`.
/// Returns (annotations dir, questions CSV path).
pub fn write_nextqa_corpus(
    corpus: &SynthNextqa,
    dir: &Path,
) -> Result<(PathBuf, PathBuf), CotasksError> {
    let videos_dir = dir.join("videos");
    std::fs::create_dir_all(&videos_dir)
        .map_err(|e| CotasksError::io(format!("create {}", videos_dir.display()), e))?;
    for (video_id, doc) in &corpus.annotation_docs {
        let path = videos_dir.join(format!("{video_id}.json"));
        std::fs::write(&path, doc)
            .map_err(|e| CotasksError::io(format!("write {}", path.display()), e))?;
    }
    let csv_path = dir.join("questions.csv");
    std::fs::write(&csv_path, &corpus.questions_csv)
        .map_err(|e| CotasksError::io(format!("write {}", csv_path.display()), e))?;
    Ok((videos_dir, csv_path))
}

/// Tuning knobs for the situation-graph generator. Frame counts stay at or
/// below the default sampling width so every keyframe lands on a sampled
/// slot.
#[derive(Debug, Clone)]
pub struct StarSynthOptions {
    pub seed: u64,
    pub videos: usize,
    pub questions: usize,
    pub frame_count_range: (u32, u32),
    pub entities_range: (usize, usize),
    pub situations_range: (usize, usize),
}

impl Default for StarSynthOptions {
    fn default() -> Self {
        StarSynthOptions {
            seed: 11,
            videos: 6,
            questions: 18,
            frame_count_range: (24, 64),
            entities_range: (2, 5),
            situations_range: (6, 16),
        }
    }
}

/// A generated situation-graph corpus: raw documents plus the parsed
/// videos and question records.
pub struct SynthStar {
    pub docs: BTreeMap<String, String>,
    pub videos: Vec<ParsedVideo>,
    pub questions: Vec<QARecord>,
}

/// Generate a situation-graph corpus with embedded questions.
pub fn star_corpus(options: &StarSynthOptions) -> Result<SynthStar, CotasksError> {
    let vocabulary = Vocabulary::builtin();
    let (spatial, temporal) = predicate_pools(&vocabulary);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    // Distribute questions round-robin across videos up front.
    let slots = options.videos.max(1);
    let mut questions_per_video = vec![0usize; slots];
    for i in 0..options.questions {
        questions_per_video[i % slots] += 1;
    }

    let mut docs = BTreeMap::new();
    let mut videos = Vec::with_capacity(options.videos);
    let mut questions = Vec::new();
    let mut global_qid = 0usize;

    for index in 0..options.videos {
        let video_id = format!("SYN{index:05}");
        let frame_count =
            rng.gen_range(options.frame_count_range.0..=options.frame_count_range.1);
        let entities = plan_entities(&mut rng, frame_count, options.entities_range);

        let n_situations = rng
            .gen_range(options.situations_range.0..=options.situations_range.1)
            .min(frame_count as usize);
        let mut keyframes: Vec<u32> =
            rand::seq::index::sample(&mut rng, frame_count as usize, n_situations)
                .into_iter()
                .map(|i| i as u32)
                .collect();
        keyframes.sort_unstable();

        let situations: Vec<Value> = keyframes
            .iter()
            .map(|&kf| {
                let present: Vec<&EntityPlan> =
                    entities.iter().filter(|e| (e.start..e.end).contains(&kf)).collect();
                let boxes: Vec<Value> = present
                    .iter()
                    .map(|e| {
                        let (x1, y1, x2, y2) = e.box_at(kf);
                        json!({"tid": e.tid, "bbox": [x1, y1, x2, y2]})
                    })
                    .collect();
                let mut relationships = Vec::new();
                for pair in present.windows(2) {
                    if rng.gen_bool(0.8) {
                        let pool = if rng.gen_bool(0.5) { &spatial } else { &temporal };
                        relationships.push(json!({
                            "head_tid": pair[0].tid,
                            "predicate": pool.choose(&mut rng).expect("non-empty pool"),
                            "tail_tid": pair[1].tid,
                        }));
                    }
                }
                json!({"keyframe_id": kf, "entities": boxes, "relationships": relationships})
            })
            .collect();

        let n_questions = questions_per_video[index];
        let question_docs: Vec<Value> = (0..n_questions)
            .map(|_| {
                let qtype_seed = global_qid;
                global_qid += 1;
                let picked: Vec<&EntityPlan> = entities.choose_multiple(&mut rng, 2).collect();
                let question = question_text(
                    QType::NEXTQA_CODES[qtype_seed % 8],
                    picked[0].category,
                    picked.get(1).map_or(picked[0].category, |e| e.category),
                );
                let answer = answer_phrase(&question);
                let distractors: Vec<&str> =
                    PHRASES.iter().copied().filter(|p| *p != answer).collect();
                let mut choices: Vec<&str> =
                    distractors.choose_multiple(&mut rng, 3).copied().collect();
                choices.push(answer);
                choices.shuffle(&mut rng);
                let answer_idx =
                    choices.iter().position(|p| *p == answer).expect("answer in pool");
                let n_grounded = rng.gen_range(1..=keyframes.len().min(8));
                let mut grounded: Vec<u32> = keyframes
                    .choose_multiple(&mut rng, n_grounded)
                    .copied()
                    .collect();
                grounded.sort_unstable();
                json!({
                    "question_id": format!("Interaction_T1_{qtype_seed:05}"),
                    "question": question,
                    "choices": choices,
                    "answer_idx": answer_idx,
                    "entity_tids": picked.iter().map(|e| e.tid).collect::<Vec<u32>>(),
                    "keyframe_ids": grounded,
                })
            })
            .collect();

        let doc = json!({
            "video_id": video_id,
            "frame_count": frame_count,
            "width": 480,
            "height": 360,
            "entities": entities
                .iter()
                .map(|e| json!({"tid": e.tid, "category": e.category}))
                .collect::<Vec<Value>>(),
            "situations": situations,
            "questions": question_docs,
        });
        let text = serde_json::to_string(&doc).expect("synthetic doc serializes");
        let parsed = parse_star_str(&text, &vocabulary, ParseMode::Lenient)?;
        videos.push(parsed.video);
        questions.extend(parsed.questions);
        docs.insert(video_id, text);
    }

    Ok(SynthStar { docs, videos, questions })
}

/// Write a situation-graph corpus to `<dir>/videos/<video_id>.json`.
pub fn write_star_corpus(corpus: &SynthStar, dir: &Path) -> Result<PathBuf, CotasksError> {
    let videos_dir = dir.join("videos");
    std::fs::create_dir_all(&videos_dir)
        .map_err(|e| CotasksError::io(format!("create {}", videos_dir.display()), e))?;
    for (video_id, doc) in &corpus.docs {
        let path = videos_dir.join(format!("{video_id}.json"));
        std::fs::write(&path, doc)
            .map_err(|e| CotasksError::io(format!("write {}", path.display()), e))?;
    }
    Ok(videos_dir)
}

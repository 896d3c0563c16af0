//! The pipeline commands as library functions: build the dataset, validate
//! and summarize it, run inference conditions, judge predictions, and
//! compare conditions. The CLI binary is a thin wrapper over these.
//!
//! Every command writes its artifacts under a run directory named after
//! the config digest, so a rerun with identical config and a warm response
//! cache reproduces the directory byte-for-byte (the manifest's
//! `created_at` field is the one sanctioned exception).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::annotation::{
    parse_nextqa_questions, parse_star_file, parse_vidor_file, read_ndjson, write_ndjson,
    ParseMode, ParsedVideo, QARecord, Vocabulary,
};
use crate::config::{EndpointConfig, GroundingMode, PipelineConfig, SourceKind};
use crate::cotask::{
    assemble, build_cotask1_lexical, build_cotask1_llm, build_cotask1_star, check_bundle, expand,
    reformulate_mc, BundleViolation, CoTaskBundle, GroundingOutcome, LexicalOptions, LlmGrounding,
    Provenance,
};
use crate::error::CotasksError;
use crate::eval::{
    aggregate, comparison, judge_predictions, render_markdown, run_condition, AggregateOptions,
    ComparisonTable, ConditionId, EvalRecord, Prediction, RunOptions, ScoreReport,
};
use crate::gateway::{
    echo_answers, exact_match_judge, ChatEndpoint, DiskCache, Gateway, HttpEndpoint,
};
use crate::timeline::{reindex, DropReport, ReindexedAnnotation, SampleMap};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const BUNDLES_FILE: &str = "bundles.ndjson";
pub const INSTANCES_FILE: &str = "instances.ndjson";
pub const DROPS_FILE: &str = "dropped_relations.ndjson";
pub const QUARANTINE_FILE: &str = "quarantine.ndjson";
pub const STATS_FILE: &str = "stats.json";
pub const PREDICTIONS_FILE: &str = "predictions.ndjson";
pub const RECORDS_FILE: &str = "eval_records.ndjson";
pub const SCORE_REPORT_FILE: &str = "score_report.json";

/// Provenance stamp written into every run directory. `created_at` (unix
/// seconds) is informational and excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub config_digest: String,
    pub created_at: u64,
    /// Command-specific details: sampling width, condition, model ids,
    /// referenced run directories.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl Manifest {
    fn new(command: &str, config_digest: &str, params: BTreeMap<String, String>) -> Self {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: command.into(),
            config_digest: config_digest.into(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            params,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CotasksError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CotasksError::Parse { what: path.display().to_string(), detail: e.to_string() })?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CotasksError::io(format!("write {}", path.display()), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CotasksError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CotasksError::io(format!("read {}", path.display()), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CotasksError::Parse { what: path.display().to_string(), detail: e.to_string() })
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CotasksError> {
    write_json(&dir.join(MANIFEST_FILE), manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CotasksError> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(CotasksError::SchemaVersion {
            what: dir.join(MANIFEST_FILE).display().to_string(),
            expected: MANIFEST_SCHEMA_VERSION,
            found: manifest.schema_version,
        });
    }
    Ok(manifest)
}

fn ensure_dir(dir: &Path) -> Result<(), CotasksError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CotasksError::io(format!("create {}", dir.display()), e))
}

/// Name of the build run directory for this config.
pub fn build_dir_name(config: &PipelineConfig) -> String {
    format!("build-{}", &config.build_digest()[..8])
}

/// Name of the inference run directory for this config and condition.
pub fn infer_dir_name(config: &PipelineConfig, condition: ConditionId) -> String {
    format!("infer-{condition}-{}", &config.infer_digest()[..8])
}

/// A question that failed construction and was set aside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantinedQuestion {
    pub qid: String,
    pub reason: String,
}

/// Dataset-level counts, printed in the same shape as the dataset summary
/// tables: source questions, filtered-out questions, and the four-fold
/// instance expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub videos: usize,
    pub questions: usize,
    pub filtered: usize,
    pub bundles: usize,
    pub instances: usize,
    pub per_task: [usize; 4],
    pub dropped_relations: usize,
}

/// Plain-text rendering of the build counts.
pub fn render_stats_table(stats: &BuildStats) -> String {
    let mut out = String::new();
    out.push_str("| Metric | Count |\n|---|---|\n");
    out.push_str(&format!("| Videos | {} |\n", stats.videos));
    out.push_str(&format!("| Source questions (Q0) | {} |\n", stats.questions));
    out.push_str(&format!("| Filtered | {} |\n", stats.filtered));
    out.push_str(&format!("| Question bundles | {} |\n", stats.bundles));
    for (i, count) in stats.per_task.iter().enumerate() {
        out.push_str(&format!("| CoTask {} instances | {} |\n", i + 1, count));
    }
    out.push_str(&format!("| Total instances | {} |\n", stats.instances));
    out.push_str(&format!("| Relations dropped by sampling | {} |\n", stats.dropped_relations));
    out
}

fn list_annotation_files(dir: &Path) -> Result<Vec<PathBuf>, CotasksError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CotasksError::io(format!("read {}", dir.display()), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Parse every annotation document (and, for CSV-question sources, the
/// question file). Returns videos keyed by id plus all questions.
fn load_corpus(
    config: &PipelineConfig,
    vocabulary: &Vocabulary,
) -> Result<(BTreeMap<String, ParsedVideo>, Vec<QARecord>), CotasksError> {
    let mut videos = BTreeMap::new();
    let mut questions = Vec::new();
    for path in list_annotation_files(&config.annotations_dir)? {
        match config.source {
            SourceKind::Nextqa => {
                let video = parse_vidor_file(&path, vocabulary, config.parse_mode)?;
                videos.insert(video.annotation.video_id.clone(), video);
            }
            SourceKind::Star => {
                let parsed = parse_star_file(&path, vocabulary, config.parse_mode)?;
                questions.extend(parsed.questions);
                videos.insert(parsed.video.annotation.video_id.clone(), parsed.video);
            }
        }
    }
    if config.source == SourceKind::Nextqa {
        let csv = config
            .questions_csv
            .as_ref()
            .ok_or_else(|| CotasksError::Config("questions_csv is required".into()))?;
        questions = parse_nextqa_questions(csv)?;
    }
    Ok((videos, questions))
}

/// Paths of the sampled frames of one video that exist on disk, following
/// the `<frames_root>/<video_id>/<timestamp>.jpg` convention. Timestamps
/// without a file are skipped (requests degrade to fewer or no images).
fn existing_frames(frames_root: Option<&Path>, video_id: &str, timestamps: &[u32]) -> Vec<PathBuf> {
    let Some(root) = frames_root else {
        return Vec::new();
    };
    timestamps
        .iter()
        .map(|t| root.join(video_id).join(format!("{t}.jpg")))
        .filter(|p| p.is_file())
        .collect()
}

/// Instantiate one configured endpoint. Mock endpoints answer from the
/// dataset (`answers`: Q0 -> ground-truth A0). Credentials are resolved
/// here, before any network traffic.
fn build_endpoint(
    role: &str,
    endpoint: &EndpointConfig,
    answers: &BTreeMap<String, String>,
) -> Result<Arc<dyn ChatEndpoint>, CotasksError> {
    match endpoint {
        EndpointConfig::OpenaiCompat { base_url, api_key_env, .. } => {
            let api_key = match api_key_env {
                Some(var) => Some(std::env::var(var).map_err(|_| {
                    CotasksError::Config(format!("{role}: credential variable {var} is not set"))
                })?),
                None => None,
            };
            Ok(Arc::new(HttpEndpoint::new(base_url.clone(), api_key)))
        }
        EndpointConfig::MockEcho { .. } => Ok(Arc::new(echo_answers(answers.clone()))),
        EndpointConfig::MockJudgeExact { .. } => Ok(Arc::new(exact_match_judge())),
    }
}

fn build_gateway(
    config: &PipelineConfig,
    endpoint: Arc<dyn ChatEndpoint>,
) -> Result<Gateway, CotasksError> {
    let mut gateway = Gateway::new(endpoint);
    if let Some(dir) = &config.cache_dir {
        gateway = gateway.with_cache(DiskCache::open(dir)?);
    }
    Ok(gateway)
}

/// What the dataset-construction command produced.
#[derive(Debug)]
pub struct BuildOutput {
    pub run_dir: PathBuf,
    pub stats: BuildStats,
    pub stats_table: String,
}

/// Build the dataset: parse, sample, re-index, construct the four-answer
/// chain per question, and expand into flat instances. Artifacts land in
/// `<output_dir>/build-<digest8>/`.
pub fn cmd_build(config: &PipelineConfig) -> Result<BuildOutput, CotasksError> {
    config.check()?;
    let vocabulary = match &config.vocabulary {
        Some(path) => Vocabulary::from_path(path)?,
        None => Vocabulary::builtin(),
    };
    let (videos, questions) = load_corpus(config, &vocabulary)?;

    let mut timelines: BTreeMap<String, (SampleMap, ReindexedAnnotation)> = BTreeMap::new();
    let mut drops: Vec<DropReport> = Vec::new();
    for (video_id, video) in &videos {
        let map = SampleMap::uniform(video.annotation.frame_count, config.k);
        let (reindexed, drop_report) = reindex(&video.annotation, &map);
        if !drop_report.dropped.is_empty() {
            drops.push(drop_report);
        }
        timelines.insert(video_id.clone(), (map, reindexed));
    }

    let lexical = LexicalOptions { synonyms: config.synonyms.clone() };
    let grounder = match (config.grounding, &config.grounder) {
        (GroundingMode::Llm, Some(endpoint)) => {
            let gateway = build_gateway(config, build_endpoint("grounder", endpoint, &BTreeMap::new())?)?;
            Some((gateway, endpoint.model().to_string()))
        }
        _ => None,
    };

    let mut bundles = Vec::new();
    let mut quarantine: Vec<QuarantinedQuestion> = Vec::new();
    for record in &questions {
        let result = build_one(record, &timelines, config, &lexical, grounder.as_ref());
        match result {
            Ok(bundle) => bundles.push(bundle),
            Err(e) if config.parse_mode == ParseMode::Lenient => {
                log::warn!("{}: set aside: {e}", record.qid);
                quarantine.push(QuarantinedQuestion { qid: record.qid.clone(), reason: e.to_string() });
            }
            Err(e) => return Err(e),
        }
    }

    let (instances, expansion) = expand(&bundles);
    let stats = BuildStats {
        videos: videos.len(),
        questions: questions.len(),
        filtered: quarantine.len(),
        bundles: expansion.bundles,
        instances: expansion.instances,
        per_task: expansion.per_task,
        dropped_relations: drops.iter().map(|d| d.dropped.len()).sum(),
    };

    let run_dir = config.output_dir.join(build_dir_name(config));
    ensure_dir(&run_dir)?;
    write_ndjson(&run_dir.join(BUNDLES_FILE), &bundles)?;
    write_ndjson(&run_dir.join(INSTANCES_FILE), &instances)?;
    write_ndjson(&run_dir.join(DROPS_FILE), &drops)?;
    write_ndjson(&run_dir.join(QUARANTINE_FILE), &quarantine)?;
    write_json(&run_dir.join(STATS_FILE), &stats)?;
    let params = BTreeMap::from([
        ("k".to_string(), config.k.to_string()),
        ("timestamp_cap".to_string(), config.timestamp_cap.to_string()),
        ("source".to_string(), format!("{:?}", config.source).to_lowercase()),
    ]);
    write_manifest(&run_dir, &Manifest::new("build", &config.digest(), params))?;

    Ok(BuildOutput { run_dir, stats, stats_table: render_stats_table(&stats) })
}

fn build_one(
    record: &QARecord,
    timelines: &BTreeMap<String, (SampleMap, ReindexedAnnotation)>,
    config: &PipelineConfig,
    lexical: &LexicalOptions,
    grounder: Option<&(Gateway, String)>,
) -> Result<CoTaskBundle, CotasksError> {
    let (map, reindexed) = timelines.get(&record.video_id).ok_or_else(|| {
        CotasksError::Construction {
            qid: record.qid.clone(),
            detail: format!("video {} has no annotation document", record.video_id),
        }
    })?;
    let record = reformulate_mc(record)?;
    let cap = config.timestamp_cap;
    let (a1, provenance) = match config.grounding {
        GroundingMode::StarDirect => {
            (build_cotask1_star(&record, reindexed, map, cap)?, Provenance::StarDirect)
        }
        GroundingMode::Lexical => {
            (build_cotask1_lexical(&record, reindexed, lexical, cap)?, Provenance::LexicalFallback)
        }
        GroundingMode::Llm => {
            let (gateway, model_id) = grounder
                .ok_or_else(|| CotasksError::Config("llm grounding needs a grounder".into()))?;
            let timestamps: Vec<u32> = (1..=reindexed.len).collect();
            let grounding = LlmGrounding {
                gateway,
                model_id,
                frames: existing_frames(
                    config.frames_root.as_deref(),
                    &record.video_id,
                    &timestamps,
                ),
                parse_mode: config.parse_mode,
                options: lexical,
                cap,
            };
            let (a1, outcome) = build_cotask1_llm(&record, reindexed, &grounding)?;
            let provenance = match outcome {
                GroundingOutcome::Model => Provenance::LlmGrounded,
                GroundingOutcome::LexicalFallback => Provenance::LexicalFallback,
            };
            (a1, provenance)
        }
    };
    assemble(&record, reindexed, a1, provenance)
}

/// Outcome of bundle validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub checked: usize,
    pub violations: Vec<BundleViolation>,
}

impl ValidateOutput {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validate the bundles of a build run directory (or a bare bundle file)
/// against the persisted schema. Bounds come from the run manifest when
/// available, else the defaults.
pub fn cmd_validate(path: &Path) -> Result<ValidateOutput, CotasksError> {
    let (bundles_path, k, cap) = if path.is_dir() {
        let manifest = read_manifest(path)?;
        let k = manifest.params.get("k").and_then(|v| v.parse().ok()).unwrap_or(64);
        let cap = manifest
            .params
            .get("timestamp_cap")
            .and_then(|v| v.parse().ok())
            .unwrap_or(crate::cotask::DEFAULT_TIMESTAMP_CAP);
        (path.join(BUNDLES_FILE), k, cap)
    } else {
        (path.to_path_buf(), 64, crate::cotask::DEFAULT_TIMESTAMP_CAP)
    };
    let bundles: Vec<CoTaskBundle> = read_ndjson(&bundles_path)?;
    let mut violations = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for bundle in &bundles {
        if !seen.insert(bundle.qid.clone()) {
            violations.push(BundleViolation {
                qid: bundle.qid.clone(),
                code: "DUPLICATE_QID".into(),
                detail: "question id appears more than once".into(),
            });
        }
        violations.extend(check_bundle(bundle, k, cap));
    }
    Ok(ValidateOutput { checked: bundles.len(), violations })
}

/// Recompute and render the dataset counts of a build run directory.
pub fn cmd_stats(run_dir: &Path) -> Result<(BuildStats, String), CotasksError> {
    let stats: BuildStats = read_json(&run_dir.join(STATS_FILE))?;
    Ok((stats, render_stats_table(&stats)))
}

/// What one inference run produced.
#[derive(Debug)]
pub struct InferOutput {
    pub run_dir: PathBuf,
    pub predictions: usize,
    pub endpoint_errors: usize,
}

fn load_bundles(build_dir: &Path) -> Result<Vec<CoTaskBundle>, CotasksError> {
    read_ndjson(&build_dir.join(BUNDLES_FILE))
}

fn answers_of(bundles: &[CoTaskBundle]) -> BTreeMap<String, String> {
    bundles.iter().map(|b| (b.q0.clone(), b.a0.clone())).collect()
}

/// Run one condition over the built dataset. Reads
/// `<output_dir>/build-<digest8>/`, writes
/// `<output_dir>/infer-<condition>-<digest8>/`.
pub fn cmd_infer(config: &PipelineConfig, condition: ConditionId) -> Result<InferOutput, CotasksError> {
    config.check()?;
    let build_dir = config.output_dir.join(build_dir_name(config));
    if !build_dir.is_dir() {
        return Err(CotasksError::Config(format!(
            "no build run at {}; run the build command first",
            build_dir.display()
        )));
    }
    let bundles = load_bundles(&build_dir)?;
    let subject = config
        .subject
        .as_ref()
        .ok_or_else(|| CotasksError::Config("inference needs a [subject] endpoint".into()))?;
    let endpoint = build_endpoint("subject", subject, &answers_of(&bundles))?;
    let gateway = build_gateway(config, endpoint)?;

    let options = RunOptions {
        model_id: subject.model().to_string(),
        max_in_flight: config.concurrency,
        parse_mode: config.parse_mode,
    };
    let frames_root = config.frames_root.clone();
    let predictions = run_condition(&bundles, condition, &gateway, &options, |bundle| {
        existing_frames(frames_root.as_deref(), &bundle.video_id, &bundle.a1.timestamps)
    })?;
    let endpoint_errors = predictions.iter().filter(|p| p.error.is_some()).count();

    let run_dir = config.output_dir.join(infer_dir_name(config, condition));
    ensure_dir(&run_dir)?;
    write_ndjson(&run_dir.join(PREDICTIONS_FILE), &predictions)?;
    let params = BTreeMap::from([
        ("condition".to_string(), condition.to_string()),
        ("build_dir".to_string(), build_dir_name(config)),
        ("subject_model".to_string(), subject.model().to_string()),
    ]);
    write_manifest(&run_dir, &Manifest::new("infer", &config.digest(), params))?;

    Ok(InferOutput { run_dir, predictions: predictions.len(), endpoint_errors })
}

/// What judging produced. `report` is `None` when there was nothing to
/// judge.
#[derive(Debug)]
pub struct JudgeOutput {
    pub run_dir: PathBuf,
    pub records: usize,
    pub report: Option<ScoreReport>,
}

/// Judge the predictions of one inference run directory in place, writing
/// the per-record ratings and the aggregated score report next to them.
pub fn cmd_judge(config: &PipelineConfig, run_dir: &Path) -> Result<JudgeOutput, CotasksError> {
    config.check()?;
    let manifest = read_manifest(run_dir)?;
    let build_name = manifest.params.get("build_dir").ok_or_else(|| {
        CotasksError::Config(format!("{} is not an inference run", run_dir.display()))
    })?;
    let bundles = load_bundles(&config.output_dir.join(build_name))?;
    let predictions: Vec<Prediction> = read_ndjson(&run_dir.join(PREDICTIONS_FILE))?;
    if predictions.is_empty() {
        log::warn!("{}: no predictions to judge", run_dir.display());
        write_ndjson::<EvalRecord>(&run_dir.join(RECORDS_FILE), &[])?;
        return Ok(JudgeOutput { run_dir: run_dir.to_path_buf(), records: 0, report: None });
    }

    let judge = config
        .judge
        .as_ref()
        .ok_or_else(|| CotasksError::Config("judging needs a [judge] endpoint".into()))?;
    let endpoint = build_endpoint("judge", judge, &answers_of(&bundles))?;
    let gateway = build_gateway(config, endpoint)?;

    let by_qid: BTreeMap<String, CoTaskBundle> =
        bundles.into_iter().map(|b| (b.qid.clone(), b)).collect();
    let records = judge_predictions(&by_qid, &predictions, &gateway, judge.model())?;
    let report = aggregate(&records, &AggregateOptions { star_threshold: config.star_threshold })?;

    write_ndjson(&run_dir.join(RECORDS_FILE), &records)?;
    write_json(&run_dir.join(SCORE_REPORT_FILE), &report)?;
    Ok(JudgeOutput { run_dir: run_dir.to_path_buf(), records: records.len(), report: Some(report) })
}

/// What the comparison command produced.
#[derive(Debug)]
pub struct ReportOutput {
    pub run_dir: PathBuf,
    pub table: ComparisonTable,
    pub markdown: String,
}

/// Compare the score reports of several judged runs. Writes
/// `report.json` and `report.md` under `<output_dir>/report-<digest8>/`.
pub fn cmd_report(config: &PipelineConfig, run_dirs: &[PathBuf]) -> Result<ReportOutput, CotasksError> {
    let mut reports = Vec::new();
    for dir in run_dirs {
        reports.push(read_json::<ScoreReport>(&dir.join(SCORE_REPORT_FILE))?);
    }
    let table = comparison(&reports)?;
    let markdown = render_markdown(&table);

    let mut key = String::new();
    for report in &reports {
        key.push_str(&format!("{}:{}\n", report.condition, report.qid_digest));
    }
    let run_dir = config
        .output_dir
        .join(format!("report-{}", &crate::util::sha256_hex(key.as_bytes())[..8]));
    ensure_dir(&run_dir)?;
    write_json(&run_dir.join("report.json"), &table)?;
    std::fs::write(run_dir.join("report.md"), &markdown)
        .map_err(|e| CotasksError::io("write report.md", e))?;

    Ok(ReportOutput { run_dir, table, markdown })
}

//! Pipeline configuration: a TOML file with `COTASKS_*` environment
//! overrides, hashed into a digest that stamps every output manifest and
//! names run directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotation::ParseMode;
use crate::error::CotasksError;
use crate::util::sha256_hex;

/// Which corpus layout to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Per-video trajectory/relation JSON plus a question CSV.
    Nextqa,
    /// Per-video situation-graph JSON with embedded questions.
    Star,
}

/// How the first subtask answer (entity/frame grounding) is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingMode {
    /// Read from the situation graph (situation-graph sources only).
    StarDirect,
    /// Ask the grounding model, with a lexical fallback.
    Llm,
    /// Offline keyword matching only.
    Lexical,
}

/// One model endpoint. The mock kinds run in-process and need no network
/// or credentials; they exist for tests, smoke runs, and offline replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointConfig {
    /// Chat-completions HTTP endpoint.
    OpenaiCompat {
        base_url: String,
        model: String,
        /// Environment variable holding the bearer token. Checked before
        /// any network call.
        #[serde(default)]
        api_key_env: Option<String>,
    },
    /// Replies with the ground-truth answer of whatever question the
    /// prompt asks (wired from the dataset at run time).
    MockEcho { model: String },
    /// Grades 5 on exact answer/response match, 1 otherwise.
    MockJudgeExact { model: String },
}

impl EndpointConfig {
    pub fn model(&self) -> &str {
        match self {
            EndpointConfig::OpenaiCompat { model, .. }
            | EndpointConfig::MockEcho { model }
            | EndpointConfig::MockJudgeExact { model } => model,
        }
    }
}

fn default_k() -> u32 {
    64
}

fn default_timestamp_cap() -> usize {
    crate::cotask::DEFAULT_TIMESTAMP_CAP
}

fn default_concurrency() -> usize {
    4
}

fn default_star_threshold() -> u8 {
    4
}

fn default_parse_mode() -> ParseMode {
    ParseMode::Lenient
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Everything the pipeline commands need, resolvable from one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub source: SourceKind,
    /// Directory of per-video annotation JSON files.
    pub annotations_dir: PathBuf,
    /// Question CSV; required for [`SourceKind::Nextqa`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub questions_csv: Option<PathBuf>,
    /// Replacement predicate vocabulary; the built-in one applies when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<PathBuf>,
    /// Number of uniformly sampled frames per video.
    #[serde(default = "default_k")]
    pub k: u32,
    /// Upper bound on grounded timestamps per question.
    #[serde(default = "default_timestamp_cap")]
    pub timestamp_cap: usize,
    pub grounding: GroundingMode,
    #[serde(default = "default_parse_mode")]
    pub parse_mode: ParseMode,
    /// Run directories are created under here.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Response cache location; caching is off when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Directory of extracted frames, `<video_id>/<timestamp>.jpg`.
    /// Requests go out text-only when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_root: Option<PathBuf>,
    /// Worker-pool bound for model calls.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Minimum rating for a situation-graph answer to count as correct.
    #[serde(default = "default_star_threshold")]
    pub star_threshold: u8,
    /// Extra surface forms per category for lexical grounding.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub synonyms: BTreeMap<String, Vec<String>>,
    /// Grounding model; required when `grounding = "llm"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounder: Option<EndpointConfig>,
    /// Model under evaluation; required by the inference command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<EndpointConfig>,
    /// Rating model; required by the judging command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<EndpointConfig>,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CotasksError> {
        let config: PipelineConfig = toml::from_str(text)
            .map_err(|e| CotasksError::Parse { what: "config".into(), detail: e.to_string() })?;
        config.check()?;
        Ok(config)
    }

    /// Read a TOML file, apply `COTASKS_*` environment overrides, and
    /// validate.
    pub fn load(path: &Path) -> Result<Self, CotasksError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CotasksError::io(format!("read config {}", path.display()), e))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CotasksError::Parse { what: "config".into(), detail: e.to_string() })?;
        config.apply_env(|key| std::env::var(key).ok())?;
        config.check()?;
        Ok(config)
    }

    /// Apply overrides from an environment lookup. Supported keys:
    /// `COTASKS_K`, `COTASKS_TIMESTAMP_CAP`, `COTASKS_CONCURRENCY`,
    /// `COTASKS_STAR_THRESHOLD`, `COTASKS_PARSE_MODE`, `COTASKS_OUTPUT_DIR`,
    /// `COTASKS_CACHE_DIR`, `COTASKS_FRAMES_ROOT`.
    pub fn apply_env<F>(&mut self, get: F) -> Result<(), CotasksError>
    where
        F: Fn(&str) -> Option<String>,
    {
        fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CotasksError> {
            value
                .parse()
                .map_err(|_| CotasksError::Config(format!("{key}: cannot parse {value:?}")))
        }

        if let Some(v) = get("COTASKS_K") {
            self.k = parsed("COTASKS_K", &v)?;
        }
        if let Some(v) = get("COTASKS_TIMESTAMP_CAP") {
            self.timestamp_cap = parsed("COTASKS_TIMESTAMP_CAP", &v)?;
        }
        if let Some(v) = get("COTASKS_CONCURRENCY") {
            self.concurrency = parsed("COTASKS_CONCURRENCY", &v)?;
        }
        if let Some(v) = get("COTASKS_STAR_THRESHOLD") {
            self.star_threshold = parsed("COTASKS_STAR_THRESHOLD", &v)?;
        }
        if let Some(v) = get("COTASKS_PARSE_MODE") {
            self.parse_mode = match v.as_str() {
                "strict" => ParseMode::Strict,
                "lenient" => ParseMode::Lenient,
                other => {
                    return Err(CotasksError::Config(format!(
                        "COTASKS_PARSE_MODE: expected strict or lenient, got {other:?}"
                    )))
                }
            };
        }
        if let Some(v) = get("COTASKS_OUTPUT_DIR") {
            self.output_dir = PathBuf::from(v);
        }
        if let Some(v) = get("COTASKS_CACHE_DIR") {
            self.cache_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = get("COTASKS_FRAMES_ROOT") {
            self.frames_root = Some(PathBuf::from(v));
        }
        Ok(())
    }

    /// Internal consistency; path existence is checked by the commands
    /// that use each path.
    pub fn check(&self) -> Result<(), CotasksError> {
        if self.k == 0 {
            return Err(CotasksError::Config("k must be at least 1".into()));
        }
        if self.timestamp_cap == 0 {
            return Err(CotasksError::Config("timestamp_cap must be at least 1".into()));
        }
        if self.concurrency == 0 {
            return Err(CotasksError::Config("concurrency must be at least 1".into()));
        }
        if !(1..=5).contains(&self.star_threshold) {
            return Err(CotasksError::Config("star_threshold must be within 1..=5".into()));
        }
        match (self.source, self.grounding) {
            (SourceKind::Nextqa, GroundingMode::StarDirect) => {
                return Err(CotasksError::Config(
                    "star_direct grounding needs a situation-graph source".into(),
                ));
            }
            (SourceKind::Star, GroundingMode::Llm | GroundingMode::Lexical) => {
                return Err(CotasksError::Config(
                    "situation-graph sources carry their own grounding; use star_direct".into(),
                ));
            }
            _ => {}
        }
        if self.source == SourceKind::Nextqa && self.questions_csv.is_none() {
            return Err(CotasksError::Config("questions_csv is required for this source".into()));
        }
        if self.grounding == GroundingMode::Llm && self.grounder.is_none() {
            return Err(CotasksError::Config("llm grounding needs a [grounder] endpoint".into()));
        }
        Ok(())
    }

    /// Stable digest of the full configuration, stamped into run manifests.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        sha256_hex(canonical.as_bytes())
    }

    /// Digest of the fields that determine build artifacts; its first 8 hex
    /// chars name the build run directory. Changing an evaluation endpoint
    /// or the output directory does not orphan an existing build.
    pub fn build_digest(&self) -> String {
        let relevant = serde_json::json!({
            "source": self.source,
            "annotations_dir": self.annotations_dir,
            "questions_csv": self.questions_csv,
            "vocabulary": self.vocabulary,
            "k": self.k,
            "timestamp_cap": self.timestamp_cap,
            "grounding": self.grounding,
            "parse_mode": self.parse_mode,
            "synonyms": self.synonyms,
            "grounder": self.grounder,
            "frames_root": self.frames_root,
        });
        sha256_hex(relevant.to_string().as_bytes())
    }

    /// Digest of the fields that determine inference artifacts for one
    /// condition: the build inputs plus the subject endpoint.
    pub fn infer_digest(&self) -> String {
        let relevant = serde_json::json!({
            "build": self.build_digest(),
            "subject": self.subject,
        });
        sha256_hex(relevant.to_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        source = "nextqa"
        annotations_dir = "data/videos"
        questions_csv = "data/questions.csv"
        grounding = "lexical"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let config = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(config.k, 64);
        assert_eq!(config.timestamp_cap, 16);
        assert_eq!(config.concurrency, 4);
        assert_eq!(config.star_threshold, 4);
        assert_eq!(config.parse_mode, ParseMode::Lenient);
        assert_eq!(config.output_dir, PathBuf::from("runs"));
    }

    #[test]
    fn env_overrides_win() {
        let mut config = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        let env = |key: &str| match key {
            "COTASKS_K" => Some("32".to_string()),
            "COTASKS_PARSE_MODE" => Some("strict".to_string()),
            "COTASKS_CACHE_DIR" => Some("/tmp/cache".to_string()),
            _ => None,
        };
        config.apply_env(env).unwrap();
        assert_eq!(config.k, 32);
        assert_eq!(config.parse_mode, ParseMode::Strict);
        assert_eq!(config.cache_dir, Some(PathBuf::from("/tmp/cache")));

        let bad = |key: &str| (key == "COTASKS_K").then(|| "not a number".to_string());
        assert!(config.apply_env(bad).is_err());
    }

    #[test]
    fn source_grounding_pairings_are_enforced() {
        let star_direct_on_nextqa = MINIMAL.replace("\"lexical\"", "\"star_direct\"");
        assert!(PipelineConfig::from_toml_str(&star_direct_on_nextqa).is_err());

        let star = r#"
            source = "star"
            annotations_dir = "data/star"
            grounding = "star_direct"
        "#;
        assert!(PipelineConfig::from_toml_str(star).is_ok());

        let lexical_on_star = star.replace("\"star_direct\"", "\"lexical\"");
        assert!(PipelineConfig::from_toml_str(&lexical_on_star).is_err());
    }

    #[test]
    fn llm_grounding_requires_a_grounder() {
        let llm = MINIMAL.replace("\"lexical\"", "\"llm\"");
        assert!(PipelineConfig::from_toml_str(&llm).is_err());

        let with_grounder = format!(
            "{llm}\n[grounder]\nkind = \"openai_compat\"\nbase_url = \"http://localhost:8000/v1\"\nmodel = \"grounder-72b\"\n"
        );
        let config = PipelineConfig::from_toml_str(&with_grounder).unwrap();
        assert_eq!(config.grounder.as_ref().unwrap().model(), "grounder-72b");
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        let b = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(a.digest(), b.digest());

        let mut c = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        c.k = 32;
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let extra = format!("{MINIMAL}\ntypo_field = true\n");
        assert!(PipelineConfig::from_toml_str(&extra).is_err());
    }
}

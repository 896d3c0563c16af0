//! Content-addressed response cache on disk.
//!
//! One JSON file per request digest, sharded by the first two hex chars.
//! Writes go to a temp file in the same directory and are renamed into
//! place, so concurrent writers and crashes can't leave half a record.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::CotasksError;

const CACHE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    schema_version: u32,
    digest: String,
    text: String,
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    /// Open (creating if needed) a cache rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>) -> Result<DiskCache, CotasksError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CotasksError::io(dir.display().to_string(), e))?;
        Ok(DiskCache { dir })
    }

    pub fn path_of(&self, digest: &str) -> PathBuf {
        let shard = digest.get(..2).unwrap_or("xx");
        self.dir.join(shard).join(format!("{digest}.json"))
    }

    pub fn get(&self, digest: &str) -> Result<Option<String>, CotasksError> {
        let path = self.path_of(digest);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CotasksError::io(path.display().to_string(), e)),
        };
        let record: CacheRecord = serde_json::from_str(&text).map_err(|e| CotasksError::Parse {
            what: path.display().to_string(),
            detail: e.to_string(),
        })?;
        if record.schema_version != CACHE_SCHEMA_VERSION || record.digest != digest {
            // A foreign or corrupt record is treated as a miss rather than
            // poisoning the run.
            log::warn!("ignoring stale cache record at {}", path.display());
            return Ok(None);
        }
        Ok(Some(record.text))
    }

    pub fn put(&self, digest: &str, response_text: &str) -> Result<(), CotasksError> {
        let path = self.path_of(digest);
        let parent = path.parent().expect("cache paths have parents");
        std::fs::create_dir_all(parent)
            .map_err(|e| CotasksError::io(parent.display().to_string(), e))?;
        let record = CacheRecord {
            schema_version: CACHE_SCHEMA_VERSION,
            digest: digest.to_string(),
            text: response_text.to_string(),
        };
        let payload = serde_json::to_string(&record).expect("cache record serializes");
        let tmp = parent.join(format!(
            ".{digest}.tmp-{}-{}",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&tmp, payload).map_err(|e| CotasksError::io(tmp.display().to_string(), e))?;
        std::fs::rename(&tmp, &path).map_err(|e| CotasksError::io(path.display().to_string(), e))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Number of records currently stored (walks the shard directories).
    pub fn len(&self) -> Result<usize, CotasksError> {
        let mut n = 0;
        for shard in std::fs::read_dir(&self.dir)
            .map_err(|e| CotasksError::io(self.dir.display().to_string(), e))?
        {
            let shard = shard.map_err(|e| CotasksError::io(self.dir.display().to_string(), e))?;
            if !shard.path().is_dir() {
                continue;
            }
            for entry in std::fs::read_dir(shard.path())
                .map_err(|e| CotasksError::io(shard.path().display().to_string(), e))?
            {
                let entry = entry.map_err(|e| CotasksError::io(shard.path().display().to_string(), e))?;
                if entry.path().extension().is_some_and(|e| e == "json") {
                    n += 1;
                }
            }
        }
        Ok(n)
    }

    pub fn is_empty(&self) -> Result<bool, CotasksError> {
        Ok(self.len()? == 0)
    }
}

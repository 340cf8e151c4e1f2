//! JSON file formats: code specs and the polarization statistics cache.

use std::fs;
use std::path::{Path, PathBuf};

use ookpolar_core::PolarizationStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use ookpolar_core::CodeSpec;

pub const STATS_FORMAT_VERSION: u32 = 1;

pub fn read_spec(path: &Path) -> Result<CodeSpec> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: CodeSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: {} at {}", path.display(), e.inner(), e.path())))?;
    spec.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

pub fn write_spec(path: &Path, spec: &CodeSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)?;
    fs::write(path, text + "\n").map_err(Error::io(path))
}

/// Everything that determines a [`PolarizationStats`] value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsKey {
    #[serde(rename = "N")]
    pub len: usize,
    pub p: f64,
    pub design_snr_db: f64,
    pub seed: u64,
    pub source_trials: u64,
    pub channel_trials: u64,
}

impl StatsKey {
    /// Hex SHA-256 over the exact bit patterns of the fields.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(STATS_FORMAT_VERSION.to_le_bytes());
        h.update((self.len as u64).to_le_bytes());
        h.update(self.p.to_bits().to_le_bytes());
        h.update(self.design_snr_db.to_bits().to_le_bytes());
        h.update(self.seed.to_le_bytes());
        h.update(self.source_trials.to_le_bytes());
        h.update(self.channel_trials.to_le_bytes());
        hex(&h.finalize())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StatsFile {
    format_version: u32,
    key: StatsKey,
    stats: PolarizationStats,
}

/// Directory of cached statistics, one JSON file per key.
#[derive(Debug, Clone)]
pub struct StatsCache {
    dir: PathBuf,
}

impl StatsCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: &StatsKey) -> PathBuf {
        self.dir.join(format!("stats-{}.json", &key.digest()[..24]))
    }

    /// Cached stats for `key`; `None` if absent, stale or unreadable.
    pub fn load(&self, key: &StatsKey) -> Option<PolarizationStats> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        let file: StatsFile = serde_json::from_str(&text).ok()?;
        (file.format_version == STATS_FORMAT_VERSION && file.key == *key).then_some(file.stats)
    }

    pub fn store(&self, key: &StatsKey, stats: &PolarizationStats) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(Error::io(&self.dir))?;
        let file = StatsFile { format_version: STATS_FORMAT_VERSION, key: *key, stats: stats.clone() };
        let path = self.path_for(key);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string(&file)?).map_err(Error::io(&tmp))?;
        fs::rename(&tmp, &path).map_err(Error::io(&path))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

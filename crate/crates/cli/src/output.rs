//! Run directories: atomic file writes, the config copy and `run.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Fresh scratch directory beside `target`.
pub fn staging_dir(target: &Path) -> Result<PathBuf> {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    Ok(staging)
}

/// Moves every file under `staging` to the same relative path under
/// `target`, one rename per file, then removes `staging`.
pub fn publish(staging: &Path, target: &Path) -> Result<()> {
    fn walk(from: &Path, to: &Path) -> Result<()> {
        fs::create_dir_all(to).with_context(|| format!("creating {}", to.display()))?;
        let mut entries: Vec<_> = fs::read_dir(from)?.collect::<std::io::Result<_>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let dest = to.join(entry.file_name());
            if entry.file_type()?.is_dir() {
                walk(&entry.path(), &dest)?;
            } else {
                fs::rename(entry.path(), &dest).with_context(|| format!("moving into {}", dest.display()))?;
            }
        }
        Ok(())
    }
    walk(staging, target)?;
    fs::remove_dir_all(staging)?;
    Ok(())
}

#[derive(Serialize)]
struct RunInfo<'a> {
    seed: u64,
    config_hash: &'a str,
    durations: &'a BTreeMap<String, f64>,
    tool_version: &'a str,
}

/// Output directory of a `rank` or `evaluate` run.
pub struct RunDir {
    dir: PathBuf,
    seed: u64,
    config_hash: String,
    durations: BTreeMap<String, f64>,
}

impl RunDir {
    /// Creates the directory and writes `config.json`.
    pub fn create(config: &RunConfig) -> Result<RunDir> {
        let dir = config.output_dir.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = config.to_json();
        let config_hash = hex::encode(Sha256::digest(text.as_bytes()));
        let run = RunDir {
            dir,
            seed: config.params.seed,
            config_hash,
            durations: BTreeMap::new(),
        };
        run.write("config.json", text.as_bytes())?;
        Ok(run)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(name), bytes)
    }

    pub fn record_duration(&mut self, stage: &str, seconds: f64) {
        self.durations.insert(stage.to_string(), seconds);
    }

    /// Writes `run.json`; the last file of a successful run.
    pub fn finish(self) -> Result<()> {
        let info = RunInfo {
            seed: self.seed,
            config_hash: &self.config_hash,
            durations: &self.durations,
            tool_version: env!("CARGO_PKG_VERSION"),
        };
        let mut text = serde_json::to_string_pretty(&info)?;
        text.push('\n');
        self.write("run.json", text.as_bytes())
    }
}

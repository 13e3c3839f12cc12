//! Run manifests. Each command writes `manifest.json` in its output directory
//! before doing any work and rewrites it with a final status on the way out,
//! also when it fails or panics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::error::{CliError, CliResult};

pub const FILE: &str = "manifest.json";
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Completed,
    Failed,
    Diverged,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub run_id: String,
    pub command: String,
    pub status: Status,
    pub message: Option<String>,
    /// File holding the configuration snapshot, relative to the manifest.
    pub config_snapshot: Option<String>,
    /// SHA-256 of the snapshot file's bytes.
    pub config_hash: Option<String>,
    pub source_revision: String,
    pub dataset_fingerprint: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub started: String,
    pub finished: Option<String>,
    /// Files written by this command, relative to the manifest.
    pub artifacts: Vec<String>,
}

fn now() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).unwrap_or_default()
}

/// Crate version plus the git commit when the binary runs inside a checkout.
pub fn source_revision() -> String {
    let version = env!("CARGO_PKG_VERSION");
    let git = std::process::Command::new("git")
        .args(["rev-parse", "--short", "HEAD"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string());
    match git {
        Some(rev) => format!("guided-gan {version} ({rev})"),
        None => format!("guided-gan {version}"),
    }
}

impl RunManifest {
    pub fn new(run_id: String, command: &str) -> Self {
        Self {
            schema: SCHEMA,
            run_id,
            command: command.into(),
            status: Status::Running,
            message: None,
            config_snapshot: None,
            config_hash: None,
            source_revision: source_revision(),
            dataset_fingerprint: None,
            seeds: BTreeMap::new(),
            started: now(),
            finished: None,
            artifacts: Vec::new(),
        }
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let p = dir.join(FILE);
        let bytes = std::fs::read(&p).map_err(|e| CliError::io(&p, e))?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
    }
}

/// Owns a run directory's manifest and keeps it on disk in sync. Dropping an
/// unfinished guard records the run as aborted.
pub struct ManifestGuard {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl ManifestGuard {
    pub fn start(dir: &Path, manifest: RunManifest) -> CliResult<Self> {
        let g = Self { dir: dir.to_path_buf(), manifest };
        g.write()?;
        Ok(g)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&self) -> CliResult<()> {
        let path = self.dir.join(FILE);
        let tmp = self.dir.join(".manifest.json.tmp");
        let json = serde_json::to_vec_pretty(&self.manifest).expect("serializable");
        std::fs::write(&tmp, json).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))
    }

    /// Writes `bytes` to `name` inside the run directory and records it.
    pub fn write_artifact(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.record(name)?;
        Ok(path)
    }

    /// Records a file the caller wrote itself.
    pub fn record(&mut self, name: &str) -> CliResult<()> {
        if !self.manifest.artifacts.iter().any(|a| a == name) {
            self.manifest.artifacts.push(name.to_string());
        }
        self.write()
    }

    pub fn update(&mut self, f: impl FnOnce(&mut RunManifest)) -> CliResult<()> {
        f(&mut self.manifest);
        self.write()
    }

    pub fn finish(mut self, status: Status, message: Option<String>) -> CliResult<()> {
        self.manifest.status = status;
        self.manifest.message = message;
        self.manifest.finished = Some(now());
        self.write()
    }
}

impl Drop for ManifestGuard {
    fn drop(&mut self) {
        if self.manifest.status == Status::Running {
            self.manifest.status = Status::Aborted;
            self.manifest.finished = Some(now());
            let _ = self.write();
        }
    }
}

/// Prepares an empty output directory. An existing non-empty directory is
/// only replaced with `force`.
pub fn prepare_out(dir: &Path, force: bool) -> CliResult<()> {
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?.next().is_some();
        if non_empty {
            if !force {
                return Err(CliError::Usage(format!(
                    "{} already exists and is not empty; pass --force to overwrite",
                    dir.display()
                )));
            }
            std::fs::remove_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

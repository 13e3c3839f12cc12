//! Run configuration: one flat TOML table covering the framework, the data
//! source and run bookkeeping. Command-line flags are applied on top.
//!
//! ```toml
//! framework = "guided_gan"
//! dataset = "synth_har"
//! epochs = 100
//! lambda_x = 0.01
//! checkpoint_every = 10
//! ```
//!
//! Unknown keys are rejected. Every key and its default is listed by
//! `guided-gan train --print-config`.

use std::path::Path;

use guided_gan_core::evalkit::ProbeConfig;
use guided_gan_core::frameworks::FrameworkConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::data::DataSpec;
use crate::error::{CliError, CliResult};

pub const DATA_KEYS: [&str; 11] = [
    "dataset",
    "data_dir",
    "train_limit",
    "test_limit",
    "target_hz",
    "synth_classes",
    "synth_channels",
    "synth_window",
    "synth_per_class",
    "synth_noise",
    "data_seed",
];

/// Bookkeeping that does not affect the learned weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Checkpoint every this many epochs; the final epoch is always saved.
    pub checkpoint_every: usize,
    /// Probe the frozen encoder every this many epochs during training (0 = never).
    pub probe_every: usize,
    pub probe_epochs: usize,
    pub probe_seed: u64,
}

pub const RUN_KEYS: [&str; 4] = ["checkpoint_every", "probe_every", "probe_epochs", "probe_seed"];

impl Default for RunOptions {
    fn default() -> Self {
        let p = ProbeConfig::default();
        Self { checkpoint_every: 10, probe_every: 0, probe_epochs: p.epochs, probe_seed: p.seed }
    }
}

impl RunOptions {
    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig { epochs: self.probe_epochs, seed: self.probe_seed, ..ProbeConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: FrameworkConfig,
    pub data: DataSpec,
    pub run: RunOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { model: FrameworkConfig::default(), data: DataSpec::default(), run: RunOptions::default() }
    }
}

fn model_keys() -> Vec<String> {
    Table::try_from(FrameworkConfig::default()).expect("serializable").keys().cloned().collect()
}

fn part<T: serde::de::DeserializeOwned>(table: Table, what: &str) -> CliResult<T> {
    Value::Table(table).try_into().map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

impl RunConfig {
    /// Splits a flat table into its three parts.
    pub fn from_table(table: Table) -> CliResult<Self> {
        let model = model_keys();
        let (mut m, mut d, mut r) = (Table::new(), Table::new(), Table::new());
        for (k, v) in table {
            if model.contains(&k) {
                m.insert(k, v);
            } else if DATA_KEYS.contains(&k.as_str()) {
                d.insert(k, v);
            } else if RUN_KEYS.contains(&k.as_str()) {
                r.insert(k, v);
            } else {
                return Err(CliError::Usage(format!("unknown configuration key `{k}`")));
            }
        }
        Ok(Self { model: part(m, "model settings")?, data: part(d, "data settings")?, run: part(r, "run settings")? })
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        for part in [
            Table::try_from(&self.model).expect("serializable"),
            Table::try_from(&self.data).expect("serializable"),
            Table::try_from(&self.run).expect("serializable"),
        ] {
            t.extend(part);
        }
        t
    }

    pub fn read_table(path: &Path) -> CliResult<Table> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        text.parse::<Table>().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Canonical TOML text; the config hash is taken over these bytes.
    pub fn snapshot(&self) -> String {
        toml::to_string(&self.to_table()).expect("serializable")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.snapshot().as_bytes()))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.model.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.model.epochs == 0 {
            return Err(CliError::Usage("epochs must be at least 1".into()));
        }
        if self.run.checkpoint_every == 0 {
            return Err(CliError::Usage("checkpoint_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses `key=value`; the value is read as a TOML literal, falling back to a bare string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let k = k.trim().to_string();
    let v = v.trim();
    let value = format!("x = {v}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k, value))
}

//! Dataset sources: synthetic HAR, Sequential MNIST from IDX files and UCI HAR
//! raw inertial signals, plus the on-disk cache format.

pub mod cache;
pub mod idx;
pub mod ucihar;

use std::path::PathBuf;

use guided_gan_core::datapipe::{synth_har, DatasetSplit, SynthHarConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Environment variable consulted for the MNIST directory when `data_dir` is unset.
pub const MNIST_DIR_ENV: &str = "GUIDED_GAN_MNIST_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    SynthHar,
    Mnist,
    Ucihar,
}

impl std::str::FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "synth_har" => Ok(Self::SynthHar),
            "mnist" => Ok(Self::Mnist),
            "ucihar" | "uci_har" => Ok(Self::Ucihar),
            _ => Err(format!("unknown dataset {s:?} (expected synth_har, mnist or ucihar)")),
        }
    }
}

/// Everything needed to rebuild a run's data split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub dataset: DatasetKind,
    pub data_dir: Option<PathBuf>,
    /// Keep only the first `n` training windows.
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    /// UCI HAR only: decimate from 50 Hz to this rate.
    pub target_hz: Option<f64>,
    pub synth_classes: usize,
    pub synth_channels: usize,
    pub synth_window: usize,
    pub synth_per_class: usize,
    pub synth_noise: f64,
    pub data_seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        let s = SynthHarConfig::default();
        Self {
            dataset: DatasetKind::SynthHar,
            data_dir: None,
            train_limit: None,
            test_limit: None,
            target_hz: None,
            synth_classes: s.classes,
            synth_channels: s.channels,
            synth_window: s.window,
            synth_per_class: s.per_class,
            synth_noise: s.noise,
            data_seed: 0,
        }
    }
}

impl DataSpec {
    /// The directory to read from, checked to exist. Synthetic data needs none.
    pub fn resolve_dir(&self) -> CliResult<Option<PathBuf>> {
        let dir = match self.dataset {
            DatasetKind::SynthHar => return Ok(None),
            DatasetKind::Mnist => self.data_dir.clone().or_else(|| std::env::var_os(MNIST_DIR_ENV).map(PathBuf::from)),
            DatasetKind::Ucihar => self.data_dir.clone(),
        };
        let dir = dir.ok_or_else(|| {
            CliError::Usage(match self.dataset {
                DatasetKind::Mnist => format!("mnist needs --data-dir or {MNIST_DIR_ENV}"),
                _ => "ucihar needs --data-dir pointing at the extracted \"UCI HAR Dataset\" folder".into(),
            })
        })?;
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("dataset directory {} is not readable", dir.display())));
        }
        Ok(Some(dir))
    }

    pub fn load(&self) -> CliResult<DatasetSplit> {
        let dir = self.resolve_dir()?;
        let mut split = match self.dataset {
            DatasetKind::SynthHar => synth_har(&SynthHarConfig {
                classes: self.synth_classes,
                channels: self.synth_channels,
                window: self.synth_window,
                per_class: self.synth_per_class,
                seed: self.data_seed,
                noise: self.synth_noise,
                ..SynthHarConfig::default()
            })
            .map_err(|e| CliError::Usage(format!("synthetic dataset: {e}")))?,
            DatasetKind::Mnist => idx::load_mnist(&dir.expect("resolved"))?,
            DatasetKind::Ucihar => ucihar::load(&dir.expect("resolved"), self.target_hz)?,
        };
        if let Some(n) = self.train_limit {
            split.train.truncate(n);
        }
        if let Some(n) = self.test_limit {
            split.test.truncate(n);
        }
        if split.train.is_empty() || split.test.is_empty() {
            return Err(CliError::Usage("dataset has an empty train or test split".into()));
        }
        split.validate()?;
        Ok(split)
    }
}

/// SHA-256 of both splits in cache encoding.
pub fn fingerprint(split: &DatasetSplit) -> String {
    let mut h = Sha256::new();
    h.update(cache::encode(split, cache::Part::Train));
    h.update(cache::encode(split, cache::Part::Test));
    hex::encode(h.finalize())
}

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::features::FeatureSet;
use super::probe::{linear_probe, ProbeConfig};
use crate::datapipe::stratified_indices;
use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedTree};

pub const DEFAULT_FRACTIONS: [f64; 7] = [0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    pub runs: usize,
    /// Seeds the per-run subsets; the probe keeps its own seed in every run.
    pub subset_seed: u64,
    pub probe: ProbeConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { fractions: DEFAULT_FRACTIONS.to_vec(), runs: 5, subset_seed: 0, probe: ProbeConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    /// Test accuracy per run; `None` where the subset left the probe degenerate.
    pub accuracies: Vec<Option<f64>>,
    pub mean: f64,
    /// Sample standard deviation over the non-degenerate runs.
    pub std: f64,
}

/// Probe accuracy versus the share of labelled training windows used.
pub fn label_fraction_sweep(
    train: &FeatureSet,
    test: &FeatureSet,
    classes: usize,
    cfg: &SweepConfig,
) -> Result<Vec<SweepPoint>> {
    if cfg.runs == 0 {
        return Err(Error::Argument("a sweep needs at least one run".into()));
    }
    let seeds = SeedTree::new(cfg.subset_seed);
    let mut points = Vec::with_capacity(cfg.fractions.len());
    for (fi, &fraction) in cfg.fractions.iter().enumerate() {
        let mut accuracies = Vec::with_capacity(cfg.runs);
        for run in 0..cfg.runs {
            let mut rng = seeds.fork_indexed(Purpose::Subsample, (fi * cfg.runs + run) as u32);
            let idx = stratified_indices(&train.labels, classes, fraction, &mut rng)?;
            match linear_probe(&train.subset(&idx), test, classes, &cfg.probe) {
                Ok(r) => accuracies.push(Some(r.accuracy)),
                Err(Error::DegenerateProbe) => {
                    log::warn!("fraction {fraction}, run {run}: subset is degenerate");
                    accuracies.push(None)
                }
                Err(e) => return Err(e),
            }
        }
        let ok: Vec<f64> = accuracies.iter().flatten().copied().collect();
        let (mean, std) = mean_std(&ok);
        points.push(SweepPoint { fraction, accuracies, mean, std });
    }
    Ok(points)
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, num_traits::Float::sqrt(var))
}

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{DatasetSplit, NormalizerStats, SequenceWindow, SourceSpan};
use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedTree};

/// Deterministic stand-in for a wearable activity dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthHarConfig {
    pub classes: usize,
    pub channels: usize,
    pub window: usize,
    pub per_class: usize,
    pub seed: u64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    /// Each window's phase is shifted uniformly within `±phase_jitter` radians.
    pub phase_jitter: f64,
}

impl Default for SynthHarConfig {
    fn default() -> Self {
        Self { classes: 6, channels: 9, window: 30, per_class: 200, seed: 0, noise: 0.1, phase_jitter: PI }
    }
}

struct ChannelTemplate {
    offset: f64,
    amplitude: f64,
    cycles: f64,
    phase: f64,
    harmonic: f64,
    harmonic_phase: f64,
}

impl ChannelTemplate {
    fn eval(&self, t: usize, window: usize, shift: f64) -> f64 {
        let x = 2.0 * PI * self.cycles * t as f64 / window as f64;
        self.offset
            + self.amplitude * (x + self.phase + shift).sin()
            + self.harmonic * (2.0 * x + self.harmonic_phase + 2.0 * shift).sin()
    }
}

/// Generates class-specific sinusoid mixtures plus Gaussian noise.
///
/// Window `i` (generation order) belongs to class `i % classes`; the first 70%
/// of each class go to train, the rest to test. Windows are normalized with
/// statistics fitted on the training part.
pub fn synth_har(config: &SynthHarConfig) -> Result<DatasetSplit> {
    if config.classes < 2 {
        return Err(Error::Argument("synthetic HAR needs at least two classes".into()));
    }
    if config.channels == 0 || config.window < 2 || config.per_class < 2 {
        return Err(Error::Argument("channels ≥ 1, window ≥ 2 and per_class ≥ 2 required".into()));
    }
    if !(config.noise >= 0.0 && config.phase_jitter >= 0.0) {
        return Err(Error::Argument("noise and phase jitter must be non-negative".into()));
    }
    let seeds = SeedTree::new(config.seed);
    let mut rng = seeds.fork(Purpose::Synth);
    let templates: Vec<Vec<ChannelTemplate>> = (0..config.classes)
        .map(|_| {
            (0..config.channels)
                .map(|_| ChannelTemplate {
                    offset: rng.random_range(-0.8..0.8),
                    amplitude: rng.random_range(0.3..1.0),
                    cycles: rng.random_range(1..=4) as f64,
                    phase: rng.random_range(0.0..2.0 * PI),
                    harmonic: rng.random_range(0.0..0.3),
                    harmonic_phase: rng.random_range(0.0..2.0 * PI),
                })
                .collect()
        })
        .collect();

    let n_train = (config.per_class * 7) / 10;
    let total = config.per_class * config.classes;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for i in 0..total {
        let class = i % config.classes;
        let shift = if config.phase_jitter > 0.0 {
            rng.random_range(-config.phase_jitter..=config.phase_jitter)
        } else {
            0.0
        };
        let mut values = Vec::with_capacity(config.channels * config.window);
        for tpl in &templates[class] {
            for t in 0..config.window {
                let noise: f64 = if config.noise > 0.0 {
                    config.noise * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                } else {
                    0.0
                };
                values.push(tpl.eval(t, config.window, shift) + noise);
            }
        }
        let w = SequenceWindow {
            channels: config.channels,
            steps: config.window,
            values,
            label: Some(class),
            span: SourceSpan { stream: i as u32, start: 0 },
        };
        if i / config.classes < n_train {
            train.push(w);
        } else {
            test.push(w);
        }
    }
    let stats = NormalizerStats::fit_windows(&train, "train")?;
    let train = train.iter().map(|w| stats.apply(w)).collect::<Result<Vec<_>>>()?;
    let test = test.iter().map(|w| stats.apply(w)).collect::<Result<Vec<_>>>()?;
    Ok(DatasetSplit {
        train,
        test,
        num_classes: config.classes,
        seed: config.seed,
        label_fraction: 1.0,
        normalizer: Some(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_data() {
        let cfg = SynthHarConfig { per_class: 20, ..Default::default() };
        assert_eq!(synth_har(&cfg).unwrap(), synth_har(&cfg).unwrap());
        let other = synth_har(&SynthHarConfig { seed: 1, ..cfg.clone() }).unwrap();
        assert_ne!(synth_har(&cfg).unwrap().train[0].values, other.train[0].values);
    }

    #[test]
    fn noiseless_unjittered_windows_repeat_within_class() {
        let cfg = SynthHarConfig { per_class: 10, noise: 0.0, phase_jitter: 0.0, ..Default::default() };
        let split = synth_har(&cfg).unwrap();
        for w in &split.train {
            let twin = split.train.iter().find(|o| o.label == w.label).unwrap();
            assert_eq!(w.values, twin.values);
        }
    }

    #[test]
    fn split_is_seventy_thirty_and_valid() {
        let split = synth_har(&SynthHarConfig { per_class: 20, ..Default::default() }).unwrap();
        assert_eq!(split.train.len(), 6 * 14);
        assert_eq!(split.test.len(), 6 * 6);
        split.validate().unwrap();
        for w in &split.train {
            assert!(w.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn rejects_single_class() {
        assert!(synth_har(&SynthHarConfig { classes: 1, ..Default::default() }).is_err());
    }
}

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{FeatureSet, FeatureSource};
use super::metrics::{metrics, Confusion};
use crate::error::{Error, Result};
use crate::frameworks::{cross_entropy, Adam, ModelBundle};
use crate::netcore::{Linear, Module};
use crate::rng::{Purpose, SeedTree};
use crate::tensor::{Matrix, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: 64, learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub confusion: Confusion,
    pub trainable_params: usize,
    pub frozen_params: usize,
    pub trainable_ratio: f64,
    pub seeds: Vec<u64>,
    /// Mean cross-entropy of the last probe epoch.
    pub final_train_loss: f64,
}

/// Trainable parameters of a linear probe from `features` to `classes`.
pub fn probe_param_count(features: usize, classes: usize) -> usize {
    features * classes + classes
}

/// Trains one affine classifier on frozen features and scores it on the test set.
pub fn linear_probe(train: &FeatureSet, test: &FeatureSet, classes: usize, cfg: &ProbeConfig) -> Result<ProbeResult> {
    if train.dim() != test.dim() {
        return Err(Error::Shape(format!("train features are {}-d, test features {}-d", train.dim(), test.dim())));
    }
    if classes < 2 {
        return Err(Error::DegenerateProbe);
    }
    if let Some(&y) = train.labels.iter().chain(&test.labels).find(|&&y| y >= classes) {
        return Err(Error::Argument(format!("label {y} out of range for {classes} classes")));
    }
    if train.labels.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::DegenerateProbe);
    }
    if cfg.batch_size == 0 {
        return Err(Error::Argument("probe batch_size must be at least 1".into()));
    }
    let seeds = SeedTree::new(cfg.seed);
    let mut init_rng = seeds.fork_indexed(Purpose::Probe, 0);
    let mut order_rng = seeds.fork_indexed(Purpose::Probe, 1);
    let f = train.dim();
    let mut head = Linear::<f64>::new(f, classes, &mut init_rng);
    let mut adam = Adam::new(cfg.learning_rate, cfg.beta1, cfg.beta2, 1e-8);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut final_train_loss = f64::NAN;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        let (mut sum, mut n) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = train.subset(chunk);
            let logits = Matrix { rows: chunk.len(), cols: classes, data: head.forward(&batch.features.data, chunk.len()) };
            let (loss, d_logits) = cross_entropy(&logits, &batch.labels)?;
            let mut grads = head.zeros_like();
            head.backward(&batch.features.data, chunk.len(), &d_logits.data, Some(&mut grads), false);
            adam.step(head.tensors_mut(), grads.tensors())?;
            sum += loss * chunk.len() as f64;
            n += chunk.len();
        }
        final_train_loss = sum / n as f64;
        if !final_train_loss.is_finite() {
            return Err(Error::NonFinite("probe training loss".into()));
        }
    }
    let predicted = predict(&head, &test.features);
    let confusion = Confusion::from_predictions(&test.labels, &predicted, classes)?;
    let m = metrics(&confusion)?;
    let trainable = head.param_count();
    Ok(ProbeResult {
        accuracy: m.accuracy,
        macro_f1: m.macro_f1,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        confusion,
        trainable_params: trainable,
        frozen_params: 0,
        trainable_ratio: 1.0,
        seeds: alloc::vec![cfg.seed],
        final_train_loss,
    })
}

fn predict<T: Real>(head: &Linear<T>, x: &Matrix<T>) -> Vec<usize> {
    let k = head.output_dim();
    let logits = head.forward(&x.data, x.rows);
    logits
        .chunks(k)
        .map(|row| {
            let mut best = 0;
            for (c, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Records the frozen extractor size alongside the probe's own count.
pub fn with_frozen(mut result: ProbeResult, frozen: usize) -> ProbeResult {
    result.frozen_params = frozen;
    result.trainable_ratio = result.trainable_params as f64 / (result.trainable_params + frozen) as f64;
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamAudit {
    pub frozen: usize,
    pub trainable: usize,
    pub ratio: f64,
}

/// Frozen parameters on the feature path versus the probe's trainable ones.
///
/// For encoder features the frozen part is the encoder; for discriminator
/// features it is the discriminator's recurrent layer (its heads are unused).
pub fn param_audit<T: Real>(
    bundle: Option<&ModelBundle<T>>,
    source: FeatureSource,
    features: usize,
    classes: usize,
) -> ParamAudit {
    use crate::frameworks::Discriminator;
    let frozen = bundle.map_or(0, |b| match source {
        FeatureSource::Encoder => b.encoder_param_count(),
        FeatureSource::Discriminator(_) => match &b.discriminator {
            Some(Discriminator::Data(d)) => d.lstm.param_count(),
            Some(Discriminator::Joint(d)) => d.lstm.param_count(),
            None => 0,
        },
    });
    let trainable = probe_param_count(features, classes);
    ParamAudit { frozen, trainable, ratio: trainable as f64 / (trainable + frozen) as f64 }
}

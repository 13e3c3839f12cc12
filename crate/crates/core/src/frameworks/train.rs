use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::bundle::{ModelBundle, ParamGroup};
use super::config::{FrameworkConfig, FrameworkId};
use super::loss::{discriminator_step, model_step, Batch, LossReport};
use crate::datapipe::SequenceWindow;
use crate::error::{Error, Result};
use crate::netcore::{sample_prior, Module};
use crate::rng::{Purpose, Rng, SeedTree};
use crate::tensor::{Real, SeqBatch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub epoch: usize,
    /// Global generator/encoder update index, starting at 1.
    pub step: u64,
    pub size: usize,
    pub report: LossReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub batches: usize,
    /// Per-field mean over the epoch's batches.
    pub mean: LossReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub batches: Vec<BatchRecord>,
    pub epochs: Vec<EpochRecord>,
    /// Epoch index of the most recent checkpoint an observer persisted.
    pub last_checkpoint: Option<usize>,
}

/// Hooks invoked while training; the std side uses them for logging,
/// loss files and checkpoints.
pub trait TrainObserver<T: Real> {
    fn on_batch(&mut self, _record: &BatchRecord) -> Result<()> {
        Ok(())
    }

    /// Returns whether a checkpoint of `bundle` was written.
    fn on_epoch(&mut self, _record: &EpochRecord, _bundle: &ModelBundle<T>) -> Result<bool> {
        Ok(false)
    }
}

/// Observer that does nothing.
pub struct Silent;

impl<T: Real> TrainObserver<T> for Silent {}

/// Mini-batch Adam training with one discriminator optimiser and one for
/// everything else.
pub struct Trainer<T> {
    pub cfg: FrameworkConfig,
    pub bundle: ModelBundle<T>,
    pub record: TrainRecord,
    disc_opt: Adam<T>,
    model_opt: Adam<T>,
    order_rng: Rng,
    prior_rng: Rng,
    noise_rng: Rng,
    epoch: usize,
}

impl<T: Real> Trainer<T> {
    pub fn new(cfg: &FrameworkConfig, channels: usize, steps: usize, classes: Option<usize>) -> Result<Self> {
        let bundle = ModelBundle::new(cfg, channels, steps, classes)?;
        Ok(Self::from_bundle(cfg, bundle))
    }

    pub fn from_bundle(cfg: &FrameworkConfig, bundle: ModelBundle<T>) -> Self {
        let seeds = SeedTree::new(cfg.seed);
        let adam = || Adam::new(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon);
        Self {
            cfg: cfg.clone(),
            bundle,
            record: TrainRecord::default(),
            disc_opt: adam(),
            model_opt: adam(),
            order_rng: seeds.fork(Purpose::DataOrder),
            prior_rng: seeds.fork(Purpose::Prior),
            noise_rng: seeds.fork(Purpose::Reparam),
            epoch: 0,
        }
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// Runs the configured number of epochs.
    pub fn fit(&mut self, windows: &[SequenceWindow], observer: &mut dyn TrainObserver<T>) -> Result<()> {
        if self.cfg.framework == FrameworkId::Rand {
            return Ok(());
        }
        while self.epoch < self.cfg.epochs {
            self.run_epoch(windows, observer)?;
        }
        Ok(())
    }

    pub fn run_epoch(&mut self, windows: &[SequenceWindow], observer: &mut dyn TrainObserver<T>) -> Result<EpochRecord> {
        if windows.is_empty() {
            return Err(Error::Argument("no training windows".into()));
        }
        let dims = self.bundle.dims;
        if let Some(w) = windows.iter().find(|w| w.channels != dims.channels || w.steps != dims.steps) {
            return Err(Error::Shape(alloc::format!(
                "window is {}×{}, model expects {}×{}",
                w.channels,
                w.steps,
                dims.channels,
                dims.steps
            )));
        }
        let mut order: Vec<usize> = (0..windows.len()).collect();
        order.shuffle(&mut self.order_rng);
        let mut sums = [0.0f64; 7];
        let mut counts = [0usize; 7];
        let mut batches = 0;
        for chunk in order.chunks(self.cfg.batch_size) {
            let batch = self.make_batch(windows, chunk)?;
            let report = self.step(&batch)?;
            for (i, v) in report.values().iter().enumerate() {
                if let Some(v) = v {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
            batches += 1;
            let rec = BatchRecord { epoch: self.epoch, step: self.bundle.step, size: chunk.len(), report };
            observer.on_batch(&rec)?;
            self.record.batches.push(rec);
        }
        let mean_of = |i: usize| (counts[i] > 0).then(|| sums[i] / counts[i] as f64);
        let mean = LossReport {
            d_loss: mean_of(0),
            g_loss: mean_of(1),
            e_loss: mean_of(2),
            recon_x: mean_of(3),
            recon_z: mean_of(4),
            kl: mean_of(5),
            ce: mean_of(6),
        };
        let rec = EpochRecord { epoch: self.epoch, batches, mean };
        self.record.epochs.push(rec);
        if observer.on_epoch(&rec, &self.bundle)? {
            self.record.last_checkpoint = Some(self.epoch);
        }
        self.epoch += 1;
        Ok(rec)
    }

    fn make_batch(&mut self, windows: &[SequenceWindow], idx: &[usize]) -> Result<Batch<T>> {
        let dims = self.bundle.dims;
        let x = SeqBatch::from_windows(idx.iter().map(|&i| windows[i].values.as_slice()), dims.channels, dims.steps)?;
        let fw = self.cfg.framework;
        let z = fw.is_adversarial().then(|| sample_prior(idx.len(), dims.latent, &mut self.prior_rng));
        let eps = (fw == FrameworkId::M2v).then(|| sample_prior(idx.len(), dims.latent, &mut self.noise_rng));
        let labels = if fw == FrameworkId::Sup {
            let labels: Option<Vec<usize>> = idx.iter().map(|&i| windows[i].label).collect();
            Some(labels.ok_or_else(|| Error::Argument("supervised training needs labelled windows".into()))?)
        } else {
            None
        };
        Ok(Batch { x, z, eps, labels })
    }

    /// One discriminator update (when the framework has one) followed by one
    /// generator/encoder update.
    pub fn step(&mut self, batch: &Batch<T>) -> Result<LossReport> {
        let mut report = LossReport::default();
        if self.cfg.framework.is_adversarial() {
            for _ in 0..self.cfg.disc_steps {
                let mut grads = self.bundle.zeros_like();
                report = discriminator_step(&self.bundle, batch, &self.cfg, Some(&mut grads))?;
                self.check(&report)?;
                self.disc_opt.step(
                    self.bundle.group_tensors_mut(ParamGroup::Discriminator),
                    grads.group_tensors(ParamGroup::Discriminator),
                )?;
            }
        }
        let mut grads = self.bundle.zeros_like();
        let model = model_step(&self.bundle, batch, &self.cfg, Some(&mut grads)).map_err(|e| match e {
            Error::Diverged { step, .. } => Error::Diverged { step, last_checkpoint: self.record.last_checkpoint },
            other => other,
        })?;
        self.check(&model)?;
        self.model_opt
            .step(self.bundle.group_tensors_mut(ParamGroup::Model), grads.group_tensors(ParamGroup::Model))?;
        self.bundle.step += 1;
        if !self.bundle.is_finite() {
            return Err(self.diverged());
        }
        // The discriminator's own loss takes precedence over the one seen by the model step.
        Ok(model.merge(report))
    }

    fn check(&self, report: &LossReport) -> Result<()> {
        if report.is_finite() {
            Ok(())
        } else {
            Err(self.diverged())
        }
    }

    fn diverged(&self) -> Error {
        Error::Diverged { step: self.bundle.step, last_checkpoint: self.record.last_checkpoint }
    }

    pub fn into_parts(self) -> (ModelBundle<T>, TrainRecord) {
        (self.bundle, self.record)
    }
}

/// Builds a model for the training split and trains it for `cfg.epochs`.
pub fn train<T: Real>(
    cfg: &FrameworkConfig,
    train: &[SequenceWindow],
    num_classes: usize,
    observer: &mut dyn TrainObserver<T>,
) -> Result<(ModelBundle<T>, TrainRecord)> {
    let first = train.first().ok_or_else(|| Error::Argument("no training windows".into()))?;
    let mut trainer = Trainer::new(cfg, first.channels, first.steps, Some(num_classes))?;
    trainer.fit(train, observer)?;
    Ok(trainer.into_parts())
}

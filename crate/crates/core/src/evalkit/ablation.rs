use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::features::{feature_set, FeatureSource};
use super::probe::{linear_probe, ProbeConfig};
use crate::datapipe::DatasetSplit;
use crate::error::{Error, Result};
use crate::frameworks::{encode, FrameworkConfig, FrameworkId, ModelBundle, Silent, Trainer, EVAL_CHUNK};
use crate::netcore::sample_prior;
use crate::rng::{Purpose, SeedTree};
use crate::tensor::{Matrix, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Configuration of the guided arm; the other arm copies it with both
    /// reconstruction weights set to zero.
    pub guided: FrameworkConfig,
    /// Evaluate after epoch 1, every `eval_every` epochs, and after the last.
    pub eval_every: usize,
    pub probe: ProbeConfig,
    /// Prior draws used for the cycle error.
    pub cycle_samples: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            guided: FrameworkConfig::default(),
            eval_every: 10,
            probe: ProbeConfig::default(),
            cycle_samples: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    /// 1-based count of completed epochs.
    pub epoch: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// `None` for models without both an encoder and a generator.
    pub cycle_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedRun {
    pub framework: FrameworkId,
    pub lambda_x: f64,
    pub lambda_z: f64,
    pub points: Vec<TrackPoint>,
    /// Error message if training stopped early; the points gathered so far are kept.
    pub failure: Option<String>,
}

impl TrackedRun {
    pub fn last(&self) -> Option<&TrackPoint> {
        self.points.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRecord {
    pub guided: TrackedRun,
    pub unguided: TrackedRun,
}

/// Mean over samples of `‖x̂ − G(E(x̂))‖²` for generated `x̂ = G(z)`.
pub fn cycle_error<T: Real>(bundle: &ModelBundle<T>, z: &Matrix<T>) -> Result<f64> {
    let gen = bundle.generator()?;
    let steps = bundle.dims.steps;
    let mut total = 0.0;
    for start in (0..z.rows).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(z.rows);
        let chunk = Matrix { rows: end - start, cols: z.cols, data: z.data[start * z.cols..end * z.cols].to_vec() };
        let x_hat = gen.forward(&chunk, steps)?.output;
        let rec = gen.forward(&encode(bundle, &x_hat)?, steps)?.output;
        total += x_hat
            .data
            .iter()
            .zip(&rec.data)
            .map(|(a, b)| {
                let d = (*a - *b).to_f64_lossy();
                d * d
            })
            .sum::<f64>();
    }
    Ok(total / z.rows.max(1) as f64)
}

fn is_eval_epoch(done: usize, total: usize, every: usize) -> bool {
    done == 1 || done == total || (every > 0 && done % every == 0)
}

/// Trains `cfg` on `split.train`, probing on `split.test` (and measuring the
/// cycle error when possible) at the evaluation epochs. Returns the final
/// model unless training failed.
pub fn train_and_track<T: Real>(
    cfg: &FrameworkConfig,
    split: &DatasetSplit,
    eval_every: usize,
    probe: &ProbeConfig,
    cycle_samples: usize,
) -> Result<(TrackedRun, Option<ModelBundle<T>>)> {
    let mut trainer = Trainer::<T>::new(cfg, split.channels(), split.steps(), Some(split.num_classes))?;
    let source = FeatureSource::default_for(cfg.framework);
    let mut prior = SeedTree::new(cfg.seed).fork(Purpose::Generate);
    let z = sample_prior::<T>(cycle_samples, cfg.latent_dim, &mut prior);
    let has_cycle = trainer.bundle.encoder.is_some() && trainer.bundle.generator.is_some();
    let mut run = TrackedRun {
        framework: cfg.framework,
        lambda_x: cfg.lambda_x,
        lambda_z: cfg.lambda_z,
        points: Vec::new(),
        failure: None,
    };
    let evaluate = |bundle: &ModelBundle<T>, epoch: usize| -> Result<TrackPoint> {
        let train = feature_set(bundle, &split.train, source)?;
        let test = feature_set(bundle, &split.test, source)?;
        let r = linear_probe(&train, &test, split.num_classes, probe)?;
        let cycle_error = if has_cycle { Some(cycle_error(bundle, &z)?) } else { None };
        Ok(TrackPoint { epoch, accuracy: r.accuracy, macro_f1: r.macro_f1, cycle_error })
    };
    let epochs = if cfg.framework == FrameworkId::Rand { 0 } else { cfg.epochs };
    for e in 0..epochs {
        if let Err(err) = trainer.run_epoch(&split.train, &mut Silent) {
            log::warn!("{} stopped in epoch {}: {err}", cfg.framework, e + 1);
            run.failure = Some(err.to_string());
            return Ok((run, None));
        }
        let done = e + 1;
        if is_eval_epoch(done, epochs, eval_every) {
            let point = evaluate(&trainer.bundle, done)?;
            log::info!(
                "{} epoch {done}: probe accuracy {:.4}, cycle error {:?}",
                cfg.framework,
                point.accuracy,
                point.cycle_error
            );
            run.points.push(point);
        }
    }
    if epochs == 0 {
        run.points.push(evaluate(&trainer.bundle, 0)?);
    }
    Ok((run, Some(trainer.into_parts().0)))
}

/// Guided training against the same configuration without reconstruction
/// guidance. A failing arm is recorded and does not stop the other.
pub fn bigan_ablation<T: Real>(
    split: &DatasetSplit,
    cfg: &AblationConfig,
) -> Result<(AblationRecord, Option<ModelBundle<T>>, Option<ModelBundle<T>>)> {
    if cfg.guided.framework != FrameworkId::GuidedGan {
        return Err(Error::Argument("the ablation's guided arm must be guided_gan".into()));
    }
    let unguided_cfg = FrameworkConfig { framework: FrameworkId::Rbigan, lambda_x: 0.0, lambda_z: 0.0, ..cfg.guided.clone() };
    let (guided, g_bundle) = train_and_track::<T>(&cfg.guided, split, cfg.eval_every, &cfg.probe, cfg.cycle_samples)?;
    let (unguided, u_bundle) =
        train_and_track::<T>(&unguided_cfg, split, cfg.eval_every, &cfg.probe, cfg.cycle_samples)?;
    Ok((AblationRecord { guided, unguided }, g_bundle, u_bundle))
}

//! Training objectives and their hand-derived gradients.
//!
//! Everything adversarial is computed from logits through
//! `softplus(x) = max(x, 0) + ln(1 + e^-|x|)`, so `-ln σ(l) = softplus(-l)`
//! and `-ln(1 - σ(l)) = softplus(l)` never take the log of a saturated score.
//! Per-timestep terms are averaged over batch and time.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::bundle::ModelBundle;
use super::config::{FrameworkConfig, FrameworkId, GeneratorLoss, ReconReduction};
use crate::error::{Error, Result};
use crate::netcore::{DataDiscriminator, Encoder, Generator, JointDiscriminator, Linear};
use crate::tensor::{Matrix, Real, SeqBatch};

/// One mini-batch plus the random draws its objective consumes.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    /// Real windows.
    pub x: SeqBatch<T>,
    /// Prior draws, one row per window (adversarial frameworks).
    pub z: Option<Matrix<T>>,
    /// Reparameterisation noise (M2V).
    pub eps: Option<Matrix<T>>,
    /// Class labels (SUP).
    pub labels: Option<Vec<usize>>,
}

impl<T: Real> Batch<T> {
    fn z(&self) -> Result<&Matrix<T>> {
        self.z.as_ref().ok_or_else(|| Error::Argument("batch has no prior draws".into()))
    }
}

/// Loss values of one step. Terms a framework lacks are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub d_loss: Option<f64>,
    pub g_loss: Option<f64>,
    pub e_loss: Option<f64>,
    pub recon_x: Option<f64>,
    pub recon_z: Option<f64>,
    pub kl: Option<f64>,
    pub ce: Option<f64>,
}

impl LossReport {
    pub fn values(&self) -> [Option<f64>; 7] {
        [self.d_loss, self.g_loss, self.e_loss, self.recon_x, self.recon_z, self.kl, self.ce]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().flatten().all(|v| v.is_finite())
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: LossReport) -> LossReport {
        LossReport {
            d_loss: other.d_loss.or(self.d_loss),
            g_loss: other.g_loss.or(self.g_loss),
            e_loss: other.e_loss.or(self.e_loss),
            recon_x: other.recon_x.or(self.recon_x),
            recon_z: other.recon_z.or(self.recon_z),
            kl: other.kl.or(self.kl),
            ce: other.ce.or(self.ce),
        }
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid<T: Real>(x: T) -> T {
    crate::netcore::sigmoid(x)
}

/// `mean softplus(sign · l)` and `weight · d/dl` of it.
fn softplus_mean<T: Real>(logits: &Matrix<T>, sign: f64, weight: f64) -> (f64, Matrix<T>) {
    let n = logits.data.len() as f64;
    let s = T::from_f64_lossy(sign);
    let scale = T::from_f64_lossy(sign * weight / n);
    let mut value = 0.0;
    let grad = logits
        .data
        .iter()
        .map(|&l| {
            value += softplus(sign * l.to_f64_lossy());
            scale * sigmoid(s * l)
        })
        .collect();
    (value / n, Matrix { rows: logits.rows, cols: logits.cols, data: grad })
}

/// Generator-side adversarial term on logits the generator wants scored real.
fn fooling_term<T: Real>(logits: &Matrix<T>, kind: GeneratorLoss) -> (f64, Matrix<T>) {
    match kind {
        GeneratorLoss::NonSaturating => softplus_mean(logits, -1.0, 1.0),
        GeneratorLoss::Minimax => {
            let (v, g) = softplus_mean(logits, 1.0, -1.0);
            (-v, g)
        }
    }
}

/// Encoder-side term on real-pair logits the encoder wants scored fake.
fn unmasking_term<T: Real>(logits: &Matrix<T>, kind: GeneratorLoss) -> (f64, Matrix<T>) {
    match kind {
        GeneratorLoss::NonSaturating => softplus_mean(logits, 1.0, 1.0),
        GeneratorLoss::Minimax => {
            let (v, g) = softplus_mean(logits, -1.0, -1.0);
            (-v, g)
        }
    }
}

#[derive(Clone, Copy)]
enum Norm {
    L1,
    L2,
}

/// Per-sample reconstruction error averaged over the batch, and `weight · d/dpred`.
fn recon<T: Real>(
    pred: &[T],
    target: &[T],
    batch: usize,
    norm: Norm,
    reduction: ReconReduction,
    weight: f64,
) -> (f64, Vec<T>) {
    debug_assert_eq!(pred.len(), target.len());
    let entries = (pred.len() / batch.max(1)) as f64;
    let denom = match reduction {
        ReconReduction::Sum => batch as f64,
        ReconReduction::Mean => batch as f64 * entries,
    };
    let mut value = 0.0;
    let scale = T::from_f64_lossy(weight / denom);
    let two = T::from_f64_lossy(2.0);
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = p - t;
            match norm {
                Norm::L2 => {
                    value += d.to_f64_lossy().powi(2);
                    scale * two * d
                }
                Norm::L1 => {
                    value += d.to_f64_lossy().abs();
                    let s = if d > T::zero() {
                        T::one()
                    } else if d < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    };
                    scale * s
                }
            }
        })
        .collect();
    (value / denom, grad)
}

fn add_into<T: Real>(acc: &mut [T], other: &[T]) {
    for (a, &b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Mutable views into a gradient bundle, one per block.
struct Grads<'a, T> {
    gen: Option<&'a mut Generator<T>>,
    enc: Option<&'a mut Encoder<T>>,
    data_disc: Option<&'a mut DataDiscriminator<T>>,
    joint_disc: Option<&'a mut JointDiscriminator<T>>,
    classifier: Option<&'a mut Linear<T>>,
}

impl<'a, T: Real> Grads<'a, T> {
    fn split(grads: Option<&'a mut ModelBundle<T>>) -> Self {
        use super::bundle::Discriminator;
        match grads {
            None => Self { gen: None, enc: None, data_disc: None, joint_disc: None, classifier: None },
            Some(b) => {
                let (data_disc, joint_disc) = match b.discriminator.as_mut() {
                    Some(Discriminator::Data(d)) => (Some(d), None),
                    Some(Discriminator::Joint(d)) => (None, Some(d)),
                    None => (None, None),
                };
                Self {
                    gen: b.generator.as_mut(),
                    enc: b.encoder.as_mut(),
                    data_disc,
                    joint_disc,
                    classifier: b.classifier.as_mut(),
                }
            }
        }
    }
}

fn check_framework<T: Real>(bundle: &ModelBundle<T>, cfg: &FrameworkConfig) -> Result<()> {
    if bundle.framework != cfg.framework {
        return Err(Error::Argument(format!(
            "config is for {} but the model is {}",
            cfg.framework, bundle.framework
        )));
    }
    Ok(())
}

/// Discriminator objective; accumulates discriminator gradients into `grads`.
///
/// Returns an empty report for frameworks without a discriminator.
pub fn discriminator_step<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    grads: Option<&mut ModelBundle<T>>,
) -> Result<LossReport> {
    check_framework(bundle, cfg)?;
    let mut g = Grads::split(grads);
    let x = &batch.x;
    match bundle.framework {
        FrameworkId::Rgan | FrameworkId::Rfaae => {
            let disc = bundle.data_discriminator()?;
            let fake = bundle.generator()?.forward(batch.z()?, x.steps)?.output;
            let real_trace = disc.forward(x)?;
            let fake_trace = disc.forward(&fake)?;
            let (lr, dr) = softplus_mean(&real_trace.logits, -1.0, 1.0);
            let (lf, df) = softplus_mean(&fake_trace.logits, 1.0, 1.0);
            if let Some(gd) = g.data_disc.as_deref_mut() {
                disc.backward(x, &real_trace, &dr, Some(gd), false);
                disc.backward(&fake, &fake_trace, &df, Some(gd), false);
            }
            Ok(LossReport { d_loss: Some(lr + lf), ..Default::default() })
        }
        FrameworkId::Rbigan | FrameworkId::GuidedGan => {
            let disc = bundle.joint_discriminator()?;
            let z = batch.z()?;
            let ez = bundle.encoder()?.forward(x)?.output;
            let fake = bundle.generator()?.forward(z, x.steps)?.output;
            let real_trace = disc.forward(x, &ez)?;
            let fake_trace = disc.forward(&fake, z)?;
            let (lr, dr) = softplus_mean(&real_trace.logits, -1.0, 1.0);
            let (lf, df) = softplus_mean(&fake_trace.logits, 1.0, 1.0);
            if let Some(gd) = g.joint_disc.as_deref_mut() {
                disc.backward(x, &ez, &real_trace, &dr, Some(gd), false, false);
                disc.backward(&fake, z, &fake_trace, &df, Some(gd), false, false);
            }
            Ok(LossReport { d_loss: Some(lr + lf), ..Default::default() })
        }
        _ => Ok(LossReport::default()),
    }
}

/// Generator / encoder (/ classifier) objective; accumulates their gradients
/// into `grads`. Discriminator parameters receive nothing.
pub fn model_step<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    grads: Option<&mut ModelBundle<T>>,
) -> Result<LossReport> {
    check_framework(bundle, cfg)?;
    let g = Grads::split(grads);
    match bundle.framework {
        FrameworkId::Rgan | FrameworkId::Rfaae => data_adversarial(bundle, batch, cfg, g),
        FrameworkId::Rbigan => joint_adversarial(bundle, batch, cfg, 0.0, 0.0, g),
        FrameworkId::GuidedGan => joint_adversarial(bundle, batch, cfg, cfg.lambda_x, cfg.lambda_z, g),
        FrameworkId::RaeL1 => autoencoder(bundle, batch, cfg, Norm::L1, g),
        FrameworkId::RaeL2 => autoencoder(bundle, batch, cfg, Norm::L2, g),
        FrameworkId::M2v => variational(bundle, batch, cfg, g),
        FrameworkId::Sup => supervised(bundle, batch, g),
        FrameworkId::Rand => Ok(LossReport::default()),
    }
}

/// Every loss term of the framework on one batch, without gradients.
pub fn evaluate<T: Real>(bundle: &ModelBundle<T>, batch: &Batch<T>, cfg: &FrameworkConfig) -> Result<LossReport> {
    let d = discriminator_step(bundle, batch, cfg, None)?;
    let m = model_step(bundle, batch, cfg, None)?;
    Ok(d.merge(m))
}

fn data_adversarial<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    mut g: Grads<'_, T>,
) -> Result<LossReport> {
    let (gen, disc) = (bundle.generator()?, bundle.data_discriminator()?);
    let (x, z) = (&batch.x, batch.z()?);
    let gen_trace = gen.forward(z, x.steps)?;
    let fake = &gen_trace.output;
    let fake_trace = disc.forward(fake)?;
    let (adv, d_logits) = fooling_term(&fake_trace.logits, cfg.generator_loss);
    let mut d_fake = disc.backward(fake, &fake_trace, &d_logits, None, true).expect("requested");
    let mut report = LossReport { g_loss: Some(adv), ..Default::default() };

    if bundle.framework == FrameworkId::Rfaae {
        let enc = bundle.encoder()?;
        let enc_trace = enc.forward(fake)?;
        let (rz, d_zr) = recon(&enc_trace.output.data, &z.data, z.rows, Norm::L2, cfg.recon_reduction, 1.0);
        let d_zr = Matrix { rows: z.rows, cols: z.cols, data: d_zr };
        let dx = enc.backward(fake, &enc_trace, &d_zr, g.enc.as_deref_mut(), true).expect("requested");
        add_into(&mut d_fake.data, &dx.data);
        let mut e_loss = rz;

        if cfg.faae_adversarial_encoder {
            let ex_trace = enc.forward(x)?;
            let rec_trace = gen.forward(&ex_trace.output, x.steps)?;
            let rec_disc = disc.forward(&rec_trace.output)?;
            let (adv2, d_l2) = fooling_term(&rec_disc.logits, cfg.generator_loss);
            let d_rec = disc.backward(&rec_trace.output, &rec_disc, &d_l2, None, true).expect("requested");
            let d_ez = gen.backward(&ex_trace.output, &rec_trace, &d_rec, g.gen.as_deref_mut());
            enc.backward(x, &ex_trace, &d_ez, g.enc.as_deref_mut(), false);
            e_loss += adv2;
            report.g_loss = Some(adv + rz + adv2);
        } else {
            report.g_loss = Some(adv + rz);
        }
        report.e_loss = Some(e_loss);
        report.recon_z = Some(rz);
    }
    gen.backward(z, &gen_trace, &d_fake, g.gen.as_deref_mut());
    Ok(report)
}

fn joint_adversarial<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    lambda_x: f64,
    lambda_z: f64,
    mut g: Grads<'_, T>,
) -> Result<LossReport> {
    let (gen, enc, disc) = (bundle.generator()?, bundle.encoder()?, bundle.joint_discriminator()?);
    let (x, z) = (&batch.x, batch.z()?);
    let enc_trace = enc.forward(x)?;
    let gen_trace = gen.forward(z, x.steps)?;
    let ez = &enc_trace.output;
    let fake = &gen_trace.output;
    let real_trace = disc.forward(x, ez)?;
    let fake_trace = disc.forward(fake, z)?;

    let d_loss = softplus_mean::<T>(&real_trace.logits, -1.0, 1.0).0 + softplus_mean::<T>(&fake_trace.logits, 1.0, 1.0).0;
    let (adv_real, d_lr) = unmasking_term(&real_trace.logits, cfg.generator_loss);
    let (adv_fake, d_lf) = fooling_term(&fake_trace.logits, cfg.generator_loss);
    let (_, d_ez) = disc.backward(x, ez, &real_trace, &d_lr, None, false, true);
    let (d_fake, _) = disc.backward(fake, z, &fake_trace, &d_lf, None, true, false);
    let mut d_ez = d_ez.expect("requested");
    let mut d_fake = d_fake.expect("requested");
    let mut total = adv_real + adv_fake;
    let mut report = LossReport { d_loss: Some(d_loss), ..Default::default() };

    if lambda_x > 0.0 {
        let rec_trace = gen.forward(ez, x.steps)?;
        let (rx, d_rec) = recon(&rec_trace.output.data, &x.data, x.batch, Norm::L2, cfg.recon_reduction, lambda_x);
        let d_rec = SeqBatch { steps: x.steps, batch: x.batch, dim: x.dim, data: d_rec };
        let dz = gen.backward(ez, &rec_trace, &d_rec, g.gen.as_deref_mut());
        add_into(&mut d_ez.data, &dz.data);
        total += lambda_x * rx;
        report.recon_x = Some(rx);
    }
    if lambda_z > 0.0 {
        let rz_trace = enc.forward(fake)?;
        let (rz, d_zr) = recon(&rz_trace.output.data, &z.data, z.rows, Norm::L2, cfg.recon_reduction, lambda_z);
        let d_zr = Matrix { rows: z.rows, cols: z.cols, data: d_zr };
        let dx = enc.backward(fake, &rz_trace, &d_zr, g.enc.as_deref_mut(), true).expect("requested");
        add_into(&mut d_fake.data, &dx.data);
        total += lambda_z * rz;
        report.recon_z = Some(rz);
    }
    gen.backward(z, &gen_trace, &d_fake, g.gen.as_deref_mut());
    enc.backward(x, &enc_trace, &d_ez, g.enc.as_deref_mut(), false);
    report.g_loss = Some(total);
    report.e_loss = Some(total);
    Ok(report)
}

fn autoencoder<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    norm: Norm,
    mut g: Grads<'_, T>,
) -> Result<LossReport> {
    let (gen, enc) = (bundle.generator()?, bundle.encoder()?);
    let x = &batch.x;
    let enc_trace = enc.forward(x)?;
    let rec_trace = gen.forward(&enc_trace.output, x.steps)?;
    let (r, d_rec) = recon(&rec_trace.output.data, &x.data, x.batch, norm, cfg.recon_reduction, 1.0);
    let d_rec = SeqBatch { steps: x.steps, batch: x.batch, dim: x.dim, data: d_rec };
    let d_code = gen.backward(&enc_trace.output, &rec_trace, &d_rec, g.gen.as_deref_mut());
    enc.backward(x, &enc_trace, &d_code, g.enc.as_deref_mut(), false);
    Ok(LossReport { g_loss: Some(r), e_loss: Some(r), recon_x: Some(r), ..Default::default() })
}

/// Splits a `batch × 2L` Gaussian head into mean and log-variance rows.
pub fn split_gaussian<T: Real>(head: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let l = head.cols / 2;
    let mut mu = Matrix::zeros(head.rows, l);
    let mut logvar = Matrix::zeros(head.rows, l);
    for r in 0..head.rows {
        mu.row_mut(r).copy_from_slice(&head.row(r)[..l]);
        logvar.row_mut(r).copy_from_slice(&head.row(r)[l..]);
    }
    (mu, logvar)
}

fn variational<T: Real>(
    bundle: &ModelBundle<T>,
    batch: &Batch<T>,
    cfg: &FrameworkConfig,
    mut g: Grads<'_, T>,
) -> Result<LossReport> {
    let (gen, enc) = (bundle.generator()?, bundle.encoder()?);
    let x = &batch.x;
    let eps = batch.eps.as_ref().ok_or_else(|| Error::Argument("M2V batch has no reparameterisation noise".into()))?;
    let enc_trace = enc.forward(x)?;
    let (mu, logvar) = split_gaussian(&enc_trace.output);
    if !logvar.is_finite() || !mu.is_finite() {
        return Err(Error::Diverged { step: bundle.step, last_checkpoint: None });
    }
    if eps.rows != mu.rows || eps.cols != mu.cols {
        return Err(Error::Shape(format!("noise is {}×{}, expected {}×{}", eps.rows, eps.cols, mu.rows, mu.cols)));
    }
    let half = T::from_f64_lossy(0.5);
    let std: Vec<T> = logvar.data.iter().map(|&lv| (half * lv).exp()).collect();
    let z_data: Vec<T> = mu.data.iter().zip(&std).zip(&eps.data).map(|((&m, &s), &e)| m + s * e).collect();
    let z = Matrix { rows: mu.rows, cols: mu.cols, data: z_data };
    let rec_trace = gen.forward(&z, x.steps)?;
    let (r, d_rec) = recon(&rec_trace.output.data, &x.data, x.batch, Norm::L2, cfg.recon_reduction, 1.0);
    let d_rec = SeqBatch { steps: x.steps, batch: x.batch, dim: x.dim, data: d_rec };
    let dz = gen.backward(&z, &rec_trace, &d_rec, g.gen.as_deref_mut());

    let n = x.batch as f64;
    let inv_n = T::from_f64_lossy(1.0 / n);
    let mut kl = 0.0;
    let l = mu.cols;
    let mut d_head = Matrix::zeros(mu.rows, 2 * l);
    for r in 0..mu.rows {
        for c in 0..l {
            let i = r * l + c;
            let (m, lv, s, e) = (mu.data[i], logvar.data[i], std[i], eps.data[i]);
            let var = s * s;
            kl += 0.5 * (var + m * m - T::one() - lv).to_f64_lossy();
            d_head.data[r * 2 * l + c] = dz.data[i] + m * inv_n;
            d_head.data[r * 2 * l + l + c] = dz.data[i] * e * half * s + half * (var - T::one()) * inv_n;
        }
    }
    kl /= n;
    enc.backward(x, &enc_trace, &d_head, g.enc.as_deref_mut(), false);
    Ok(LossReport { g_loss: Some(r + kl), e_loss: Some(r + kl), recon_x: Some(r), kl: Some(kl), ..Default::default() })
}

/// Row-wise softmax cross-entropy; returns the batch mean and `d/dlogits`.
pub fn cross_entropy<T: Real>(logits: &Matrix<T>, labels: &[usize]) -> Result<(f64, Matrix<T>)> {
    if labels.len() != logits.rows {
        return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), logits.rows)));
    }
    let k = logits.cols;
    let n = logits.rows as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(logits.rows, k);
    for (r, &y) in labels.iter().enumerate() {
        if y >= k {
            return Err(Error::Argument(format!("label {y} out of range for {k} classes")));
        }
        let row: Vec<f64> = logits.row(r).iter().map(|v| v.to_f64_lossy()).collect();
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        loss += sum.ln() - (row[y] - max);
        for (c, e) in exps.iter().enumerate() {
            let p = e / sum - if c == y { 1.0 } else { 0.0 };
            grad.data[r * k + c] = T::from_f64_lossy(p / n);
        }
    }
    Ok((loss / n, grad))
}

fn supervised<T: Real>(bundle: &ModelBundle<T>, batch: &Batch<T>, mut g: Grads<'_, T>) -> Result<LossReport> {
    let enc = bundle.encoder()?;
    let head = bundle
        .classifier
        .as_ref()
        .ok_or_else(|| Error::Argument("supervised model has no classifier".into()))?;
    let labels = batch.labels.as_ref().ok_or_else(|| Error::Argument("supervised batch has no labels".into()))?;
    let x = &batch.x;
    let enc_trace = enc.forward(x)?;
    let feats = &enc_trace.output;
    let logits = Matrix { rows: x.batch, cols: head.output_dim(), data: head.forward(&feats.data, x.batch) };
    let (ce, d_logits) = cross_entropy(&logits, labels)?;
    let d_feat = head
        .backward(&feats.data, x.batch, &d_logits.data, g.classifier.as_deref_mut(), true)
        .expect("requested");
    let d_feat = Matrix { rows: x.batch, cols: feats.cols, data: d_feat };
    enc.backward(x, &enc_trace, &d_feat, g.enc.as_deref_mut(), false);
    Ok(LossReport { g_loss: None, e_loss: Some(ce), ce: Some(ce), ..Default::default() })
}

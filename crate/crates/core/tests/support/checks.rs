//! Property checks shared by the core tests and the acceptance target. Each
//! returns a one-line summary on success and the first counterexample on failure.

use guided_gan_core::datapipe::{segment, window_count, NormalizerStats, RawStream};
use guided_gan_core::evalkit::{
    faithfulness_study, feature_set, label_fraction_sweep, linear_probe, param_audit, FeatureSet, FeatureSource,
    ProbeConfig, SweepConfig,
};
use guided_gan_core::frameworks::{
    discriminator_step, evaluate, model_step, Batch, FrameworkConfig, FrameworkId, GeneratorLoss, LossReport,
    ModelBundle, ParamGroup, ReconReduction, Silent, Trainer,
};
use guided_gan_core::netcore::{
    DataDiscriminator, Encoder, Generator, JointDiscriminator, LstmInit, Module,
};
use guided_gan_core::rng::{Purpose, Rng, SeedTree};
use guided_gan_core::tensor::{Matrix, SeqBatch, Tensor};
use guided_gan_core::datapipe::{synth_har, SynthHarConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::oracle;

/// Relative tolerance of the loss oracle comparison.
pub const LOSS_RTOL: f64 = 1e-6;
/// Relative tolerance of analytic against finite-difference gradients.
pub const GRAD_RTOL: f64 = 1e-4;
/// Gradient magnitudes below this are compared absolutely at `GRAD_RTOL * GRAD_FLOOR`.
pub const GRAD_FLOOR: f64 = 1e-5;
/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

fn runner(cases: u32) -> TestRunner {
    let cfg = Config { cases, failure_persistence: None, max_shrink_iters: 64, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&s, f).map_err(|e| e.to_string())
}

/// A tiny model/batch configuration.
#[derive(Debug, Clone)]
pub struct Tiny {
    pub channels: usize,
    pub steps: usize,
    pub hidden: usize,
    pub latent: usize,
    pub projection: usize,
    pub batch: usize,
    pub seed: u64,
    pub lambda_x: f64,
    pub lambda_z: f64,
    pub minimax: bool,
    pub mean_recon: bool,
    pub faae_adversarial_encoder: bool,
}

pub fn tiny() -> impl Strategy<Value = Tiny> {
    let lambda = prop_oneof![Just(0.0), 0.001f64..2.0];
    (
        (1usize..=3, 1usize..=5, 1usize..=8, 1usize..=4, 1usize..=4, 1usize..=4),
        (any::<u64>(), lambda.clone(), lambda, any::<bool>(), any::<bool>(), any::<bool>()),
    )
        .prop_map(|((channels, steps, hidden, latent, projection, batch), (seed, lx, lz, mm, mr, fa))| Tiny {
            channels,
            steps,
            hidden,
            latent,
            projection,
            batch,
            seed,
            lambda_x: lx,
            lambda_z: lz,
            minimax: mm,
            mean_recon: mr,
            faae_adversarial_encoder: fa,
        })
}

pub const SUP_CLASSES: usize = 3;

impl Tiny {
    pub fn config(&self, framework: FrameworkId) -> FrameworkConfig {
        FrameworkConfig {
            framework,
            lambda_x: self.lambda_x,
            lambda_z: self.lambda_z,
            latent_dim: self.latent,
            hidden_dim: self.hidden,
            projection_dim: self.projection,
            seed: self.seed,
            generator_loss: if self.minimax { GeneratorLoss::Minimax } else { GeneratorLoss::NonSaturating },
            recon_reduction: if self.mean_recon { ReconReduction::Mean } else { ReconReduction::Sum },
            faae_adversarial_encoder: self.faae_adversarial_encoder,
            ..FrameworkConfig::default()
        }
    }

    /// A bundle whose every parameter (biases included) is jittered away from
    /// its structured initial value.
    pub fn bundle(&self, cfg: &FrameworkConfig) -> ModelBundle<f64> {
        let mut b = ModelBundle::<f64>::new(cfg, self.channels, self.steps, Some(SUP_CLASSES)).unwrap();
        let mut rng = SeedTree::new(self.seed).fork_indexed(Purpose::Init, 99);
        b.visit_mut(&mut |t| t.data.iter_mut().for_each(|v| *v += rng.random_range(-0.3..0.3)));
        b
    }

    pub fn rng(&self) -> Rng {
        SeedTree::new(self.seed).fork(Purpose::Synth)
    }

    pub fn inputs(&self, rng: &mut Rng) -> (SeqBatch<f64>, Matrix<f64>, Matrix<f64>, Vec<usize>) {
        let mut x = SeqBatch::zeros(self.steps, self.batch, self.channels);
        x.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        let mut normal = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(rng)).collect() };
        let z = Matrix::from_vec(self.batch, self.latent, normal(self.batch * self.latent)).unwrap();
        let eps = Matrix::from_vec(self.batch, self.latent, normal(self.batch * self.latent)).unwrap();
        let labels = (0..self.batch).map(|_| rng.random_range(0..SUP_CLASSES)).collect();
        (x, z, eps, labels)
    }
}

fn batch_for(framework: FrameworkId, x: &SeqBatch<f64>, z: &Matrix<f64>, eps: &Matrix<f64>, labels: &[usize]) -> Batch<f64> {
    Batch {
        x: x.clone(),
        z: framework.is_adversarial().then(|| z.clone()),
        eps: (framework == FrameworkId::M2v).then(|| eps.clone()),
        labels: (framework == FrameworkId::Sup).then(|| labels.to_vec()),
    }
}

fn rel_close(got: f64, want: f64, rtol: f64) -> bool {
    (got - want).abs() <= rtol * want.abs().max(f64::MIN_POSITIVE)
}

fn compare_loss(name: &str, got: Option<f64>, want: Option<f64>) -> Result<(), TestCaseError> {
    match (got, want) {
        (None, None) => Ok(()),
        (Some(g), Some(w)) if rel_close(g, w, LOSS_RTOL) => Ok(()),
        _ => Err(TestCaseError::fail(format!("{name}: library {got:?} vs oracle {want:?}"))),
    }
}

/// Every framework's loss terms against the scalar oracle.
pub fn loss_oracle(cases: u32) -> Result<String, String> {
    run(cases, tiny(), |t| {
        let mut rng = t.rng();
        let (x, z, eps, labels) = t.inputs(&mut rng);
        for fw in FrameworkId::ALL {
            let cfg = t.config(fw);
            let bundle = t.bundle(&cfg);
            let got = evaluate(&bundle, &batch_for(fw, &x, &z, &eps, &labels), &cfg)
                .map_err(|e| TestCaseError::fail(format!("{fw}: {e}")))?;
            let want = oracle::losses(&bundle, &cfg, &oracle::Inputs { x: &x, z: &z, eps: &eps, labels: &labels });
            let ctx = |n: &str| format!("{fw} {n}");
            compare_loss(&ctx("d_loss"), got.d_loss, want.d_loss)?;
            compare_loss(&ctx("g_loss"), got.g_loss, want.g_loss)?;
            compare_loss(&ctx("e_loss"), got.e_loss, want.e_loss)?;
            compare_loss(&ctx("recon_x"), got.recon_x, want.recon_x)?;
            compare_loss(&ctx("recon_z"), got.recon_z, want.recon_z)?;
            compare_loss(&ctx("kl"), got.kl, want.kl)?;
            compare_loss(&ctx("ce"), got.ce, want.ce)?;
        }
        Ok(())
    })?;
    Ok(format!("{cases} tiny configurations x {} frameworks within {LOSS_RTOL:e} relative", FrameworkId::ALL.len()))
}

fn grad_close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= GRAD_RTOL * analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

/// Central differences of `f` with respect to every element of `tensors(b)`.
fn fd_check<B: Clone>(
    what: &str,
    base: &B,
    analytic: &[f64],
    mut perturb: impl FnMut(&mut B, usize, f64),
    mut f: impl FnMut(&B) -> f64,
) -> Result<usize, TestCaseError> {
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = base.clone();
        perturb(&mut plus, i, FD_STEP);
        let mut minus = base.clone();
        perturb(&mut minus, i, -FD_STEP);
        let n = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
        if !grad_close(a, n) {
            return Err(TestCaseError::fail(format!("{what}[{i}]: analytic {a:e} vs numeric {n:e}")));
        }
    }
    Ok(analytic.len())
}

fn flatten(ts: Vec<&Tensor<f64>>) -> Vec<f64> {
    ts.into_iter().flat_map(|t| t.data.iter().copied()).collect()
}

fn nudge_module<M: Module<f64>>(m: &mut M, i: usize, h: f64) {
    let mut k = i;
    for t in m.tensors_mut() {
        if k < t.len() {
            t.data[k] += h;
            return;
        }
        k -= t.len();
    }
    panic!("index out of range");
}

fn nudge_group(b: &mut ModelBundle<f64>, g: ParamGroup, i: usize, h: f64) {
    let mut k = i;
    for t in b.group_tensors_mut(g) {
        if k < t.len() {
            t.data[k] += h;
            return;
        }
        k -= t.len();
    }
    panic!("index out of range");
}

fn weights(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parameter and input gradients of each network block under a random linear read-out.
pub fn block_gradients(t: &Tiny) -> Result<usize, TestCaseError> {
    let mut rng = t.rng();
    let (x, z, _, _) = t.inputs(&mut rng);
    let init = LstmInit::default();
    let mut init_rng = SeedTree::new(t.seed).fork(Purpose::Init);
    let jitter = |m: &mut dyn FnMut(&mut dyn FnMut(&mut Tensor<f64>)), rng: &mut Rng| {
        m(&mut |t| t.data.iter_mut().for_each(|v| *v += rng.random_range(-0.3..0.3)))
    };
    let mut checked = 0;

    let mut gen = Generator::<f64>::new(t.latent, t.hidden, t.channels, init, &mut init_rng);
    jitter(&mut |f| gen.visit_mut(f), &mut rng);
    let w = weights(&mut rng, t.steps * t.batch * t.channels);
    let read = |g: &Generator<f64>, z: &Matrix<f64>| dot(&g.forward(z, t.steps).unwrap().output.data, &w);
    let tr = gen.forward(&z, t.steps).unwrap();
    let mut grads = gen.zeros_like();
    let d_out = SeqBatch { steps: t.steps, batch: t.batch, dim: t.channels, data: w.clone() };
    let dz = gen.backward(&z, &tr, &d_out, Some(&mut grads));
    checked += fd_check("generator params", &gen, &flatten(grads.tensors()), |m, i, h| nudge_module(m, i, h), |m| read(m, &z))?;
    checked += fd_check("generator dz", &z, &dz.data, |m, i, h| m.data[i] += h, |zz| read(&gen, zz))?;

    let mut enc = Encoder::<f64>::new(t.channels, t.hidden, t.latent, init, &mut init_rng);
    jitter(&mut |f| enc.visit_mut(f), &mut rng);
    let w = weights(&mut rng, t.batch * t.latent);
    let read = |e: &Encoder<f64>, x: &SeqBatch<f64>| dot(&e.forward(x).unwrap().output.data, &w);
    let tr = enc.forward(&x).unwrap();
    let mut grads = enc.zeros_like();
    let d_out = Matrix { rows: t.batch, cols: t.latent, data: w.clone() };
    let dx = enc.backward(&x, &tr, &d_out, Some(&mut grads), true).unwrap();
    checked += fd_check("encoder params", &enc, &flatten(grads.tensors()), |m, i, h| nudge_module(m, i, h), |m| read(m, &x))?;
    checked += fd_check("encoder dx", &x, &dx.data, |m, i, h| m.data[i] += h, |xx| read(&enc, xx))?;

    let mut dd = DataDiscriminator::<f64>::new(t.channels, t.hidden, init, &mut init_rng);
    jitter(&mut |f| dd.visit_mut(f), &mut rng);
    let w = weights(&mut rng, t.steps * t.batch);
    let read = |d: &DataDiscriminator<f64>, x: &SeqBatch<f64>| dot(&d.forward(x).unwrap().logits.data, &w);
    let tr = dd.forward(&x).unwrap();
    let mut grads = dd.zeros_like();
    let d_l = Matrix { rows: t.steps, cols: t.batch, data: w.clone() };
    let dx = dd.backward(&x, &tr, &d_l, Some(&mut grads), true).unwrap();
    checked += fd_check("data discriminator params", &dd, &flatten(grads.tensors()), |m, i, h| nudge_module(m, i, h), |m| read(m, &x))?;
    checked += fd_check("data discriminator dx", &x, &dx.data, |m, i, h| m.data[i] += h, |xx| read(&dd, xx))?;

    let mut jd = JointDiscriminator::<f64>::new(t.channels, t.latent, t.hidden, t.projection, init, &mut init_rng);
    jitter(&mut |f| jd.visit_mut(f), &mut rng);
    let w = weights(&mut rng, t.steps * t.batch);
    let read = |d: &JointDiscriminator<f64>, x: &SeqBatch<f64>, z: &Matrix<f64>| dot(&d.forward(x, z).unwrap().logits.data, &w);
    let tr = jd.forward(&x, &z).unwrap();
    let mut grads = jd.zeros_like();
    let (dx, dz) = jd.backward(&x, &z, &tr, &d_l_of(&w, t), Some(&mut grads), true, true);
    checked += fd_check("joint discriminator params", &jd, &flatten(grads.tensors()), |m, i, h| nudge_module(m, i, h), |m| read(m, &x, &z))?;
    checked += fd_check("joint discriminator dx", &x, &dx.unwrap().data, |m, i, h| m.data[i] += h, |xx| read(&jd, xx, &z))?;
    checked += fd_check("joint discriminator dz", &z, &dz.unwrap().data, |m, i, h| m.data[i] += h, |zz| read(&jd, &x, zz))?;
    Ok(checked)
}

fn d_l_of(w: &[f64], t: &Tiny) -> Matrix<f64> {
    Matrix { rows: t.steps, cols: t.batch, data: w.to_vec() }
}

fn model_objective(r: &LossReport) -> f64 {
    r.g_loss.or(r.e_loss).expect("model objective")
}

/// Discriminator-side and generator/encoder-side gradients of every framework.
pub fn framework_gradients(t: &Tiny) -> Result<usize, TestCaseError> {
    let mut rng = t.rng();
    let (x, z, eps, labels) = t.inputs(&mut rng);
    let mut checked = 0;
    for fw in FrameworkId::ALL.into_iter().filter(|&f| f != FrameworkId::Rand) {
        let cfg = t.config(fw);
        let bundle = t.bundle(&cfg);
        let batch = batch_for(fw, &x, &z, &eps, &labels);
        let fail = |e: guided_gan_core::Error| TestCaseError::fail(format!("{fw}: {e}"));

        if fw.is_adversarial() {
            let mut g = bundle.zeros_like();
            discriminator_step(&bundle, &batch, &cfg, Some(&mut g)).map_err(fail)?;
            prop_assert!(flatten(g.group_tensors(ParamGroup::Model)).iter().all(|&v| v == 0.0), "{fw}: D step touched G/E");
            checked += fd_check(
                &format!("{fw} discriminator"),
                &bundle,
                &flatten(g.group_tensors(ParamGroup::Discriminator)),
                |b, i, h| nudge_group(b, ParamGroup::Discriminator, i, h),
                |b| discriminator_step(b, &batch, &cfg, None).unwrap().d_loss.unwrap(),
            )?;
        }
        let mut g = bundle.zeros_like();
        model_step(&bundle, &batch, &cfg, Some(&mut g)).map_err(fail)?;
        prop_assert!(
            flatten(g.group_tensors(ParamGroup::Discriminator)).iter().all(|&v| v == 0.0),
            "{fw}: model step touched D"
        );
        checked += fd_check(
            &format!("{fw} generator/encoder"),
            &bundle,
            &flatten(g.group_tensors(ParamGroup::Model)),
            |b, i, h| nudge_group(b, ParamGroup::Model, i, h),
            |b| model_objective(&model_step(b, &batch, &cfg, None).unwrap()),
        )?;
    }
    Ok(checked)
}

pub fn gradients(cases: u32) -> Result<String, String> {
    let total = std::cell::Cell::new(0usize);
    run(cases, tiny(), |t| {
        total.set(total.get() + block_gradients(&t)? + framework_gradients(&t)?);
        Ok(())
    })?;
    Ok(format!(
        "{cases} configurations, {} partial derivatives within {GRAD_RTOL:e} relative of central differences",
        total.get()
    ))
}

fn small_har(seed: u64) -> guided_gan_core::datapipe::DatasetSplit {
    synth_har(&SynthHarConfig { classes: 3, channels: 2, window: 6, per_class: 20, seed, ..Default::default() }).unwrap()
}

fn small_cfg(framework: FrameworkId, seed: u64) -> FrameworkConfig {
    FrameworkConfig {
        framework,
        epochs: 2,
        batch_size: 16,
        latent_dim: 5,
        hidden_dim: 6,
        projection_dim: 4,
        seed,
        ..FrameworkConfig::default()
    }
}

/// Guided training without guidance is the unguided model, bit for bit, in both precisions.
pub fn guided_zero_is_bigan() -> Result<String, String> {
    let split = small_har(3);
    fn run_pair<T: guided_gan_core::Real>(split: &guided_gan_core::datapipe::DatasetSplit) -> Result<(), String> {
        let mut guided = FrameworkConfig { lambda_x: 0.0, lambda_z: 0.0, ..small_cfg(FrameworkId::GuidedGan, 11) };
        guided.epochs = 3;
        let bigan = FrameworkConfig { framework: FrameworkId::Rbigan, lambda_x: 0.01, lambda_z: 1.0, ..guided.clone() };
        let train = |cfg: &FrameworkConfig| {
            let mut tr = Trainer::<T>::new(cfg, split.channels(), split.steps(), Some(split.num_classes)).unwrap();
            tr.fit(&split.train, &mut Silent).unwrap();
            tr.into_parts()
        };
        let (gb, gr) = train(&guided);
        let (bb, br) = train(&bigan);
        if gr != br {
            return Err("loss records differ".into());
        }
        let (ga, ba) = (gb.named_tensors(""), bb.named_tensors(""));
        if ga.len() != ba.len() || ga.iter().zip(&ba).any(|((n1, t1), (n2, t2))| n1 != n2 || t1 != t2) {
            return Err("trained parameters differ".into());
        }
        Ok(())
    }
    run_pair::<f64>(&split)?;
    run_pair::<f32>(&split)?;
    Ok("guided (0, 0) and unguided training agree bit for bit over 3 epochs (f64 and f32)".into())
}

fn features(n: usize, dim: usize, classes: usize, seed: u64) -> FeatureSet {
    let mut rng = SeedTree::new(seed).fork(Purpose::Synth);
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let data = labels
        .iter()
        .flat_map(|&y| (0..dim).map(move |d| (if d % classes == y { 1.5 } else { 0.0 }, d)).collect::<Vec<_>>())
        .map(|(m, _)| m + Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    FeatureSet { features: Matrix::from_vec(n, dim, data).unwrap(), labels }
}

/// A label-fraction sweep at 100% reproduces the plain probe in every run.
pub fn sweep_full_is_probe() -> Result<String, String> {
    let train = features(120, 8, 3, 1);
    let test = features(60, 8, 3, 2);
    let probe = ProbeConfig { epochs: 15, ..ProbeConfig::default() };
    let plain = linear_probe(&train, &test, 3, &probe).map_err(|e| e.to_string())?;
    let cfg = SweepConfig { fractions: vec![1.0], runs: 3, subset_seed: 5, probe };
    let points = label_fraction_sweep(&train, &test, 3, &cfg).map_err(|e| e.to_string())?;
    if points[0].accuracies.iter().any(|a| *a != Some(plain.accuracy)) {
        return Err(format!("sweep {:?} vs probe {}", points[0].accuracies, plain.accuracy));
    }
    Ok(format!("sweep at fraction 1.0 = probe accuracy {} in all 3 runs", plain.accuracy))
}

/// The (Train, Test) faithfulness row is the plain probe on the same extractor.
pub fn faithfulness_train_test_is_probe() -> Result<String, String> {
    let split = small_har(4);
    let cfg = small_cfg(FrameworkId::GuidedGan, 5);
    let mut tr = Trainer::<f32>::new(&cfg, split.channels(), split.steps(), Some(split.num_classes)).map_err(|e| e.to_string())?;
    tr.fit(&split.train, &mut Silent).map_err(|e| e.to_string())?;
    let bundle = tr.bundle;
    let probe = ProbeConfig { epochs: 10, ..ProbeConfig::default() };
    let table = faithfulness_study(&bundle, &split, FeatureSource::Encoder, &probe).map_err(|e| e.to_string())?;
    let tr_f = feature_set(&bundle, &split.train, FeatureSource::Encoder).map_err(|e| e.to_string())?;
    let te_f = feature_set(&bundle, &split.test, FeatureSource::Encoder).map_err(|e| e.to_string())?;
    let plain = linear_probe(&tr_f, &te_f, split.num_classes, &probe).map_err(|e| e.to_string())?;
    let row = &table.rows[0];
    if row.probe != plain {
        return Err(format!("row accuracy {} vs probe {}", row.accuracy, plain.accuracy));
    }
    Ok(format!("(Train, Test) row = probe result exactly (accuracy {})", plain.accuracy))
}

/// Trainable counts of the probe for 10, 6 and 12 classes on 100-d features.
pub fn probe_counts() -> Result<String, String> {
    let mut out = Vec::new();
    for (k, want) in [(10usize, 1010usize), (6, 606), (12, 1212)] {
        let audit = param_audit::<f32>(None, FeatureSource::Encoder, 100, k);
        let train = features(4 * k, 100, k, k as u64);
        let test = features(2 * k, 100, k, 100 + k as u64);
        let r = linear_probe(&train, &test, k, &ProbeConfig { epochs: 1, ..ProbeConfig::default() })
            .map_err(|e| e.to_string())?;
        if audit.trainable != want || r.trainable_params != want {
            return Err(format!("K={k}: audit {} / probe {} vs {want}", audit.trainable, r.trainable_params));
        }
        out.push(format!("K={k}: {want}"));
    }
    Ok(out.join(", "))
}

#[derive(Debug, Clone)]
pub struct StreamCase {
    pub channels: usize,
    pub values: Vec<f64>,
    pub window: usize,
    pub stride: usize,
    pub labels: Vec<usize>,
}

pub fn stream_case() -> impl Strategy<Value = StreamCase> {
    (1usize..=4, 1usize..=200, 1usize..=48, 1usize..=24).prop_flat_map(|(channels, samples, window, stride)| {
        (
            proptest::collection::vec(-1e3f64..1e3, channels * samples),
            proptest::collection::vec(0usize..4, samples),
        )
            .prop_map(move |(values, labels)| StreamCase { channels, values, window, stride, labels })
    })
}

/// Window counts, value preservation, normalisation range and round trip.
pub fn preprocessing(cases: u32) -> Result<String, String> {
    run(cases, stream_case(), |c| {
        let stream = RawStream::unnamed(c.channels, c.values.clone(), 50.0, Some(c.labels.clone())).unwrap();
        let t = stream.samples();
        let windows = segment(&stream, 0, c.window, c.stride).unwrap();
        let mut starts = Vec::new();
        let mut s = 0;
        while s + c.window <= t {
            starts.push(s);
            s += c.stride;
        }
        prop_assert_eq!(windows.len(), starts.len());
        prop_assert_eq!(window_count(t, c.window, c.stride), starts.len());
        for (w, &start) in windows.iter().zip(&starts) {
            prop_assert_eq!(w.span.start as usize, start);
            for ch in 0..c.channels {
                prop_assert_eq!(w.channel(ch), &c.values[ch * t + start..ch * t + start + c.window]);
            }
        }
        if windows.is_empty() {
            return Ok(());
        }
        let stats = match NormalizerStats::fit_windows(&windows, "train") {
            Ok(s) => s,
            // a constant channel cannot be scaled; the error names it
            Err(guided_gan_core::Error::DegenerateChannel { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for w in &windows {
            let n = stats.apply(w).unwrap();
            prop_assert!(n.values.iter().all(|v| (-1.0..=1.0).contains(v)));
            let back = stats.invert(&n).unwrap();
            for (a, b) in back.values.iter().zip(&w.values) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "round trip {} vs {}", a, b);
            }
        }
        for ch in 0..c.channels {
            let all: Vec<f64> = windows.iter().flat_map(|w| stats.apply(w).unwrap().channel(ch).to_vec()).collect();
            let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12, "range [{}, {}]", lo, hi);
        }
        Ok(())
    })?;
    Ok(format!("{cases} random streams: counts, values, [-1, 1] range and round trip hold"))
}

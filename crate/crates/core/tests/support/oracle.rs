//! Straight-line scalar re-implementations used as test oracles.
//!
//! Nothing here calls back into the library's numerics: every gate, product
//! and loss is written out element by element with the standard library's
//! `exp`, `ln` and `tanh`.

use guided_gan_core::frameworks::{FrameworkConfig, FrameworkId, GeneratorLoss, ModelBundle, ReconReduction};
use guided_gan_core::netcore::{DataDiscriminator, Encoder, Generator, JointDiscriminator, Linear, Lstm};
use guided_gan_core::tensor::{Matrix, SeqBatch};

pub fn sigma(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `xs[t]` is the input at step `t`; returns the hidden state at every step.
pub fn lstm(l: &Lstm<f64>, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let h = l.w_hh.shape[1];
    let i_dim = l.w_ih.shape[1];
    let (mut hs, mut c) = (vec![0.0; h], vec![0.0; h]);
    let mut out = Vec::new();
    for x in xs {
        let mut a = vec![0.0; 4 * h];
        for k in 0..4 * h {
            a[k] = l.b_ih.data[k] + l.b_hh.data[k];
            for i in 0..i_dim {
                a[k] += l.w_ih.data[k * i_dim + i] * x[i];
            }
            for j in 0..h {
                a[k] += l.w_hh.data[k * h + j] * hs[j];
            }
        }
        let mut next = vec![0.0; h];
        for j in 0..h {
            let ig = sigma(a[j]);
            let fg = sigma(a[h + j]);
            let gg = a[2 * h + j].tanh();
            let og = sigma(a[3 * h + j]);
            c[j] = fg * c[j] + ig * gg;
            next[j] = og * c[j].tanh();
        }
        hs = next;
        out.push(hs.clone());
    }
    out
}

pub fn linear(l: &Linear<f64>, x: &[f64]) -> Vec<f64> {
    let (o, i) = (l.weight.shape[0], l.weight.shape[1]);
    (0..o).map(|r| l.bias.data[r] + (0..i).map(|c| l.weight.data[r * i + c] * x[c]).sum::<f64>()).collect()
}

/// Sample `b` of a batch as `[t][d]`.
pub fn sample(x: &SeqBatch<f64>, b: usize) -> Vec<Vec<f64>> {
    (0..x.steps).map(|t| (0..x.dim).map(|d| x.get(t, b, d)).collect()).collect()
}

pub fn generator(g: &Generator<f64>, z: &[f64], steps: usize) -> Vec<Vec<f64>> {
    let hs = lstm(&g.lstm, &vec![z.to_vec(); steps]);
    hs.iter().map(|h| linear(&g.head, h).into_iter().map(f64::tanh).collect()).collect()
}

pub fn encoder(e: &Encoder<f64>, x: &[Vec<f64>]) -> Vec<f64> {
    let hs = lstm(&e.lstm, x);
    linear(&e.head, hs.last().unwrap())
}

pub fn data_disc(d: &DataDiscriminator<f64>, x: &[Vec<f64>]) -> Vec<f64> {
    lstm(&d.lstm, x).iter().map(|h| linear(&d.head, h)[0]).collect()
}

pub fn joint_disc(d: &JointDiscriminator<f64>, x: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let p = linear(&d.project, z);
    lstm(&d.lstm, x)
        .iter()
        .map(|h| {
            let mut cat = h.clone();
            cat.extend_from_slice(&p);
            linear(&d.head, &cat)[0]
        })
        .collect()
}

fn flat(x: &[Vec<f64>]) -> Vec<f64> {
    x.iter().flatten().copied().collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn abs_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Expected loss values for one batch.
#[derive(Debug, Default, Clone, Copy)]
pub struct Expected {
    pub d_loss: Option<f64>,
    pub g_loss: Option<f64>,
    pub e_loss: Option<f64>,
    pub recon_x: Option<f64>,
    pub recon_z: Option<f64>,
    pub kl: Option<f64>,
    pub ce: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `-ln σ(l)` averaged over all batch/time logits.
fn real_term(logits: &[Vec<f64>]) -> f64 {
    mean(&logits.iter().flatten().map(|&l| -sigma(l).ln()).collect::<Vec<_>>())
}

/// `-ln(1 - σ(l))` averaged over all batch/time logits.
fn fake_term(logits: &[Vec<f64>]) -> f64 {
    mean(&logits.iter().flatten().map(|&l| -(1.0 - sigma(l)).ln()).collect::<Vec<_>>())
}

fn fool(logits: &[Vec<f64>], kind: GeneratorLoss) -> f64 {
    match kind {
        GeneratorLoss::NonSaturating => real_term(logits),
        GeneratorLoss::Minimax => -fake_term(logits),
    }
}

pub struct Inputs<'a> {
    pub x: &'a SeqBatch<f64>,
    pub z: &'a Matrix<f64>,
    pub eps: &'a Matrix<f64>,
    pub labels: &'a [usize],
}

pub fn losses(bundle: &ModelBundle<f64>, cfg: &FrameworkConfig, inp: &Inputs<'_>) -> Expected {
    let (w, n) = (inp.x.steps, inp.x.batch);
    let xs: Vec<Vec<Vec<f64>>> = (0..n).map(|b| sample(inp.x, b)).collect();
    let zs: Vec<Vec<f64>> = (0..n).map(|b| inp.z.row(b).to_vec()).collect();
    let per_x = |v: f64| match cfg.recon_reduction {
        ReconReduction::Sum => v,
        ReconReduction::Mean => v / (inp.x.dim * w) as f64,
    };
    let per_z = |v: f64, l: usize| match cfg.recon_reduction {
        ReconReduction::Sum => v,
        ReconReduction::Mean => v / l as f64,
    };
    let mut e = Expected::default();
    match bundle.framework {
        FrameworkId::Rgan | FrameworkId::Rfaae => {
            let g = bundle.generator.as_ref().unwrap();
            let d = bundle.data_discriminator().unwrap();
            let fakes: Vec<_> = zs.iter().map(|z| generator(g, z, w)).collect();
            let lr: Vec<_> = xs.iter().map(|x| data_disc(d, x)).collect();
            let lf: Vec<_> = fakes.iter().map(|x| data_disc(d, x)).collect();
            e.d_loss = Some(real_term(&lr) + fake_term(&lf));
            let adv = fool(&lf, cfg.generator_loss);
            e.g_loss = Some(adv);
            if bundle.framework == FrameworkId::Rfaae {
                let enc = bundle.encoder.as_ref().unwrap();
                let rz = mean(
                    &fakes.iter().zip(&zs).map(|(f, z)| per_z(sq_dist(&encoder(enc, f), z), z.len())).collect::<Vec<_>>(),
                );
                let mut e_loss = rz;
                if cfg.faae_adversarial_encoder {
                    let l2: Vec<_> = xs.iter().map(|x| data_disc(d, &generator(g, &encoder(enc, x), w))).collect();
                    e_loss += fool(&l2, cfg.generator_loss);
                }
                e.recon_z = Some(rz);
                e.e_loss = Some(e_loss);
                e.g_loss = Some(adv + e_loss);
            }
        }
        FrameworkId::Rbigan | FrameworkId::GuidedGan => {
            let g = bundle.generator.as_ref().unwrap();
            let enc = bundle.encoder.as_ref().unwrap();
            let d = bundle.joint_discriminator().unwrap();
            let ezs: Vec<_> = xs.iter().map(|x| encoder(enc, x)).collect();
            let fakes: Vec<_> = zs.iter().map(|z| generator(g, z, w)).collect();
            let lr: Vec<_> = xs.iter().zip(&ezs).map(|(x, ez)| joint_disc(d, x, ez)).collect();
            let lf: Vec<_> = fakes.iter().zip(&zs).map(|(x, z)| joint_disc(d, x, z)).collect();
            let d_loss = real_term(&lr) + fake_term(&lf);
            e.d_loss = Some(d_loss);
            let mut total = match cfg.generator_loss {
                GeneratorLoss::NonSaturating => fake_term(&lr) + real_term(&lf),
                GeneratorLoss::Minimax => -d_loss,
            };
            let (lx, lz) = if bundle.framework == FrameworkId::GuidedGan { (cfg.lambda_x, cfg.lambda_z) } else { (0.0, 0.0) };
            if lx > 0.0 {
                let rx = mean(
                    &xs.iter().zip(&ezs).map(|(x, ez)| per_x(sq_dist(&flat(&generator(g, ez, w)), &flat(x)))).collect::<Vec<_>>(),
                );
                total += lx * rx;
                e.recon_x = Some(rx);
            }
            if lz > 0.0 {
                let rz = mean(
                    &fakes.iter().zip(&zs).map(|(f, z)| per_z(sq_dist(&encoder(enc, f), z), z.len())).collect::<Vec<_>>(),
                );
                total += lz * rz;
                e.recon_z = Some(rz);
            }
            e.g_loss = Some(total);
            e.e_loss = Some(total);
        }
        FrameworkId::RaeL1 | FrameworkId::RaeL2 => {
            let g = bundle.generator.as_ref().unwrap();
            let enc = bundle.encoder.as_ref().unwrap();
            let r = mean(
                &xs.iter()
                    .map(|x| {
                        let rec = flat(&generator(g, &encoder(enc, x), w));
                        per_x(if bundle.framework == FrameworkId::RaeL1 {
                            abs_dist(&rec, &flat(x))
                        } else {
                            sq_dist(&rec, &flat(x))
                        })
                    })
                    .collect::<Vec<_>>(),
            );
            e.g_loss = Some(r);
            e.e_loss = Some(r);
            e.recon_x = Some(r);
        }
        FrameworkId::M2v => {
            let g = bundle.generator.as_ref().unwrap();
            let enc = bundle.encoder.as_ref().unwrap();
            let l = bundle.dims.latent;
            let (mut rec, mut kl) = (0.0, 0.0);
            for (b, x) in xs.iter().enumerate() {
                let head = encoder(enc, x);
                let (mu, lv) = head.split_at(l);
                let z: Vec<f64> = (0..l).map(|k| mu[k] + (0.5 * lv[k]).exp() * inp.eps.get(b, k)).collect();
                rec += per_x(sq_dist(&flat(&generator(g, &z, w)), &flat(x)));
                kl += (0..l).map(|k| 0.5 * (lv[k].exp() + mu[k] * mu[k] - 1.0 - lv[k])).sum::<f64>();
            }
            let (rec, kl) = (rec / n as f64, kl / n as f64);
            e.recon_x = Some(rec);
            e.kl = Some(kl);
            e.g_loss = Some(rec + kl);
            e.e_loss = Some(rec + kl);
        }
        FrameworkId::Sup => {
            let enc = bundle.encoder.as_ref().unwrap();
            let head = bundle.classifier.as_ref().unwrap();
            let ce = mean(
                &xs.iter()
                    .zip(inp.labels)
                    .map(|(x, &y)| {
                        let logits = linear(head, &encoder(enc, x));
                        let z: f64 = logits.iter().map(|v| v.exp()).sum();
                        -(logits[y].exp() / z).ln()
                    })
                    .collect::<Vec<_>>(),
            );
            e.ce = Some(ce);
            e.e_loss = Some(ce);
        }
        FrameworkId::Rand => {}
    }
    e
}

//! Recurrent building blocks: generator, encoder, data-space and joint
//! data-latent discriminators, each a single-layer LSTM plus linear heads.

mod blocks;
mod linear;
mod lstm;
mod module;

pub use blocks::{
    scores, DataDiscriminator, DiscriminatorTrace, Encoder, EncoderTrace, Generator, GeneratorTrace, HiddenPooling,
    JointDiscriminator, JointTrace,
};
pub use linear::Linear;
pub use lstm::{Lstm, LstmInit, LstmInput, LstmState};
pub use module::Module;

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::datapipe::{SequenceWindow, SourceSpan};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{Matrix, Real, SeqBatch};

pub(crate) use lstm::sigmoid;

/// Network sizes shared by all blocks of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelDims {
    /// D
    pub channels: usize,
    /// W
    pub steps: usize,
    /// L
    pub latent: usize,
    pub hidden: usize,
    /// Width of the latent projection inside the joint discriminator.
    pub projection: usize,
}

impl ModelDims {
    pub fn new(channels: usize, steps: usize) -> Self {
        Self { channels, steps, latent: 100, hidden: 100, projection: 100 }
    }
}

/// One latent code.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector<T> {
    pub values: Vec<T>,
}

/// Per-timestep probabilities from a discriminator, each in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSequence<T> {
    pub scores: Vec<T>,
}

/// `n × latent` standard-normal draws.
pub fn sample_prior<T: Real>(n: usize, latent: usize, rng: &mut Rng) -> Matrix<T> {
    let data = (0..n * latent)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            T::from_f64_lossy(v)
        })
        .collect();
    Matrix { rows: n, cols: latent, data }
}

pub fn sample_prior_vectors<T: Real>(n: usize, latent: usize, rng: &mut Rng) -> Vec<LatentVector<T>> {
    let m = sample_prior::<T>(n, latent, rng);
    (0..n).map(|r| LatentVector { values: m.row(r).to_vec() }).collect()
}

fn latent_matrix<T: Real>(z: &LatentVector<T>) -> Matrix<T> {
    Matrix { rows: 1, cols: z.values.len(), data: z.values.clone() }
}

fn window_batch<T: Real>(x: &SequenceWindow) -> Result<SeqBatch<T>> {
    SeqBatch::from_windows([x.values.as_slice()], x.channels, x.steps)
}

/// Single-sample generator pass producing a `channels × steps` window.
pub fn generator_forward<T: Real>(gen: &Generator<T>, z: &LatentVector<T>, steps: usize) -> Result<SequenceWindow> {
    if z.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("latent contains non-finite values".into()));
    }
    let trace = gen.forward(&latent_matrix(z), steps)?;
    Ok(SequenceWindow {
        channels: gen.channels(),
        steps,
        values: trace.output.window(0),
        label: None,
        span: SourceSpan { stream: 0, start: 0 },
    })
}

pub fn encoder_forward<T: Real>(enc: &Encoder<T>, x: &SequenceWindow) -> Result<LatentVector<T>> {
    let trace = enc.forward(&window_batch(x)?)?;
    Ok(LatentVector { values: trace.output.data })
}

pub fn disc_data_forward<T: Real>(disc: &DataDiscriminator<T>, x: &SequenceWindow) -> Result<ScoreSequence<T>> {
    let trace = disc.forward(&window_batch(x)?)?;
    Ok(ScoreSequence { scores: scores(&trace.logits).data })
}

pub fn disc_joint_forward<T: Real>(
    disc: &JointDiscriminator<T>,
    x: &SequenceWindow,
    z: &LatentVector<T>,
) -> Result<ScoreSequence<T>> {
    let trace = disc.forward(&window_batch(x)?, &latent_matrix(z))?;
    Ok(ScoreSequence { scores: scores(&trace.logits).data })
}

//! Generator, encoder and the two discriminator variants.
//!
//! Every block works on whole batches. `forward` returns a trace holding the
//! output plus whatever the matching `backward` needs; `backward` accumulates
//! parameter gradients into an optional same-shaped block and returns input
//! gradients on request.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::linear::Linear;
use super::lstm::{sigmoid, tanh_in_place, Lstm, LstmInit, LstmInput, LstmState};
use super::module::{join, Module};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{Matrix, Real, SeqBatch, Tensor};

fn check_finite<T: Real>(data: &[T], what: &str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// Maps a latent, replicated over time, to a `channels × steps` sequence in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T> {
    pub lstm: Lstm<T>,
    pub head: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct GeneratorTrace<T> {
    state: LstmState<T>,
    pub output: SeqBatch<T>,
}

impl<T: Real> Generator<T> {
    pub fn new(latent: usize, hidden: usize, channels: usize, init: LstmInit, rng: &mut Rng) -> Self {
        Self { lstm: Lstm::new(latent, hidden, init, rng), head: Linear::new(hidden, channels, rng) }
    }

    pub fn latent_dim(&self) -> usize {
        self.lstm.input_dim()
    }

    pub fn channels(&self) -> usize {
        self.head.output_dim()
    }

    pub fn forward(&self, z: &Matrix<T>, steps: usize) -> Result<GeneratorTrace<T>> {
        if z.cols != self.latent_dim() {
            return Err(Error::Shape(format!("latent has {} dims, generator expects {}", z.cols, self.latent_dim())));
        }
        check_finite(&z.data, "generator latent input")?;
        let batch = z.rows;
        let state = self.lstm.forward(LstmInput::Repeated(&z.data), steps, batch);
        let mut out = self.head.forward(state.hidden(), steps * batch);
        tanh_in_place(&mut out);
        let output = SeqBatch { steps, batch, dim: self.channels(), data: out };
        Ok(GeneratorTrace { state, output })
    }

    /// Returns `dL/dz`.
    pub fn backward(&self, z: &Matrix<T>, trace: &GeneratorTrace<T>, d_out: &SeqBatch<T>, mut grads: Option<&mut Self>) -> Matrix<T> {
        let rows = trace.output.steps * trace.output.batch;
        let d_pre: Vec<T> = d_out
            .data
            .iter()
            .zip(&trace.output.data)
            .map(|(&d, &y)| d * (T::one() - y * y))
            .collect();
        let d_hidden = self
            .head
            .backward(trace.state.hidden(), rows, &d_pre, grads.as_deref_mut().map(|g| &mut g.head), true)
            .expect("requested");
        let dz = self
            .lstm
            .backward(LstmInput::Repeated(&z.data), &trace.state, &d_hidden, grads.map(|g| &mut g.lstm), true)
            .expect("requested");
        Matrix { rows: z.rows, cols: z.cols, data: dz }
    }
}

impl<T: Real> Module<T> for Generator<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        self.lstm.visit(&join(prefix, "lstm"), f);
        self.head.visit(&join(prefix, "head"), f);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        self.lstm.visit_mut(f);
        self.head.visit_mut(f);
    }
}

/// Reads a sequence and regresses a latent from the final hidden state (no squashing).
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder<T> {
    pub lstm: Lstm<T>,
    pub head: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct EncoderTrace<T> {
    state: LstmState<T>,
    pub output: Matrix<T>,
}

impl<T: Real> EncoderTrace<T> {
    pub fn final_hidden(&self) -> &[T] {
        self.state.last_hidden()
    }
}

impl<T: Real> Encoder<T> {
    /// `output` is the latent width, or twice it for a Gaussian (mean, log-variance) head.
    pub fn new(channels: usize, hidden: usize, output: usize, init: LstmInit, rng: &mut Rng) -> Self {
        Self { lstm: Lstm::new(channels, hidden, init, rng), head: Linear::new(hidden, output, rng) }
    }

    pub fn channels(&self) -> usize {
        self.lstm.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.head.output_dim()
    }

    pub fn forward(&self, x: &SeqBatch<T>) -> Result<EncoderTrace<T>> {
        if x.dim != self.channels() || x.steps == 0 {
            return Err(Error::Shape(format!(
                "encoder expects {} channels, got {}×{} input",
                self.channels(),
                x.dim,
                x.steps
            )));
        }
        let state = self.lstm.forward(LstmInput::Sequence(&x.data), x.steps, x.batch);
        let out = self.head.forward(state.last_hidden(), x.batch);
        let output = Matrix { rows: x.batch, cols: self.output_dim(), data: out };
        Ok(EncoderTrace { state, output })
    }

    pub fn backward(
        &self,
        x: &SeqBatch<T>,
        trace: &EncoderTrace<T>,
        d_out: &Matrix<T>,
        mut grads: Option<&mut Self>,
        want_dx: bool,
    ) -> Option<SeqBatch<T>> {
        let h = self.lstm.hidden_dim();
        let d_last = self
            .head
            .backward(trace.state.last_hidden(), x.batch, &d_out.data, grads.as_deref_mut().map(|g| &mut g.head), true)
            .expect("requested");
        let mut d_hidden = vec![T::zero(); x.steps * x.batch * h];
        d_hidden[(x.steps - 1) * x.batch * h..].copy_from_slice(&d_last);
        let needs_lstm = want_dx || grads.is_some();
        if !needs_lstm {
            return None;
        }
        self.lstm
            .backward(LstmInput::Sequence(&x.data), &trace.state, &d_hidden, grads.map(|g| &mut g.lstm), want_dx)
            .map(|dx| SeqBatch { steps: x.steps, batch: x.batch, dim: x.dim, data: dx })
    }
}

impl<T: Real> Module<T> for Encoder<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        self.lstm.visit(&join(prefix, "lstm"), f);
        self.head.visit(&join(prefix, "head"), f);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        self.lstm.visit_mut(f);
        self.head.visit_mut(f);
    }
}

/// Per-timestep real/fake logits over the data space.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDiscriminator<T> {
    pub lstm: Lstm<T>,
    pub head: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct DiscriminatorTrace<T> {
    state: LstmState<T>,
    /// `steps × batch`
    pub logits: Matrix<T>,
}

impl<T: Real> DiscriminatorTrace<T> {
    pub fn hidden(&self) -> &[T] {
        self.state.hidden()
    }

    pub fn last_hidden(&self) -> &[T] {
        self.state.last_hidden()
    }
}

/// How per-timestep hidden states are pooled into one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenPooling {
    #[default]
    Final,
    Mean,
}

impl<T: Real> DataDiscriminator<T> {
    pub fn new(channels: usize, hidden: usize, init: LstmInit, rng: &mut Rng) -> Self {
        Self { lstm: Lstm::new(channels, hidden, init, rng), head: Linear::new(hidden, 1, rng) }
    }

    pub fn channels(&self) -> usize {
        self.lstm.input_dim()
    }

    pub fn forward(&self, x: &SeqBatch<T>) -> Result<DiscriminatorTrace<T>> {
        if x.dim != self.channels() || x.steps == 0 {
            return Err(Error::Shape(format!("discriminator expects {} channels, got {}", self.channels(), x.dim)));
        }
        let state = self.lstm.forward(LstmInput::Sequence(&x.data), x.steps, x.batch);
        let logits = self.head.forward(state.hidden(), x.steps * x.batch);
        Ok(DiscriminatorTrace { state, logits: Matrix { rows: x.steps, cols: x.batch, data: logits } })
    }

    pub fn backward(
        &self,
        x: &SeqBatch<T>,
        trace: &DiscriminatorTrace<T>,
        d_logits: &Matrix<T>,
        mut grads: Option<&mut Self>,
        want_dx: bool,
    ) -> Option<SeqBatch<T>> {
        let rows = x.steps * x.batch;
        let d_hidden = self
            .head
            .backward(trace.state.hidden(), rows, &d_logits.data, grads.as_deref_mut().map(|g| &mut g.head), true)
            .expect("requested");
        if !want_dx && grads.is_none() {
            return None;
        }
        self.lstm
            .backward(LstmInput::Sequence(&x.data), &trace.state, &d_hidden, grads.map(|g| &mut g.lstm), want_dx)
            .map(|dx| SeqBatch { steps: x.steps, batch: x.batch, dim: x.dim, data: dx })
    }

    /// Penultimate (hidden-state) features, `batch × hidden`.
    pub fn features(&self, x: &SeqBatch<T>, pooling: HiddenPooling) -> Result<Matrix<T>> {
        let trace = self.forward(x)?;
        Ok(pool_hidden(&trace.state, self.lstm.hidden_dim(), pooling))
    }
}

fn pool_hidden<T: Real>(state: &LstmState<T>, h: usize, pooling: HiddenPooling) -> Matrix<T> {
    let batch = state.batch;
    match pooling {
        HiddenPooling::Final => Matrix { rows: batch, cols: h, data: state.last_hidden().to_vec() },
        HiddenPooling::Mean => {
            let mut m = Matrix::zeros(batch, h);
            let scale = T::one() / T::from_usize(state.steps).expect("small");
            for t in 0..state.steps {
                for (acc, &v) in m.data.iter_mut().zip(state.hidden_at(t)) {
                    *acc += v * scale;
                }
            }
            m
        }
    }
}

impl<T: Real> Module<T> for DataDiscriminator<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        self.lstm.visit(&join(prefix, "lstm"), f);
        self.head.visit(&join(prefix, "head"), f);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        self.lstm.visit_mut(f);
        self.head.visit_mut(f);
    }
}

/// Per-timestep logits over (data, latent) pairs: the data stream's hidden
/// states are concatenated with a linear projection of the latent, replicated
/// over time, before a shared linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiscriminator<T> {
    pub lstm: Lstm<T>,
    pub project: Linear<T>,
    /// Input is `[hidden ; projection]`.
    pub head: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct JointTrace<T> {
    state: LstmState<T>,
    concat: Vec<T>,
    /// `steps × batch`
    pub logits: Matrix<T>,
}

impl<T: Real> JointDiscriminator<T> {
    pub fn new(channels: usize, latent: usize, hidden: usize, projection: usize, init: LstmInit, rng: &mut Rng) -> Self {
        Self {
            lstm: Lstm::new(channels, hidden, init, rng),
            project: Linear::new(latent, projection, rng),
            head: Linear::new(hidden + projection, 1, rng),
        }
    }

    pub fn channels(&self) -> usize {
        self.lstm.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.project.input_dim()
    }

    pub fn forward(&self, x: &SeqBatch<T>, z: &Matrix<T>) -> Result<JointTrace<T>> {
        if x.dim != self.channels() || z.cols != self.latent_dim() || z.rows != x.batch || x.steps == 0 {
            return Err(Error::Shape(format!(
                "joint discriminator expects ({} channels, {} latent) pairs, got ({}, {}) with batches {} / {}",
                self.channels(),
                self.latent_dim(),
                x.dim,
                z.cols,
                x.batch,
                z.rows
            )));
        }
        let (steps, batch) = (x.steps, x.batch);
        let h = self.lstm.hidden_dim();
        let p = self.project.output_dim();
        let state = self.lstm.forward(LstmInput::Sequence(&x.data), steps, batch);
        let projected = self.project.forward(&z.data, batch);
        let width = h + p;
        let mut concat = vec![T::zero(); steps * batch * width];
        for t in 0..steps {
            for b in 0..batch {
                let row = &mut concat[(t * batch + b) * width..(t * batch + b + 1) * width];
                row[..h].copy_from_slice(&state.hidden()[(t * batch + b) * h..(t * batch + b + 1) * h]);
                row[h..].copy_from_slice(&projected[b * p..(b + 1) * p]);
            }
        }
        let logits = self.head.forward(&concat, steps * batch);
        Ok(JointTrace { state, concat, logits: Matrix { rows: steps, cols: batch, data: logits } })
    }

    /// Returns `(dL/dx, dL/dz)` for the requested sides.
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        x: &SeqBatch<T>,
        z: &Matrix<T>,
        trace: &JointTrace<T>,
        d_logits: &Matrix<T>,
        mut grads: Option<&mut Self>,
        want_dx: bool,
        want_dz: bool,
    ) -> (Option<SeqBatch<T>>, Option<Matrix<T>>) {
        let (steps, batch) = (x.steps, x.batch);
        let h = self.lstm.hidden_dim();
        let p = self.project.output_dim();
        let width = h + p;
        let d_concat = self
            .head
            .backward(&trace.concat, steps * batch, &d_logits.data, grads.as_deref_mut().map(|g| &mut g.head), true)
            .expect("requested");
        let mut d_hidden = vec![T::zero(); steps * batch * h];
        let mut d_proj = vec![T::zero(); batch * p];
        for t in 0..steps {
            for b in 0..batch {
                let row = &d_concat[(t * batch + b) * width..(t * batch + b + 1) * width];
                d_hidden[(t * batch + b) * h..(t * batch + b + 1) * h].copy_from_slice(&row[..h]);
                for (acc, &d) in d_proj[b * p..(b + 1) * p].iter_mut().zip(&row[h..]) {
                    *acc += d;
                }
            }
        }
        let dz = if want_dz || grads.is_some() {
            self.project
                .backward(&z.data, batch, &d_proj, grads.as_deref_mut().map(|g| &mut g.project), want_dz)
                .map(|d| Matrix { rows: batch, cols: z.cols, data: d })
        } else {
            None
        };
        let dx = if want_dx || grads.is_some() {
            self.lstm
                .backward(LstmInput::Sequence(&x.data), &trace.state, &d_hidden, grads.map(|g| &mut g.lstm), want_dx)
                .map(|d| SeqBatch { steps, batch, dim: x.dim, data: d })
        } else {
            None
        };
        (dx, dz)
    }

    pub fn features(&self, x: &SeqBatch<T>, pooling: HiddenPooling) -> Result<Matrix<T>> {
        let state = self.lstm.forward(LstmInput::Sequence(&x.data), x.steps, x.batch);
        Ok(pool_hidden(&state, self.lstm.hidden_dim(), pooling))
    }
}

impl<T: Real> Module<T> for JointDiscriminator<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        self.lstm.visit(&join(prefix, "lstm"), f);
        self.project.visit(&join(prefix, "project"), f);
        self.head.visit(&join(prefix, "head"), f);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        self.lstm.visit_mut(f);
        self.project.visit_mut(f);
        self.head.visit_mut(f);
    }
}

/// Logistic squashing of a logit matrix.
pub fn scores<T: Real>(logits: &Matrix<T>) -> Matrix<T> {
    Matrix { rows: logits.rows, cols: logits.cols, data: logits.data.iter().map(|&l| sigmoid(l)).collect() }
}

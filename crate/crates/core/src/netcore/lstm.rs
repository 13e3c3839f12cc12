//! Single-layer gated recurrent memory cell (LSTM) with backpropagation through time.
//!
//! Gate layout follows the common `[input, forget, cell, output]` ordering with
//! separate input-side and recurrent-side bias vectors, so parameter counts
//! match the usual framework convention of `4H(I + H) + 8H`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::module::{join, Module};
use crate::rng::Rng;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Real, Tensor};

/// Initialisation choices for recurrent cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmInit {
    pub forget_bias: f64,
    pub orthogonal_recurrent: bool,
}

impl Default for LstmInit {
    fn default() -> Self {
        Self { forget_bias: 1.0, orthogonal_recurrent: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<T> {
    /// `4H × I`
    pub w_ih: Tensor<T>,
    /// `4H × H`
    pub w_hh: Tensor<T>,
    pub b_ih: Tensor<T>,
    pub b_hh: Tensor<T>,
}

/// What the cell reads at each step.
#[derive(Debug, Clone, Copy)]
pub enum LstmInput<'a, T> {
    /// Time-major `steps × batch × I`.
    Sequence(&'a [T]),
    /// One `batch × I` input fed at every step.
    Repeated(&'a [T]),
}

/// Activations recorded by a forward pass, all time-major.
#[derive(Debug, Clone)]
pub struct LstmState<T> {
    pub steps: usize,
    pub batch: usize,
    /// Post-activation gates, `steps × batch × 4H`.
    gates: Vec<T>,
    cells: Vec<T>,
    /// `tanh` of every cell state.
    cell_tanh: Vec<T>,
    hidden: Vec<T>,
}

impl<T: Real> LstmState<T> {
    /// All hidden states, `steps × batch × H`.
    pub fn hidden(&self) -> &[T] {
        &self.hidden
    }

    pub fn hidden_at(&self, t: usize) -> &[T] {
        let n = self.hidden.len() / self.steps;
        &self.hidden[t * n..(t + 1) * n]
    }

    pub fn last_hidden(&self) -> &[T] {
        self.hidden_at(self.steps - 1)
    }
}

/// `1 / (1 + e^-x)`; saturates cleanly to 0 or 1 when the exponential overflows.
#[inline]
pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `1 - 2 / (e^2x + 1)`, several times cheaper than the library `tanh`.
pub(crate) fn tanh_in_place<T: Real>(xs: &mut [T]) {
    let (one, two) = (T::one(), T::one() + T::one());
    xs.iter_mut().for_each(|v| *v = *v + *v);
    T::exp_in_place(xs);
    xs.iter_mut().for_each(|v| *v = one - two / (*v + one));
}

fn orthogonal_block(n: usize, rng: &mut Rng) -> Vec<f64> {
    // modified Gram-Schmidt on the rows of a Gaussian matrix
    let mut m: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
    for i in 0..n {
        for j in 0..i {
            let dot: f64 = (0..n).map(|k| m[i * n + k] * m[j * n + k]).sum();
            for k in 0..n {
                m[i * n + k] -= dot * m[j * n + k];
            }
        }
        let norm = num_traits::Float::sqrt((0..n).map(|k| m[i * n + k] * m[i * n + k]).sum::<f64>());
        for k in 0..n {
            m[i * n + k] /= norm;
        }
    }
    m
}

impl<T: Real> Lstm<T> {
    pub fn new(input: usize, hidden: usize, init: LstmInit, rng: &mut Rng) -> Self {
        let h4 = 4 * hidden;
        let bound = 1.0 / num_traits::Float::sqrt(input.max(1) as f64);
        let w_ih = (0..h4 * input)
            .map(|_| T::from_f64_lossy(rng.random_range(-bound..=bound)))
            .collect();
        let w_hh: Vec<T> = if init.orthogonal_recurrent {
            let mut w = Vec::with_capacity(h4 * hidden);
            for _ in 0..4 {
                w.extend(orthogonal_block(hidden, rng).into_iter().map(T::from_f64_lossy));
            }
            w
        } else {
            let rb = 1.0 / num_traits::Float::sqrt(hidden.max(1) as f64);
            (0..h4 * hidden).map(|_| T::from_f64_lossy(rng.random_range(-rb..=rb))).collect()
        };
        let mut b_ih = Tensor::zeros(&[h4]);
        for j in hidden..2 * hidden {
            b_ih.data[j] = T::from_f64_lossy(init.forget_bias);
        }
        Self {
            w_ih: Tensor { shape: vec![h4, input], data: w_ih },
            w_hh: Tensor { shape: vec![h4, hidden], data: w_hh },
            b_ih,
            b_hh: Tensor::zeros(&[h4]),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.shape[1]
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_hh.shape[1]
    }

    /// Runs the cell from a zero initial state.
    pub fn forward(&self, input: LstmInput<'_, T>, steps: usize, batch: usize) -> LstmState<T> {
        let (i_dim, h) = (self.input_dim(), self.hidden_dim());
        let h4 = 4 * h;
        let per_step = batch * h4;
        let mut gates = vec![T::zero(); steps * per_step];
        match input {
            LstmInput::Sequence(x) => {
                debug_assert_eq!(x.len(), steps * batch * i_dim);
                gemm_nt(x, steps * batch, i_dim, &self.w_ih.data, h4, &mut gates, false);
            }
            LstmInput::Repeated(x) => {
                debug_assert_eq!(x.len(), batch * i_dim);
                let mut proj = vec![T::zero(); per_step];
                gemm_nt(x, batch, i_dim, &self.w_ih.data, h4, &mut proj, false);
                for t in 0..steps {
                    gates[t * per_step..(t + 1) * per_step].copy_from_slice(&proj);
                }
            }
        }
        for row in gates.chunks_exact_mut(h4) {
            for (j, g) in row.iter_mut().enumerate() {
                *g += self.b_ih.data[j] + self.b_hh.data[j];
            }
        }

        let mut cells = vec![T::zero(); steps * batch * h];
        let mut cell_tanh = vec![T::zero(); steps * batch * h];
        let mut hidden = vec![T::zero(); steps * batch * h];
        let (one, two) = (T::one(), T::one() + T::one());
        let scale: Vec<T> = (0..h4).map(|j| if (2 * h..3 * h).contains(&j) { two } else { -one }).collect();
        for t in 0..steps {
            let g_t = &mut gates[t * per_step..(t + 1) * per_step];
            if t > 0 {
                let h_prev = &hidden[(t - 1) * batch * h..t * batch * h];
                gemm_nt(h_prev, batch, h, &self.w_hh.data, h4, g_t, true);
            }
            // sigmoid gates read e^-x, the cell gate e^2x
            for row in g_t.chunks_exact_mut(h4) {
                for (v, &s) in row.iter_mut().zip(&scale) {
                    *v *= s;
                }
            }
            T::exp_in_place(g_t);
            for row in g_t.chunks_exact_mut(h4) {
                let (sig_a, rest) = row.split_at_mut(2 * h);
                let (cell, sig_b) = rest.split_at_mut(h);
                for v in sig_a.iter_mut().chain(sig_b.iter_mut()) {
                    *v = one / (one + *v);
                }
                for v in cell.iter_mut() {
                    *v = one - two / (*v + one);
                }
            }
            let span = t * batch * h..(t + 1) * batch * h;
            for b in 0..batch {
                let row = &g_t[b * h4..(b + 1) * h4];
                for j in 0..h {
                    let idx = (t * batch + b) * h + j;
                    let c_prev = if t > 0 { cells[idx - batch * h] } else { T::zero() };
                    let c = row[h + j] * c_prev + row[j] * row[2 * h + j];
                    cells[idx] = c;
                    cell_tanh[idx] = c + c;
                }
            }
            let tc = &mut cell_tanh[span.clone()];
            T::exp_in_place(tc);
            for v in tc.iter_mut() {
                *v = one - two / (*v + one);
            }
            for b in 0..batch {
                let og = &g_t[b * h4 + 3 * h..(b + 1) * h4];
                let base = span.start + b * h;
                for j in 0..h {
                    hidden[base + j] = og[j] * cell_tanh[base + j];
                }
            }
        }
        LstmState { steps, batch, gates, cells, cell_tanh, hidden }
    }

    /// Backpropagates `d_hidden` (`steps × batch × H`, the loss gradient w.r.t.
    /// every emitted hidden state). Parameter gradients are accumulated into
    /// `grads`; the input gradient has the same form as the forward input.
    pub fn backward(
        &self,
        input: LstmInput<'_, T>,
        state: &LstmState<T>,
        d_hidden: &[T],
        grads: Option<&mut Self>,
        want_dinput: bool,
    ) -> Option<Vec<T>> {
        let (steps, batch) = (state.steps, state.batch);
        let (i_dim, h) = (self.input_dim(), self.hidden_dim());
        let h4 = 4 * h;
        let per_step = batch * h4;
        debug_assert_eq!(d_hidden.len(), steps * batch * h);

        let mut dgates = vec![T::zero(); steps * per_step];
        let mut dh_next = vec![T::zero(); batch * h];
        let mut dc_next = vec![T::zero(); batch * h];
        let one = T::one();
        for t in (0..steps).rev() {
            for b in 0..batch {
                let g = &state.gates[t * per_step + b * h4..t * per_step + (b + 1) * h4];
                let dg = &mut dgates[t * per_step + b * h4..t * per_step + (b + 1) * h4];
                for j in 0..h {
                    let idx = (t * batch + b) * h + j;
                    let dh = d_hidden[idx] + dh_next[b * h + j];
                    let tc = state.cell_tanh[idx];
                    let (ig, fg, cg, og) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                    let d_o = dh * tc;
                    let dc = dh * og * (one - tc * tc) + dc_next[b * h + j];
                    let c_prev = if t > 0 { state.cells[idx - batch * h] } else { T::zero() };
                    dc_next[b * h + j] = dc * fg;
                    dg[j] = dc * cg * ig * (one - ig);
                    dg[h + j] = dc * c_prev * fg * (one - fg);
                    dg[2 * h + j] = dc * ig * (one - cg * cg);
                    dg[3 * h + j] = d_o * og * (one - og);
                }
            }
            if t > 0 {
                let dg_t = &dgates[t * per_step..(t + 1) * per_step];
                gemm_nn(dg_t, batch, h4, &self.w_hh.data, h, &mut dh_next, false);
            }
        }

        let summed_repeated = matches!(input, LstmInput::Repeated(_)).then(|| {
            let mut s = vec![T::zero(); per_step];
            for chunk in dgates.chunks_exact(per_step) {
                for (a, &d) in s.iter_mut().zip(chunk) {
                    *a += d;
                }
            }
            s
        });

        if let Some(g) = grads {
            if steps > 1 {
                // Σ_t dgates_tᵀ h_{t-1} as one product over contiguous rows
                let rows = (steps - 1) * batch;
                gemm_tn(&dgates[per_step..], rows, h4, &state.hidden[..rows * h], h, &mut g.w_hh.data, true);
            }
            for row in dgates.chunks_exact(h4) {
                for j in 0..h4 {
                    g.b_ih.data[j] += row[j];
                    g.b_hh.data[j] += row[j];
                }
            }
            match (input, &summed_repeated) {
                (LstmInput::Sequence(x), _) => {
                    gemm_tn(&dgates, steps * batch, h4, x, i_dim, &mut g.w_ih.data, true);
                }
                (LstmInput::Repeated(x), Some(s)) => {
                    gemm_tn(s, batch, h4, x, i_dim, &mut g.w_ih.data, true);
                }
                (LstmInput::Repeated(_), None) => unreachable!(),
            }
        }

        want_dinput.then(|| match &summed_repeated {
            None => {
                let mut dx = vec![T::zero(); steps * batch * i_dim];
                gemm_nn(&dgates, steps * batch, h4, &self.w_ih.data, i_dim, &mut dx, false);
                dx
            }
            Some(s) => {
                let mut dx = vec![T::zero(); batch * i_dim];
                gemm_nn(s, batch, h4, &self.w_ih.data, i_dim, &mut dx, false);
                dx
            }
        })
    }
}

impl<T: Real> Module<T> for Lstm<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        f(join(prefix, "w_ih"), &self.w_ih);
        f(join(prefix, "w_hh"), &self.w_hh);
        f(join(prefix, "b_ih"), &self.b_ih);
        f(join(prefix, "b_hh"), &self.b_hh);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        f(&mut self.w_ih);
        f(&mut self.w_hh);
        f(&mut self.b_ih);
        f(&mut self.b_hh);
    }
}

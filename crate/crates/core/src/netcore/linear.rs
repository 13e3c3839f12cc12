use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::module::{join, Module};
use crate::rng::Rng;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Real, Tensor};

/// Affine map `y = x Wᵀ + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Real> Linear<T> {
    /// Weights uniform in `±1/sqrt(fan_in)`, zero bias.
    pub fn new(input: usize, output: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / num_traits::Float::sqrt(input.max(1) as f64);
        let weight = (0..input * output)
            .map(|_| T::from_f64_lossy(rng.random_range(-bound..=bound)))
            .collect();
        Self {
            weight: Tensor { shape: vec![output, input], data: weight },
            bias: Tensor::zeros(&[output]),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.shape[1]
    }

    pub fn output_dim(&self) -> usize {
        self.weight.shape[0]
    }

    /// `x` is `rows × in`; returns `rows × out`.
    pub fn forward(&self, x: &[T], rows: usize) -> Vec<T> {
        let (i, o) = (self.input_dim(), self.output_dim());
        debug_assert_eq!(x.len(), rows * i);
        let mut y = vec![T::zero(); rows * o];
        for r in 0..rows {
            y[r * o..(r + 1) * o].copy_from_slice(&self.bias.data);
        }
        gemm_nt(x, rows, i, &self.weight.data, o, &mut y, true);
        y
    }

    /// Accumulates parameter gradients into `grads` and returns `dL/dx` if asked.
    pub fn backward(&self, x: &[T], rows: usize, dy: &[T], grads: Option<&mut Self>, want_dx: bool) -> Option<Vec<T>> {
        let (i, o) = (self.input_dim(), self.output_dim());
        debug_assert_eq!(dy.len(), rows * o);
        if let Some(g) = grads {
            gemm_tn(dy, rows, o, x, i, &mut g.weight.data, true);
            for r in 0..rows {
                for (gb, &d) in g.bias.data.iter_mut().zip(&dy[r * o..(r + 1) * o]) {
                    *gb += d;
                }
            }
        }
        want_dx.then(|| {
            let mut dx = vec![T::zero(); rows * i];
            gemm_nn(dy, rows, o, &self.weight.data, i, &mut dx, false);
            dx
        })
    }
}

impl<T: Real> Module<T> for Linear<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        f(join(prefix, "weight"), &self.weight);
        f(join(prefix, "bias"), &self.bias);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        f(&mut self.weight);
        f(&mut self.bias);
    }
}

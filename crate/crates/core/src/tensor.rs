//! Dense storage types and the matrix-product kernels everything else is built on.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element dtype tag, used by checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

/// Floating point element type of parameters and activations.
///
/// Training runs in `f32`; gradient and loss checks run in `f64`.
pub trait Real:
    Float + NumAssign + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    const DTYPE: DType;

    /// `c = alpha * a * b + beta * c` with explicit row/column strides.
    #[allow(clippy::too_many_arguments)]
    fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        rsa: isize,
        csa: isize,
        b: &[Self],
        rsb: isize,
        csb: isize,
        beta: Self,
        c: &mut [Self],
        rsc: isize,
        csc: isize,
    );

    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Element-wise `e^x` in place.
    fn exp_in_place(xs: &mut [Self]) {
        xs.iter_mut().for_each(|x| *x = x.exp());
    }
}

fn check_extent(len: usize, rows: usize, cols: usize, rs: isize, cs: isize) {
    if rows == 0 || cols == 0 {
        return;
    }
    let last = (rows as isize - 1) * rs + (cols as isize - 1) * cs;
    assert!(rs >= 0 && cs >= 0 && (last as usize) < len, "gemm operand out of bounds");
}

macro_rules! impl_real {
    ($t:ty, $tag:expr, $kernel:path $(, $exp:item)?) => {
        impl Real for $t {
            const DTYPE: DType = $tag;
            $($exp)?

            fn gemm_raw(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                rsa: isize,
                csa: isize,
                b: &[Self],
                rsb: isize,
                csb: isize,
                beta: Self,
                c: &mut [Self],
                rsc: isize,
                csc: isize,
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                check_extent(a.len(), m, k, rsa, csa);
                check_extent(b.len(), k, n, rsb, csb);
                check_extent(c.len(), m, n, rsc, csc);
                // SAFETY: every operand extent was checked against its slice above.
                unsafe {
                    $kernel(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    )
                }
            }

            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }

            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(
    f32,
    DType::F32,
    matrixmultiply::sgemm,
    fn exp_in_place(xs: &mut [f32]) {
        xs.iter_mut().for_each(|x| *x = exp_f32(*x));
    }
);
impl_real!(f64, DType::F64, matrixmultiply::dgemm);

/// Branch-free single-precision `e^x` (Cephes polynomial, about 2 ulp) that
/// the compiler can vectorise. Inputs are clamped so the result saturates to
/// `+inf` above ~88.7 and to the smallest normal below ~-87.3.
#[inline(always)]
fn exp_f32(x: f32) -> f32 {
    const ROUND: f32 = 12_582_912.0; // 1.5 · 2^23
    let x = x.clamp(-87.3, 88.7);
    let t = x * core::f32::consts::LOG2_E + ROUND;
    let n = t - ROUND;
    let r = x - n * 0.693_359_4 + n * 2.121_944_4e-4;
    let mut p = 1.987_569_1e-4_f32;
    p = p * r + 1.398_199_9e-3;
    p = p * r + 8.333_452e-3;
    p = p * r + 4.166_579_6e-2;
    p = p * r + 1.666_666_5e-1;
    p = p * r + 5.000_000_1e-1;
    let y = p * r * r + r + 1.0;
    let k = (t.to_bits() as i32).wrapping_sub(ROUND.to_bits() as i32);
    y * f32::from_bits((k.wrapping_add(127) as u32) << 23)
}

/// `c (m×n) = a (m×k) · bᵀ` where `b` is stored `n×k`; accumulates when `acc`.
pub fn gemm_nt<T: Real>(a: &[T], m: usize, k: usize, b: &[T], n: usize, c: &mut [T], acc: bool) {
    let beta = if acc { T::one() } else { T::zero() };
    T::gemm_raw(m, k, n, T::one(), a, k as isize, 1, b, 1, k as isize, beta, c, n as isize, 1);
}

/// `c (m×n) = a (m×k) · b (k×n)`; accumulates when `acc`.
pub fn gemm_nn<T: Real>(a: &[T], m: usize, k: usize, b: &[T], n: usize, c: &mut [T], acc: bool) {
    let beta = if acc { T::one() } else { T::zero() };
    T::gemm_raw(m, k, n, T::one(), a, k as isize, 1, b, n as isize, 1, beta, c, n as isize, 1);
}

/// `c (m×n) = aᵀ · b` where `a` is stored `k×m` and `b` is `k×n`; accumulates when `acc`.
pub fn gemm_tn<T: Real>(a: &[T], k: usize, m: usize, b: &[T], n: usize, c: &mut [T], acc: bool) {
    let beta = if acc { T::one() } else { T::zero() };
    T::gemm_raw(m, k, n, T::one(), a, 1, m as isize, b, n as isize, 1, beta, c, n as isize, 1);
}

/// A named parameter buffer with a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![T::zero(); n] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(alloc::format!(
                "tensor of shape {shape:?} needs {n} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(alloc::format!(
                "{rows}×{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// A batch of sequences stored time-major: element `(t, b, d)` lives at
/// `(t * batch + b) * dim + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqBatch<T> {
    pub steps: usize,
    pub batch: usize,
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Real> SeqBatch<T> {
    pub fn zeros(steps: usize, batch: usize, dim: usize) -> Self {
        Self { steps, batch, dim, data: vec![T::zero(); steps * batch * dim] }
    }

    #[inline]
    pub fn index(&self, t: usize, b: usize, d: usize) -> usize {
        (t * self.batch + b) * self.dim + d
    }

    pub fn get(&self, t: usize, b: usize, d: usize) -> T {
        self.data[self.index(t, b, d)]
    }

    /// Slice holding all batch rows of timestep `t` (`batch × dim`).
    pub fn step(&self, t: usize) -> &[T] {
        let n = self.batch * self.dim;
        &self.data[t * n..(t + 1) * n]
    }

    /// Packs channel-major `dim × steps` windows into one batch.
    pub fn from_windows<'a, I>(windows: I, dim: usize, steps: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let windows: Vec<&[f64]> = windows.into_iter().collect();
        let mut out = Self::zeros(steps, windows.len(), dim);
        for (b, w) in windows.iter().enumerate() {
            if w.len() != dim * steps {
                return Err(Error::Shape(alloc::format!(
                    "window has {} values, expected {dim}×{steps}",
                    w.len()
                )));
            }
            for d in 0..dim {
                for t in 0..steps {
                    let i = out.index(t, b, d);
                    out.data[i] = T::from_f64_lossy(w[d * steps + t]);
                }
            }
        }
        Ok(out)
    }

    /// Unpacks batch item `b` into a channel-major `dim × steps` buffer.
    pub fn window(&self, b: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.steps];
        for d in 0..self.dim {
            for t in 0..self.steps {
                out[d * self.steps + t] = self.get(t, b, d).to_f64_lossy();
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

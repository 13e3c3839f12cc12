use alloc::format;
use alloc::vec::Vec;

use super::{SequenceWindow, SourceSpan};
use crate::error::{Error, Result};

pub const MNIST_SIDE: usize = 28;

/// Range of the incoming pixel intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelScale {
    /// `0..=255`
    Byte,
    /// `0.0..=1.0`
    Unit,
}

/// Reads a 28×28 image row by row: each image row becomes one timestep and each
/// pixel column one channel, rescaled to `[-1, 1]`.
pub fn mnist_as_sequence(pixels: &[f64], scale: PixelScale, label: Option<usize>, index: u32) -> Result<SequenceWindow> {
    let n = MNIST_SIDE * MNIST_SIDE;
    if pixels.len() != n {
        return Err(Error::Shape(format!("expected {n} pixels, got {}", pixels.len())));
    }
    let full = match scale {
        PixelScale::Byte => 255.0,
        PixelScale::Unit => 1.0,
    };
    let mut values = Vec::with_capacity(n);
    for col in 0..MNIST_SIDE {
        for row in 0..MNIST_SIDE {
            let p = pixels[row * MNIST_SIDE + col] / full;
            values.push((2.0 * p - 1.0).clamp(-1.0, 1.0));
        }
    }
    Ok(SequenceWindow {
        channels: MNIST_SIDE,
        steps: MNIST_SIDE,
        values,
        label,
        span: SourceSpan { stream: index, start: 0 },
    })
}

//! Preprocessing: raw multi-channel streams and digit images into fixed-length,
//! normalized windows with reproducible splits.
//!
//! All windows are stored channel-major: value `(channel c, timestep t)` of a
//! `D × W` window lives at `values[c * W + t]`.

mod mnist;
mod normalize;
mod segment;
mod split;
mod stream;
mod synth;
pub mod ucihar;

pub use mnist::{mnist_as_sequence, PixelScale, MNIST_SIDE};
pub use normalize::NormalizerStats;
pub use segment::{segment, window_count};
pub use split::{stratified_indices, DatasetSplit};
pub use stream::{downsample, RawStream};
pub use synth::{synth_har, SynthHarConfig};

use alloc::vec::Vec;

/// Where a window was cut from: stream id and first sample index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub stream: u32,
    pub start: u32,
}

/// One `channels × steps` segment, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceWindow {
    pub channels: usize,
    pub steps: usize,
    pub values: Vec<f64>,
    pub label: Option<usize>,
    pub span: SourceSpan,
}

impl SequenceWindow {
    pub fn get(&self, channel: usize, t: usize) -> f64 {
        self.values[channel * self.steps + t]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.steps..(c + 1) * self.steps]
    }
}

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{RawStream, SequenceWindow};
use crate::error::{Error, Result};

/// Per-channel min/max fitted on training data, mapping each channel onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormalizerStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub fitted_on: String,
}

impl NormalizerStats {
    /// Builds stats from explicit bounds; rejects degenerate channels.
    pub fn from_bounds(min: Vec<f64>, max: Vec<f64>, fitted_on: &str) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::Shape("min/max vectors must be non-empty and equal length".into()));
        }
        for (c, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(hi > lo) {
                return Err(Error::DegenerateChannel { channel: c, name: format!("ch{c}") });
            }
        }
        Ok(Self { min, max, fitted_on: fitted_on.into() })
    }

    pub fn fit_windows(windows: &[SequenceWindow], fitted_on: &str) -> Result<Self> {
        let first = windows.first().ok_or_else(|| Error::Argument("no windows to fit on".into()))?;
        let d = first.channels;
        let mut min = alloc::vec![f64::INFINITY; d];
        let mut max = alloc::vec![f64::NEG_INFINITY; d];
        for w in windows {
            if w.channels != d {
                return Err(Error::Shape(format!("window has {} channels, expected {d}", w.channels)));
            }
            for c in 0..d {
                for &v in w.channel(c) {
                    min[c] = min[c].min(v);
                    max[c] = max[c].max(v);
                }
            }
        }
        Self::from_bounds(min, max, fitted_on)
    }

    pub fn fit_stream(stream: &RawStream, fitted_on: &str) -> Result<Self> {
        let d = stream.channels();
        let mut min = Vec::with_capacity(d);
        let mut max = Vec::with_capacity(d);
        for c in 0..d {
            let ch = stream.channel(c);
            let lo = ch.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(Error::DegenerateChannel { channel: c, name: stream.channel_names()[c].clone() });
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self { min, max, fitted_on: fitted_on.into() })
    }

    pub fn channels(&self) -> usize {
        self.min.len()
    }

    /// `2 (x - min) / (max - min) - 1`, clipped to `[-1, 1]` for out-of-range
    /// (test split) values.
    pub fn normalize_value(&self, channel: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[channel], self.max[channel]);
        (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
    }

    pub fn denormalize_value(&self, channel: usize, y: f64) -> f64 {
        let (lo, hi) = (self.min[channel], self.max[channel]);
        (y + 1.0) * 0.5 * (hi - lo) + lo
    }

    pub fn apply(&self, window: &SequenceWindow) -> Result<SequenceWindow> {
        self.map(window, Self::normalize_value)
    }

    pub fn invert(&self, window: &SequenceWindow) -> Result<SequenceWindow> {
        self.map(window, Self::denormalize_value)
    }

    fn map(&self, window: &SequenceWindow, f: fn(&Self, usize, f64) -> f64) -> Result<SequenceWindow> {
        if window.channels != self.channels() {
            return Err(Error::Shape(format!(
                "window has {} channels, normalizer fitted on {}",
                window.channels,
                self.channels()
            )));
        }
        let mut out = window.clone();
        for c in 0..window.channels {
            for t in 0..window.steps {
                let i = c * window.steps + t;
                out.values[i] = f(self, c, window.values[i]);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapipe::SourceSpan;
    use alloc::vec;

    fn window(channels: usize, values: Vec<f64>) -> SequenceWindow {
        let steps = values.len() / channels;
        SequenceWindow { channels, steps, values, label: None, span: SourceSpan { stream: 0, start: 0 } }
    }

    #[test]
    fn fits_min_and_max() {
        let s = NormalizerStats::fit_windows(&[window(1, vec![-2.0, 0.0, 6.0])], "train").unwrap();
        assert_eq!((s.min[0], s.max[0]), (-2.0, 6.0));
    }

    #[test]
    fn channels_are_fitted_independently() {
        let a = NormalizerStats::fit_windows(&[window(2, vec![-2.0, 0.0, 6.0, 1.0, 2.0, 3.0])], "train").unwrap();
        let b = NormalizerStats::fit_windows(&[window(2, vec![-2.0, 0.0, 6.0, 100.0, -50.0, 3.0])], "train").unwrap();
        assert_eq!((a.min[0], a.max[0]), (b.min[0], b.max[0]));
    }

    #[test]
    fn maps_bounds_and_midpoint_and_clips() {
        let s = NormalizerStats::from_bounds(vec![-2.0], vec![6.0], "train").unwrap();
        let out = s.apply(&window(1, vec![-2.0, 6.0, 2.0, 10.0])).unwrap();
        assert_eq!(out.values, vec![-1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_channel_names_the_channel() {
        let stream = RawStream::new(2, vec![1.0, 2.0, 5.0, 5.0], 10.0, vec!["acc_x".into(), "gyro_z".into()], None)
            .unwrap();
        match NormalizerStats::fit_stream(&stream, "train") {
            Err(Error::DegenerateChannel { channel: 1, name }) => assert_eq!(name, "gyro_z"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn channel_mismatch_is_a_shape_error() {
        let s = NormalizerStats::from_bounds(vec![0.0, 0.0], vec![1.0, 1.0], "train").unwrap();
        assert!(matches!(s.apply(&window(1, vec![0.5])), Err(Error::Shape(_))));
    }
}

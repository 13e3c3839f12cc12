use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A continuous recording: `channels × samples`, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStream {
    channels: usize,
    samples: usize,
    values: Vec<f64>,
    sample_rate_hz: f64,
    channel_names: Vec<String>,
    labels: Option<Vec<usize>>,
}

impl RawStream {
    /// Validates shapes and rejects non-finite samples; there is no imputation.
    pub fn new(
        channels: usize,
        values: Vec<f64>,
        sample_rate_hz: f64,
        channel_names: Vec<String>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if channels == 0 || values.is_empty() {
            return Err(Error::Shape("stream needs at least one channel and one sample".into()));
        }
        if values.len() % channels != 0 {
            return Err(Error::Shape(format!(
                "{} values do not split into {channels} channels",
                values.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Argument(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if channel_names.len() != channels {
            return Err(Error::Shape(format!(
                "{} channel names for {channels} channels",
                channel_names.len()
            )));
        }
        let samples = values.len() / channels;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "stream channel {} sample {}",
                pos / samples,
                pos % samples
            )));
        }
        if let Some(l) = &labels {
            if l.len() != samples {
                return Err(Error::Shape(format!("{} labels for {samples} samples", l.len())));
            }
        }
        Ok(Self { channels, samples, values, sample_rate_hz, channel_names, labels })
    }

    /// Convenience constructor naming channels `ch0, ch1, ...`.
    pub fn unnamed(channels: usize, values: Vec<f64>, sample_rate_hz: f64, labels: Option<Vec<usize>>) -> Result<Self> {
        let names = (0..channels).map(|c| format!("ch{c}")).collect();
        Self::new(channels, values, sample_rate_hz, names, labels)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.samples..(c + 1) * self.samples]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Index decimation: keeps every `k`-th sample with `k = round(source / target)`.
///
/// No anti-alias filter is applied. The returned stream reports its effective
/// rate `source / k`.
pub fn downsample(stream: &RawStream, target_hz: f64) -> Result<RawStream> {
    let source = stream.sample_rate_hz;
    if !(target_hz.is_finite() && target_hz > 0.0) {
        return Err(Error::Argument(format!("target rate must be positive, got {target_hz}")));
    }
    if target_hz > source * (1.0 + 1e-9) {
        return Err(Error::UpsamplingNotSupported { source_hz: source, target_hz });
    }
    let k = num_traits::Float::round(source / target_hz).max(1.0) as usize;
    if k == 1 {
        return Ok(stream.clone());
    }
    let kept = stream.samples.div_ceil(k);
    let mut values = Vec::with_capacity(kept * stream.channels);
    for c in 0..stream.channels {
        values.extend(stream.channel(c).iter().step_by(k));
    }
    let labels = stream.labels.as_ref().map(|l| l.iter().step_by(k).copied().collect());
    RawStream::new(stream.channels, values, source / k as f64, stream.channel_names.clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fifty_to_thirty_three_hz_keeps_every_second_sample() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let labels: Vec<usize> = (0..100).collect();
        let s = RawStream::unnamed(1, values, 50.0, Some(labels)).unwrap();
        let d = downsample(&s, 33.0).unwrap();
        assert_eq!(d.samples(), 50);
        assert_eq!(&d.channel(0)[..3], &[0.0, 2.0, 4.0]);
        assert_eq!(&d.labels().unwrap()[..3], &[0, 2, 4]);
    }

    #[test]
    fn same_rate_is_identity() {
        let s = RawStream::unnamed(2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 20.0, None).unwrap();
        assert_eq!(downsample(&s, 20.0).unwrap(), s);
    }

    #[test]
    fn upsampling_is_rejected() {
        let s = RawStream::unnamed(1, vec![0.0; 10], 33.0, None).unwrap();
        assert!(matches!(downsample(&s, 50.0), Err(Error::UpsamplingNotSupported { .. })));
    }

    fn zero_crossings(x: &[f64]) -> usize {
        x.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
    }

    #[test]
    fn sine_frequency_survives_decimation() {
        // 1 Hz sine over 4 s at 100 Hz, phase-shifted so no sample sits on zero.
        let values: Vec<f64> = (0..400)
            .map(|i| num_traits::Float::sin(2.0 * core::f64::consts::PI * (i as f64 / 100.0) + 0.1))
            .collect();
        let s = RawStream::unnamed(1, values, 100.0, None).unwrap();
        let before = zero_crossings(s.channel(0)) as f64 / (s.samples() as f64 / s.sample_rate_hz());
        let d = downsample(&s, 50.0).unwrap();
        let after = zero_crossings(d.channel(0)) as f64 / (d.samples() as f64 / d.sample_rate_hz());
        // two crossings per cycle
        assert!((before / 2.0 - 1.0).abs() < 0.2, "{before}");
        assert!((after / 2.0 - 1.0).abs() < 0.2, "{after}");
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let err = RawStream::unnamed(1, vec![0.0, f64::NAN], 10.0, None).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }
}

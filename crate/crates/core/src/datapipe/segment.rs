use alloc::vec::Vec;

use super::{RawStream, SequenceWindow, SourceSpan};
use crate::error::{Error, Result};

/// Number of full windows a sliding window produces; the ragged tail is dropped.
pub fn window_count(samples: usize, window: usize, stride: usize) -> usize {
    if window == 0 || stride == 0 || window > samples {
        0
    } else {
        (samples - window) / stride + 1
    }
}

/// Cuts `window`-sample segments every `stride` samples.
///
/// Each window is labelled with the majority per-sample label in its span; ties
/// go to the label of the window's last sample. A window longer than the
/// stream yields no segments (with a warning) rather than an error.
pub fn segment(stream: &RawStream, stream_id: u32, window: usize, stride: usize) -> Result<Vec<SequenceWindow>> {
    if stride == 0 {
        return Err(Error::Argument("stride must be at least 1".into()));
    }
    if window == 0 {
        return Err(Error::Argument("window length must be at least 1".into()));
    }
    let samples = stream.samples();
    if window > samples {
        log::warn!("window of {window} samples exceeds stream length {samples}; no segments produced");
        return Ok(Vec::new());
    }
    let d = stream.channels();
    let n = window_count(samples, window, stride);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let start = i * stride;
        let mut values = Vec::with_capacity(d * window);
        for c in 0..d {
            values.extend_from_slice(&stream.channel(c)[start..start + window]);
        }
        let label = stream.labels().map(|l| majority_label(&l[start..start + window]));
        out.push(SequenceWindow {
            channels: d,
            steps: window,
            values,
            label,
            span: SourceSpan { stream: stream_id, start: start as u32 },
        });
    }
    Ok(out)
}

fn majority_label(labels: &[usize]) -> usize {
    let last = *labels.last().expect("non-empty window");
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &l in labels {
        match counts.iter_mut().find(|(k, _)| *k == l) {
            Some((_, n)) => *n += 1,
            None => counts.push((l, 1)),
        }
    }
    let best = counts.iter().map(|&(_, n)| n).max().unwrap_or(0);
    let last_count = counts.iter().find(|(k, _)| *k == last).map_or(0, |&(_, n)| n);
    if last_count == best {
        last
    } else {
        counts.iter().find(|&&(_, n)| n == best).map(|&(k, _)| k).unwrap_or(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ramp(samples: usize, labels: Option<Vec<usize>>) -> RawStream {
        let values = (0..2 * samples).map(|i| i as f64).collect();
        RawStream::unnamed(2, values, 33.0, labels).unwrap()
    }

    #[test]
    fn five_windows_at_stride_fifteen() {
        let w = segment(&ramp(100, None), 0, 30, 15).unwrap();
        let starts: Vec<u32> = w.iter().map(|w| w.span.start).collect();
        assert_eq!(starts, vec![0, 15, 30, 45, 60]);
    }

    #[test]
    fn window_equal_to_stream_gives_one_window() {
        assert_eq!(segment(&ramp(30, None), 0, 30, 1).unwrap().len(), 1);
    }

    #[test]
    fn majority_label_wins() {
        let mut labels = vec![0; 20];
        labels.extend(vec![1; 10]);
        let w = segment(&ramp(30, Some(labels)), 0, 30, 1).unwrap();
        assert_eq!(w[0].label, Some(0));
    }

    #[test]
    fn ties_break_toward_last_sample() {
        let mut labels = vec![2; 15];
        labels.extend(vec![5; 15]);
        assert_eq!(majority_label(&labels), 5);
        labels.reverse();
        assert_eq!(majority_label(&labels), 2);
    }

    #[test]
    fn long_window_yields_nothing_and_zero_stride_errors() {
        assert!(segment(&ramp(10, None), 0, 30, 1).unwrap().is_empty());
        assert!(matches!(segment(&ramp(10, None), 0, 5, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn windows_copy_stream_columns() {
        let s = ramp(50, None);
        for w in segment(&s, 3, 7, 4).unwrap() {
            let start = w.span.start as usize;
            for c in 0..2 {
                assert_eq!(w.channel(c), &s.channel(c)[start..start + 7]);
            }
        }
    }
}

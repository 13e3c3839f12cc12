//! Parsing for the published UCI HAR inertial-signal text files.
//!
//! Each signal file holds one window per line as whitespace-separated decimal
//! floats; the label files hold one activity id (1..=6) per line. Reading the
//! files from disk is left to the caller.

use alloc::format;
use alloc::vec::Vec;

use super::{SequenceWindow, SourceSpan};
use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 6;

/// The nine raw inertial signals, in file-name order.
pub const SIGNALS: [&str; 9] = [
    "body_acc_x",
    "body_acc_y",
    "body_acc_z",
    "body_gyro_x",
    "body_gyro_y",
    "body_gyro_z",
    "total_acc_x",
    "total_acc_y",
    "total_acc_z",
];

pub fn parse_signal(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Argument(format!("line {}: cannot parse {tok:?} as a float", line_no + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(Error::Shape(format!(
                    "line {} has {} values, expected {}",
                    line_no + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("signal line {}", line_no + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Activity ids `1..=6` become class ids `0..=5`.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| match l.trim().parse::<usize>() {
            Ok(v) if (1..=NUM_CLASSES).contains(&v) => Ok(v - 1),
            _ => Err(Error::Argument(format!("label line {}: {:?} is not an activity id 1..=6", i + 1, l.trim()))),
        })
        .collect()
}

/// Stacks per-signal rows into `signals.len() × samples` windows.
pub fn assemble(signals: &[Vec<Vec<f64>>], labels: &[usize], stream_base: u32) -> Result<Vec<SequenceWindow>> {
    let first = signals.first().ok_or_else(|| Error::Argument("no signal files".into()))?;
    let n = first.len();
    if signals.iter().any(|s| s.len() != n) || labels.len() != n {
        return Err(Error::Shape(format!(
            "signal files and labels disagree on window count (labels: {}, first signal: {n})",
            labels.len()
        )));
    }
    let steps = first.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut values = Vec::with_capacity(signals.len() * steps);
        for s in signals {
            if s[i].len() != steps {
                return Err(Error::Shape(format!("window {i} has ragged signal lengths")));
            }
            values.extend_from_slice(&s[i]);
        }
        out.push(SequenceWindow {
            channels: signals.len(),
            steps,
            values,
            label: Some(labels[i]),
            span: SourceSpan { stream: stream_base + i as u32, start: 0 },
        });
    }
    Ok(out)
}

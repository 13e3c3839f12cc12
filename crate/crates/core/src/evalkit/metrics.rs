use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: Vec<Vec<u64>>,
}

impl Confusion {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!("{} labels vs {} predictions", truth.len(), predicted.len())));
        }
        let mut counts = vec![vec![0u64; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::Argument(format!("class id out of range for {classes} classes")));
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
}

/// Accuracy, per-class precision/recall/F1 and their unweighted F1 mean.
/// Empty denominators give 0.
pub fn metrics(confusion: &Confusion) -> Result<Metrics> {
    let k = confusion.classes();
    if confusion.counts.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("confusion matrix is not square".into()));
    }
    let total = confusion.total();
    if total == 0 {
        return Err(Error::UndefinedMetrics);
    }
    let c = &confusion.counts;
    let diag: u64 = (0..k).map(|i| c[i][i]).sum();
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut precision = Vec::with_capacity(k);
    let mut recall = Vec::with_capacity(k);
    let mut f1 = Vec::with_capacity(k);
    for i in 0..k {
        let tp = c[i][i];
        let row: u64 = c[i].iter().sum();
        let col: u64 = c.iter().map(|r| r[i]).sum();
        precision.push(ratio(tp, col));
        recall.push(ratio(tp, row));
        // 2tp / (2tp + fp + fn) with fp = col - tp and fn = row - tp.
        f1.push(ratio(2 * tp, row + col));
    }
    let macro_f1 = f1.iter().sum::<f64>() / k as f64;
    Ok(Metrics { accuracy: ratio(diag, total), macro_f1, precision, recall, f1 })
}

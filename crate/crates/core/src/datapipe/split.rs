use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{NormalizerStats, SequenceWindow};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Train and test windows of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<SequenceWindow>,
    pub test: Vec<SequenceWindow>,
    pub num_classes: usize,
    pub seed: u64,
    pub label_fraction: f64,
    pub normalizer: Option<NormalizerStats>,
}

impl DatasetSplit {
    /// Checks shape consistency, label range and train/test disjointness by span.
    pub fn validate(&self) -> Result<()> {
        let first = self
            .train
            .first()
            .ok_or_else(|| Error::Argument("training split is empty".into()))?;
        let (d, w) = (first.channels, first.steps);
        for win in self.train.iter().chain(&self.test) {
            if win.channels != d || win.steps != w || win.values.len() != d * w {
                return Err(Error::Shape("windows differ in shape".into()));
            }
            if let Some(l) = win.label {
                if l >= self.num_classes {
                    return Err(Error::Argument(alloc::format!(
                        "label {l} out of range for {} classes",
                        self.num_classes
                    )));
                }
            }
        }
        let spans: BTreeSet<_> = self.train.iter().map(|w| w.span).collect();
        if self.test.iter().any(|w| spans.contains(&w.span)) {
            return Err(Error::Argument("train and test windows overlap".into()));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.train.first().map_or(0, |w| w.channels)
    }

    pub fn steps(&self) -> usize {
        self.train.first().map_or(0, |w| w.steps)
    }

    pub fn train_labels(&self) -> Vec<usize> {
        self.train.iter().map(|w| w.label.unwrap_or(0)).collect()
    }

    pub fn test_labels(&self) -> Vec<usize> {
        self.test.iter().map(|w| w.label.unwrap_or(0)).collect()
    }
}

/// Stratified subsample: from each class with `n_k` members keep
/// `max(1, round(fraction * n_k))` drawn at random. Indices are returned in
/// their original order, so `fraction == 1` returns `0..labels.len()`.
pub fn stratified_indices(labels: &[usize], num_classes: usize, fraction: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Argument(alloc::format!("label fraction must lie in (0, 1], got {fraction}")));
    }
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::Argument(alloc::format!("label {l} out of range")));
        }
        by_class[l].push(i);
    }
    let mut keep = Vec::new();
    for mut members in by_class {
        if members.is_empty() {
            continue;
        }
        let n = members.len();
        let take = (num_traits::Float::round(fraction * n as f64) as usize).clamp(1, n);
        if take < n {
            members.shuffle(rng);
            members.truncate(take);
        }
        keep.extend(members);
    }
    keep.sort_unstable();
    Ok(keep)
}

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::features::{feature_set, FeatureSet, FeatureSource};
use super::probe::{linear_probe, ProbeConfig, ProbeResult};
use crate::datapipe::DatasetSplit;
use crate::error::Result;
use crate::frameworks::{reconstruct, ModelBundle};
use crate::tensor::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Development {
    Train,
    ReconstructedTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    Test,
    ReconstructedTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessRow {
    pub development: Development,
    pub evaluation: Evaluation,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub probe: ProbeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessTable {
    /// (Train, Test), (Train, Rec. Test), (Rec. Train, Test), (Rec. Train, Rec. Test).
    pub rows: Vec<FaithfulnessRow>,
}

impl FaithfulnessTable {
    pub fn get(&self, development: Development, evaluation: Evaluation) -> Option<&FaithfulnessRow> {
        self.rows.iter().find(|r| r.development == development && r.evaluation == evaluation)
    }
}

/// Probes every pairing of original and reconstructed development and
/// evaluation features.
pub fn faithfulness_from_features(
    train: &FeatureSet,
    rec_train: &FeatureSet,
    test: &FeatureSet,
    rec_test: &FeatureSet,
    classes: usize,
    cfg: &ProbeConfig,
) -> Result<FaithfulnessTable> {
    let mut rows = Vec::with_capacity(4);
    for (development, dev) in [(Development::Train, train), (Development::ReconstructedTrain, rec_train)] {
        for (evaluation, eval) in [(Evaluation::Test, test), (Evaluation::ReconstructedTest, rec_test)] {
            let probe = linear_probe(dev, eval, classes, cfg)?;
            rows.push(FaithfulnessRow {
                development,
                evaluation,
                accuracy: probe.accuracy,
                macro_f1: probe.macro_f1,
                probe,
            });
        }
    }
    Ok(FaithfulnessTable { rows })
}

/// Reconstructs both splits with `G(E(x))`, keeping labels, and probes all
/// four combinations through the same frozen extractor.
pub fn faithfulness_study<T: Real>(
    bundle: &ModelBundle<T>,
    split: &DatasetSplit,
    source: FeatureSource,
    cfg: &ProbeConfig,
) -> Result<FaithfulnessTable> {
    let rec_train = reconstruct(bundle, &split.train)?;
    let rec_test = reconstruct(bundle, &split.test)?;
    faithfulness_from_features(
        &feature_set(bundle, &split.train, source)?,
        &feature_set(bundle, &rec_train, source)?,
        &feature_set(bundle, &split.test, source)?,
        &feature_set(bundle, &rec_test, source)?,
        split.num_classes,
        cfg,
    )
}

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datapipe::SequenceWindow;
use crate::error::{Error, Result};
use crate::frameworks::{encode, FrameworkId, ModelBundle, EVAL_CHUNK};
use crate::netcore::{HiddenPooling, Module};
use crate::tensor::{Matrix, Real, SeqBatch};

/// Where frozen features are read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Encoder output (posterior mean for M2V).
    Encoder,
    /// Hidden states of the discriminator's LSTM (RGAN has no encoder).
    Discriminator(HiddenPooling),
}

impl FeatureSource {
    pub fn default_for(framework: FrameworkId) -> Self {
        if framework == FrameworkId::Rgan {
            Self::Discriminator(HiddenPooling::Final)
        } else {
            Self::Encoder
        }
    }
}

/// Windows with optional labels, features as `n × F` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub features: Matrix<f64>,
    pub labels: Vec<usize>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols
    }

    /// Rows `idx`, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim());
        for &i in idx {
            data.extend_from_slice(self.features.row(i));
        }
        Self {
            features: Matrix { rows: idx.len(), cols: self.dim(), data },
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Forward-only feature extraction; parameters are never touched.
pub fn extract_features<T: Real>(
    bundle: &ModelBundle<T>,
    windows: &[SequenceWindow],
    source: FeatureSource,
) -> Result<Matrix<f64>> {
    match source {
        FeatureSource::Encoder if bundle.encoder.is_none() => {
            return Err(Error::Unsupported {
                framework: bundle.framework.as_str().into(),
                what: "has no encoder; read features from the discriminator instead".into(),
            })
        }
        FeatureSource::Discriminator(_) if bundle.discriminator.is_none() => {
            return Err(Error::Unsupported {
                framework: bundle.framework.as_str().into(),
                what: "has no discriminator".into(),
            })
        }
        _ => {}
    }
    let dims = bundle.dims;
    let mut data = Vec::new();
    let mut cols = 0;
    for chunk in windows.chunks(EVAL_CHUNK) {
        let x = SeqBatch::<T>::from_windows(chunk.iter().map(|w| w.values.as_slice()), dims.channels, dims.steps)?;
        let m = match source {
            FeatureSource::Encoder => encode(bundle, &x)?,
            FeatureSource::Discriminator(pool) => match bundle.data_discriminator() {
                Ok(d) => d.features(&x, pool)?,
                Err(_) => bundle.joint_discriminator()?.features(&x, pool)?,
            },
        };
        cols = m.cols;
        data.extend(m.data.iter().map(|v| v.to_f64_lossy()));
    }
    Ok(Matrix { rows: windows.len(), cols, data })
}

/// Features plus labels; every window must carry a label.
pub fn feature_set<T: Real>(
    bundle: &ModelBundle<T>,
    windows: &[SequenceWindow],
    source: FeatureSource,
) -> Result<FeatureSet> {
    let labels: Option<Vec<usize>> = windows.iter().map(|w| w.label).collect();
    let labels = labels.ok_or_else(|| Error::Argument("probing needs labelled windows".into()))?;
    Ok(FeatureSet { features: extract_features(bundle, windows, source)?, labels })
}

/// SHA-256 over tensor names and little-endian values, in visit order.
pub fn param_checksum<T: Real, M: Module<T>>(module: &M) -> [u8; 32] {
    let mut h = Sha256::new();
    module.visit("", &mut |name, t| {
        h.update(name.as_bytes());
        for &s in &t.shape {
            h.update((s as u64).to_le_bytes());
        }
        for v in &t.data {
            h.update(v.to_f64_lossy().to_le_bytes());
        }
    });
    h.finalize().into()
}

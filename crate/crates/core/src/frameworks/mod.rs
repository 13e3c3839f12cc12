//! Training objectives for the recurrent GAN family and the reference
//! extractors, plus the loop that optimises them.

mod adam;
mod bundle;
mod config;
mod loss;
mod train;

pub use adam::Adam;
pub use bundle::{Discriminator, ModelBundle, ParamGroup};
pub use config::{FrameworkConfig, FrameworkId, GeneratorLoss, ReconReduction};
pub use loss::{
    cross_entropy, discriminator_step, evaluate, model_step, softplus, split_gaussian, Batch, LossReport,
};
pub use train::{train, BatchRecord, EpochRecord, Silent, TrainObserver, TrainRecord, Trainer};

use alloc::vec::Vec;

use crate::datapipe::SequenceWindow;
use crate::error::{Error, Result};
use crate::tensor::{Matrix, Real, SeqBatch};

/// Windows per forward pass when mapping whole datasets.
pub const EVAL_CHUNK: usize = 256;

/// Latent codes `E(x)`; the posterior mean for M2V.
pub fn encode<T: Real>(bundle: &ModelBundle<T>, x: &SeqBatch<T>) -> Result<Matrix<T>> {
    let out = bundle.encoder()?.forward(x)?.output;
    Ok(if bundle.framework == FrameworkId::M2v { split_gaussian(&out).0 } else { out })
}

/// `G(E(x))` for every window, keeping labels and source spans.
pub fn reconstruct<T: Real>(bundle: &ModelBundle<T>, windows: &[SequenceWindow]) -> Result<Vec<SequenceWindow>> {
    let gen = bundle.generator()?;
    bundle.encoder()?;
    let mut out = Vec::with_capacity(windows.len());
    for chunk in windows.chunks(EVAL_CHUNK) {
        let (c, w) = (chunk[0].channels, chunk[0].steps);
        if chunk.iter().any(|s| s.channels != c || s.steps != w) {
            return Err(Error::Shape("windows differ in shape".into()));
        }
        let x = SeqBatch::<T>::from_windows(chunk.iter().map(|s| s.values.as_slice()), c, w)?;
        let rec = gen.forward(&encode(bundle, &x)?, w)?.output;
        for (b, src) in chunk.iter().enumerate() {
            out.push(SequenceWindow { values: rec.window(b), ..src.clone() });
        }
    }
    Ok(out)
}

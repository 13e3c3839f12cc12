//! Checkpoint files.
//!
//! Layout: the 8 magic bytes `GGANCKPT`, a `u32` schema version, a `u64`
//! header length, a UTF-8 JSON header, then every tensor listed in the header
//! as little-endian `f32`, in header order. Nothing time-dependent is stored,
//! so identical training produces identical files.

use std::path::Path;

use guided_gan_core::frameworks::ModelBundle;
use guided_gan_core::netcore::Module;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 8] = b"GGANCKPT";
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub schema: u32,
    pub config: RunConfig,
    pub channels: usize,
    pub steps: usize,
    pub classes: usize,
    /// Completed epochs.
    pub epoch: usize,
    pub step: u64,
    pub tensors: Vec<TensorEntry>,
}

pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub bundle: ModelBundle<f32>,
}

pub fn encode(config: &RunConfig, bundle: &ModelBundle<f32>, classes: usize, epoch: usize) -> Vec<u8> {
    let named = bundle.named_tensors("");
    let header = CheckpointHeader {
        schema: SCHEMA,
        config: config.clone(),
        channels: bundle.dims.channels,
        steps: bundle.dims.steps,
        classes,
        epoch,
        step: bundle.step,
        tensors: named.iter().map(|(n, t)| TensorEntry { name: n.clone(), shape: t.shape.clone() }).collect(),
    };
    let json = serde_json::to_vec(&header).expect("serializable");
    let mut out = Vec::with_capacity(20 + json.len() + 4 * bundle.param_count());
    out.extend_from_slice(MAGIC);
    out.extend(SCHEMA.to_le_bytes());
    out.extend((json.len() as u64).to_le_bytes());
    out.extend(json);
    for (_, t) in named {
        for v in &t.data {
            out.extend(v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, String> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err("not a guided-gan checkpoint".into());
    }
    let schema = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if schema != SCHEMA {
        return Err(format!("unsupported checkpoint schema {schema}"));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body_at = 20usize.checked_add(len).filter(|&e| e <= bytes.len()).ok_or("truncated header")?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[20..body_at]).map_err(|e| format!("bad header: {e}"))?;
    let mut bundle =
        ModelBundle::<f32>::new(&header.config.model, header.channels, header.steps, Some(header.classes))
            .map_err(|e| e.to_string())?;
    let names: Vec<(String, Vec<usize>)> =
        bundle.named_tensors("").into_iter().map(|(n, t)| (n, t.shape.clone())).collect();
    if names.len() != header.tensors.len()
        || names.iter().zip(&header.tensors).any(|((n, s), e)| *n != e.name || *s != e.shape)
    {
        return Err(format!("tensor list does not match a {} model", header.config.model.framework));
    }
    let mut body = &bytes[body_at..];
    for t in bundle.tensors_mut() {
        let n = 4 * t.data.len();
        if body.len() < n {
            return Err("truncated tensor data".into());
        }
        for (v, b) in t.data.iter_mut().zip(body[..n].chunks_exact(4)) {
            *v = f32::from_le_bytes(b.try_into().expect("4 bytes"));
        }
        body = &body[n..];
    }
    if !body.is_empty() {
        return Err(format!("{} trailing bytes", body.len()));
    }
    bundle.step = header.step;
    Ok(Checkpoint { header, bundle })
}

pub fn load(path: &Path) -> CliResult<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read checkpoint {}: {e}", path.display())))?;
    decode(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

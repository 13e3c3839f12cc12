//! Reader for the IDX files the MNIST digits are distributed in.

use std::path::{Path, PathBuf};

use guided_gan_core::datapipe::{mnist_as_sequence, DatasetSplit, PixelScale, MNIST_SIDE};

use crate::error::{CliError, CliResult};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Returns `(count, rows, cols, pixels)`.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8]), String> {
    if be_u32(bytes, 0) != Some(IMAGES_MAGIC) {
        return Err("not an IDX image file (bad magic)".into());
    }
    let dim = |i: usize| be_u32(bytes, 4 + 4 * i).map(|v| v as usize).ok_or("truncated header");
    let (n, rows, cols) = (dim(0)?, dim(1)?, dim(2)?);
    let body = &bytes[16..];
    if body.len() != n * rows * cols {
        return Err(format!("expected {} pixel bytes, found {}", n * rows * cols, body.len()));
    }
    Ok((n, rows, cols, body))
}

pub fn parse_labels(bytes: &[u8]) -> Result<&[u8], String> {
    if be_u32(bytes, 0) != Some(LABELS_MAGIC) {
        return Err("not an IDX label file (bad magic)".into());
    }
    let n = be_u32(bytes, 4).ok_or("truncated header")? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(format!("expected {n} labels, found {}", body.len()));
    }
    Ok(body)
}

/// Accepts both `train-images-idx3-ubyte` and `train-images.idx3-ubyte` spellings.
fn find(dir: &Path, stem: &str, kind: &str) -> CliResult<PathBuf> {
    for name in [format!("{stem}-{kind}-ubyte"), format!("{stem}.{kind}-ubyte")] {
        let p = dir.join(&name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(CliError::Usage(format!(
        "{} lacks {stem}-{kind}-ubyte; expected train-images-idx3-ubyte, train-labels-idx1-ubyte, \
         t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte (uncompressed)",
        dir.display()
    )))
}

fn read_split(dir: &Path, images: &str, labels: &str, first_index: u32) -> CliResult<Vec<guided_gan_core::datapipe::SequenceWindow>> {
    let ip = find(dir, images, "idx3")?;
    let lp = find(dir, labels, "idx1")?;
    let ib = std::fs::read(&ip).map_err(|e| CliError::io(&ip, e))?;
    let lb = std::fs::read(&lp).map_err(|e| CliError::io(&lp, e))?;
    let (n, rows, cols, pixels) = parse_images(&ib).map_err(|e| CliError::Usage(format!("{}: {e}", ip.display())))?;
    let labels = parse_labels(&lb).map_err(|e| CliError::Usage(format!("{}: {e}", lp.display())))?;
    if rows != MNIST_SIDE || cols != MNIST_SIDE || labels.len() != n {
        return Err(CliError::Usage(format!("{}: expected {n} 28×28 images with labels", ip.display())));
    }
    let side = rows * cols;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let px: Vec<f64> = pixels[i * side..(i + 1) * side].iter().map(|&b| f64::from(b)).collect();
        out.push(mnist_as_sequence(&px, PixelScale::Byte, Some(labels[i] as usize), first_index + i as u32)?);
    }
    Ok(out)
}

/// Rows become timesteps; train windows are numbered before test windows so
/// their source spans never collide.
pub fn load_mnist(dir: &Path) -> CliResult<DatasetSplit> {
    let train = read_split(dir, "train-images", "train-labels", 0)?;
    let test = read_split(dir, "t10k-images", "t10k-labels", train.len() as u32)?;
    Ok(DatasetSplit { train, test, num_classes: 10, seed: 0, label_fraction: 1.0, normalizer: None })
}

//! UCI HAR raw inertial signals from the published directory layout.

use std::path::{Path, PathBuf};

use guided_gan_core::datapipe::ucihar::{assemble, parse_labels, parse_signal, NUM_CLASSES, SIGNALS};
use guided_gan_core::datapipe::{downsample, DatasetSplit, NormalizerStats, RawStream, SequenceWindow};

use crate::error::{CliError, CliResult};

/// Published sampling rate of the inertial signals.
pub const SOURCE_HZ: f64 = 50.0;

fn layout_error(root: &Path, missing: &Path) -> CliError {
    CliError::Usage(format!(
        "{} not found; expected {}/{{train,test}}/y_{{train,test}}.txt and \
         {}/{{train,test}}/Inertial Signals/<signal>_{{train,test}}.txt for signals {}",
        missing.display(),
        root.display(),
        root.display(),
        SIGNALS.join(", ")
    ))
}

fn read(root: &Path, path: PathBuf) -> CliResult<String> {
    if !path.is_file() {
        return Err(layout_error(root, &path));
    }
    std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))
}

fn read_part(root: &Path, part: &str, stream_base: u32) -> CliResult<Vec<SequenceWindow>> {
    let dir = root.join(part);
    let labels = parse_labels(&read(root, dir.join(format!("y_{part}.txt")))?)?;
    let mut signals = Vec::with_capacity(SIGNALS.len());
    for s in SIGNALS {
        let path = dir.join("Inertial Signals").join(format!("{s}_{part}.txt"));
        signals.push(parse_signal(&read(root, path)?)?);
    }
    Ok(assemble(&signals, &labels, stream_base)?)
}

fn decimate(w: &SequenceWindow, target_hz: f64) -> CliResult<SequenceWindow> {
    let stream = RawStream::unnamed(w.channels, w.values.clone(), SOURCE_HZ, None)?;
    let d = downsample(&stream, target_hz)?;
    Ok(SequenceWindow { channels: w.channels, steps: d.samples(), values: d.values().to_vec(), label: w.label, span: w.span })
}

/// Nine-channel windows with per-channel scaling fitted on the training part.
pub fn load(root: &Path, target_hz: Option<f64>) -> CliResult<DatasetSplit> {
    let mut train = read_part(root, "train", 0)?;
    let mut test = read_part(root, "test", train.len() as u32)?;
    if let Some(hz) = target_hz {
        if hz > SOURCE_HZ {
            return Err(CliError::Usage(format!("--target-hz {hz} exceeds the published {SOURCE_HZ} Hz")));
        }
        train = train.iter().map(|w| decimate(w, hz)).collect::<CliResult<_>>()?;
        test = test.iter().map(|w| decimate(w, hz)).collect::<CliResult<_>>()?;
    }
    let stats = NormalizerStats::fit_windows(&train, "train")?;
    let train = train.iter().map(|w| stats.apply(w)).collect::<Result<_, _>>()?;
    let test = test.iter().map(|w| stats.apply(w)).collect::<Result<_, _>>()?;
    Ok(DatasetSplit { train, test, num_classes: NUM_CLASSES, seed: 0, label_fraction: 1.0, normalizer: Some(stats) })
}

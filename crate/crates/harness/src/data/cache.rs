//! Dataset cache: one file per split.
//!
//! ```text
//! guided-gan dataset cache
//! schema 1
//! split <name>
//! channels <D>
//! steps <W>
//! classes <K>
//! seed <seed>
//! count <N>
//! normalizer none            | normalizer <fitted_on>
//!                            | min <D decimals>
//!                            | max <D decimals>
//! end
//! ```
//!
//! Each header line ends in `\n`. `N` records follow: label as `i32` (`-1`
//! when unlabelled), source stream and start as `u32`, then the `D × W`
//! values as `f32`, channel after channel. All binary fields are little-endian.

use std::fmt::Write as _;

use guided_gan_core::datapipe::{DatasetSplit, NormalizerStats, SequenceWindow, SourceSpan};

pub const MAGIC: &str = "guided-gan dataset cache";
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheHeader {
    pub split: String,
    pub channels: usize,
    pub steps: usize,
    pub classes: usize,
    pub seed: u64,
    pub normalizer: Option<NormalizerStats>,
}

pub fn encode(split: &DatasetSplit, part: Part) -> Vec<u8> {
    let (name, windows) = match part {
        Part::Train => ("train", &split.train),
        Part::Test => ("test", &split.test),
    };
    let header = CacheHeader {
        split: name.into(),
        channels: split.channels(),
        steps: split.steps(),
        classes: split.num_classes,
        seed: split.seed,
        normalizer: split.normalizer.clone(),
    };
    encode_windows(&header, windows)
}

pub fn encode_windows(h: &CacheHeader, windows: &[SequenceWindow]) -> Vec<u8> {
    let mut text = String::new();
    let _ = write!(
        text,
        "{MAGIC}\nschema {SCHEMA}\nsplit {}\nchannels {}\nsteps {}\nclasses {}\nseed {}\ncount {}\n",
        h.split,
        h.channels,
        h.steps,
        h.classes,
        h.seed,
        windows.len()
    );
    match &h.normalizer {
        None => text.push_str("normalizer none\n"),
        Some(n) => {
            let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
            let _ = write!(text, "normalizer {}\nmin {}\nmax {}\n", n.fitted_on, join(&n.min), join(&n.max));
        }
    }
    text.push_str("end\n");
    let mut out = text.into_bytes();
    out.reserve(windows.len() * (12 + 4 * h.channels * h.steps));
    for w in windows {
        out.extend(w.label.map_or(-1, |l| l as i32).to_le_bytes());
        out.extend(w.span.stream.to_le_bytes());
        out.extend(w.span.start.to_le_bytes());
        for &v in &w.values {
            out.extend((v as f32).to_le_bytes());
        }
    }
    out
}

fn take_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str, String> {
    let rest = &bytes[*pos..];
    let end = rest.iter().position(|&b| b == b'\n').ok_or("header is not terminated")?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).map_err(|_| "header is not text".to_string())
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str, String> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| format!("expected `{key} ...`, found {line:?}"))
}

fn num<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, String> {
    field(line, key)?.parse().map_err(|_| format!("bad value in {line:?}"))
}

fn decimals(line: &str, key: &str) -> Result<Vec<f64>, String> {
    field(line, key)?
        .split(' ')
        .map(|t| t.parse().map_err(|_| format!("bad number {t:?}")))
        .collect()
}

pub fn decode(bytes: &[u8]) -> Result<(CacheHeader, Vec<SequenceWindow>), String> {
    let mut pos = 0;
    if take_line(bytes, &mut pos)? != MAGIC {
        return Err("not a dataset cache file".into());
    }
    let schema: u32 = num(take_line(bytes, &mut pos)?, "schema")?;
    if schema != SCHEMA {
        return Err(format!("unsupported cache schema {schema}"));
    }
    let split = field(take_line(bytes, &mut pos)?, "split")?.to_string();
    let channels: usize = num(take_line(bytes, &mut pos)?, "channels")?;
    let steps: usize = num(take_line(bytes, &mut pos)?, "steps")?;
    let classes: usize = num(take_line(bytes, &mut pos)?, "classes")?;
    let seed: u64 = num(take_line(bytes, &mut pos)?, "seed")?;
    let count: usize = num(take_line(bytes, &mut pos)?, "count")?;
    let norm = field(take_line(bytes, &mut pos)?, "normalizer")?.to_string();
    let normalizer = if norm == "none" {
        None
    } else {
        let min = decimals(take_line(bytes, &mut pos)?, "min")?;
        let max = decimals(take_line(bytes, &mut pos)?, "max")?;
        Some(NormalizerStats::from_bounds(min, max, &norm).map_err(|e| e.to_string())?)
    };
    if take_line(bytes, &mut pos)? != "end" {
        return Err("missing `end` after header".into());
    }
    let n = channels * steps;
    let record = 12 + 4 * n;
    let body = &bytes[pos..];
    if body.len() != count * record {
        return Err(format!("expected {count} records of {record} bytes, found {} bytes", body.len()));
    }
    let word = |b: &[u8], i: usize| [b[i], b[i + 1], b[i + 2], b[i + 3]];
    let windows = body
        .chunks_exact(record)
        .map(|r| {
            let label = i32::from_le_bytes(word(r, 0));
            SequenceWindow {
                channels,
                steps,
                values: (0..n).map(|k| f64::from(f32::from_le_bytes(word(r, 12 + 4 * k)))).collect(),
                label: (label >= 0).then_some(label as usize),
                span: SourceSpan { stream: u32::from_le_bytes(word(r, 4)), start: u32::from_le_bytes(word(r, 8)) },
            }
        })
        .collect();
    Ok((CacheHeader { split, channels, steps, classes, seed, normalizer }, windows))
}

pub mod generate;
pub mod probe;
pub mod report;
pub mod train;

use std::path::{Path, PathBuf};

use guided_gan_core::frameworks::LossReport;

/// Loss columns in `LossReport::values` order.
pub const LOSS_COLUMNS: [&str; 7] = ["d_loss", "g_loss", "e_loss", "recon_x", "recon_z", "kl", "ce"];

/// Shortest round-trip decimal, empty for a missing value.
pub fn csv_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-loss `(epoch, mean)` series, skipping losses the framework never reports.
pub fn epoch_series(history: &[(usize, LossReport)]) -> Vec<(String, Vec<(f64, f64)>)> {
    LOSS_COLUMNS
        .iter()
        .enumerate()
        .filter_map(|(i, name)| {
            let pts: Vec<(f64, f64)> =
                history.iter().filter_map(|(e, r)| r.values()[i].map(|v| (*e as f64, v))).collect();
            (!pts.is_empty()).then(|| (name.to_string(), pts))
        })
        .collect()
}

/// Reads back an `epochs.csv` written by `train`.
pub fn read_epoch_csv(path: &Path) -> Option<Vec<(usize, LossReport)>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 2 + LOSS_COLUMNS.len() {
            return None;
        }
        let v: Vec<Option<f64>> = cells[2..].iter().map(|c| c.parse().ok()).collect();
        let r = LossReport { d_loss: v[0], g_loss: v[1], e_loss: v[2], recon_x: v[3], recon_z: v[4], kl: v[5], ce: v[6] };
        out.push((cells[0].parse().ok()?, r));
    }
    Some(out)
}

/// The run directory a checkpoint belongs to (`<run>/checkpoints/x.ggck`).
pub fn run_dir_of(checkpoint: &Path) -> PathBuf {
    let parent = checkpoint.parent().unwrap_or(Path::new("."));
    if parent.file_name().is_some_and(|n| n == "checkpoints") {
        parent.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        parent.to_path_buf()
    }
}

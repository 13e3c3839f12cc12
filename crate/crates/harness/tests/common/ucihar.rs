//! A miniature UCI HAR directory tree.

use std::fmt::Write as _;
use std::path::Path;

const SIGNALS: [&str; 9] = [
    "body_acc_x",
    "body_acc_y",
    "body_acc_z",
    "body_gyro_x",
    "body_gyro_y",
    "body_gyro_z",
    "total_acc_x",
    "total_acc_y",
    "total_acc_z",
];

/// Signal `s`, window `i`, sample `t` of part `p`; distinct and exactly representable.
pub fn sample(p: usize, s: usize, i: usize, t: usize) -> f64 {
    (p * 13 + s * 100 + i * 10) as f64 * 0.25 + t as f64 * 0.125 - 100.0
}

pub fn fake_ucihar(root: &Path, windows: [usize; 2]) {
    for (p, part) in ["train", "test"].iter().enumerate() {
        let dir = root.join(part).join("Inertial Signals");
        std::fs::create_dir_all(&dir).unwrap();
        let labels: String = (0..windows[p]).map(|i| format!("{}\n", i % 6 + 1)).collect();
        std::fs::write(root.join(part).join(format!("y_{part}.txt")), labels).unwrap();
        for (s, name) in SIGNALS.iter().enumerate() {
            let mut text = String::new();
            for i in 0..windows[p] {
                for t in 0..128 {
                    let _ = write!(text, "  {:e}", sample(p, s, i, t));
                }
                text.push('\n');
            }
            std::fs::write(dir.join(format!("{name}_{part}.txt")), text).unwrap();
        }
    }
}

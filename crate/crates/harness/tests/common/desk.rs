//! The desk-scale MNIST record and the thresholds it is judged against.

use std::path::{Path, PathBuf};

use guided_gan_core::evalkit::{Development, Evaluation, FaithfulnessTable, TrackedRun};
use serde::{Deserialize, Serialize};

pub const SEEDS: [u64; 3] = [1, 2, 3];
pub const EPOCHS: usize = 100;
pub const TRAIN_LIMIT: usize = 10_000;

/// Guided probe accuracy floor, required on at least `FLOOR_SEEDS` seeds.
pub const ACCURACY_FLOOR: f64 = 0.90;
pub const FLOOR_SEEDS: usize = 2;
/// Guided minus unguided final accuracy.
pub const ABLATION_MARGIN: f64 = 0.10;
/// Final cycle error must be at most this fraction of the epoch-1 value.
pub const CYCLE_RATIO: f64 = 0.5;
/// Largest allowed gap between (reconstructed, reconstructed) and (original, original) accuracy.
pub const FAITHFULNESS_GAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Faithfulness {
    pub train_test: f64,
    pub train_rec_test: f64,
    pub rec_train_test: f64,
    pub rec_train_rec_test: f64,
}

impl Faithfulness {
    pub fn from_table(t: &FaithfulnessTable) -> Self {
        let acc = |d, e| t.get(d, e).expect("four rows").accuracy;
        Self {
            train_test: acc(Development::Train, Evaluation::Test),
            train_rec_test: acc(Development::Train, Evaluation::ReconstructedTest),
            rec_train_test: acc(Development::ReconstructedTrain, Evaluation::Test),
            rec_train_rec_test: acc(Development::ReconstructedTrain, Evaluation::ReconstructedTest),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub guided: TrackedRun,
    pub rbigan: TrackedRun,
    pub rgan: TrackedRun,
    pub rand: TrackedRun,
    pub faithfulness: Option<Faithfulness>,
    pub minutes: f64,
}

impl SeedRecord {
    pub fn is_complete(&self) -> bool {
        [&self.guided, &self.rgan, &self.rand, &self.rbigan].iter().all(|r| r.last().is_some())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeskRecord {
    pub seeds: Vec<SeedRecord>,
}

pub fn record_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance/desk_mnist.json")
}

impl DeskRecord {
    pub fn load(path: &Path) -> Option<Self> {
        serde_json::from_slice(&std::fs::read(path).ok()?).ok()
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(path.parent().expect("parent"))?;
        std::fs::write(path, serde_json::to_vec_pretty(self)?)
    }

    fn complete(&self) -> Result<Vec<&SeedRecord>, String> {
        let done: Vec<_> = SEEDS
            .iter()
            .filter_map(|s| self.seeds.iter().find(|r| r.seed == *s && r.is_complete()))
            .collect();
        if done.len() < SEEDS.len() {
            return Err(format!("only {}/{} seeds recorded", done.len(), SEEDS.len()));
        }
        Ok(done)
    }
}

fn final_acc(r: &TrackedRun) -> f64 {
    r.last().map_or(f64::NAN, |p| p.accuracy)
}

/// Guided beats RGAN and RAND on every seed and clears the floor on enough seeds.
pub fn judge_probe(rec: &DeskRecord) -> Result<String, String> {
    let seeds = rec.complete()?;
    let mut floor = 0;
    let mut parts = Vec::new();
    let mut ordered = true;
    for s in &seeds {
        let (g, r, n) = (final_acc(&s.guided), final_acc(&s.rgan), final_acc(&s.rand));
        ordered &= g > r && g > n;
        floor += usize::from(g >= ACCURACY_FLOOR);
        parts.push(format!("seed {}: guided {:.4} rgan {:.4} rand {:.4}", s.seed, g, r, n));
    }
    let msg = parts.join("; ");
    if ordered && floor >= FLOOR_SEEDS {
        Ok(msg)
    } else {
        Err(format!("{msg} (ordering held: {ordered}, floor met on {floor} seeds)"))
    }
}

/// Majority of seeds: guided beats the unguided arm by the margin and its cycle error shrinks.
pub fn judge_ablation(rec: &DeskRecord) -> Result<String, String> {
    let seeds = rec.complete()?;
    let mut ok = 0;
    let mut parts = Vec::new();
    for s in &seeds {
        let gap = final_acc(&s.guided) - final_acc(&s.rbigan);
        let first = s.guided.points.first().and_then(|p| p.cycle_error);
        let last = s.guided.last().and_then(|p| p.cycle_error);
        let ratio = match (first, last) {
            (Some(a), Some(b)) if a > 0.0 => b / a,
            _ => f64::NAN,
        };
        let pass = gap >= ABLATION_MARGIN && ratio <= CYCLE_RATIO;
        ok += usize::from(pass);
        parts.push(format!("seed {}: gap {:.4}, cycle ratio {:.3}{}", s.seed, gap, ratio, if pass { "" } else { " (miss)" }));
    }
    let msg = parts.join("; ");
    if 2 * ok > seeds.len() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// The reconstructed/reconstructed probe stays within the gap of the original one on every seed.
pub fn judge_faithfulness(rec: &DeskRecord) -> Result<String, String> {
    let seeds = rec.complete()?;
    let mut parts = Vec::new();
    let mut all = true;
    for s in &seeds {
        match s.faithfulness {
            Some(f) => {
                let gap = (f.rec_train_rec_test - f.train_test).abs();
                all &= gap <= FAITHFULNESS_GAP;
                parts.push(format!("seed {}: {:.4} vs {:.4}", s.seed, f.rec_train_rec_test, f.train_test));
            }
            None => {
                all = false;
                parts.push(format!("seed {}: guided run failed", s.seed));
            }
        }
    }
    let msg = parts.join("; ");
    if all {
        Ok(msg)
    } else {
        Err(msg)
    }
}

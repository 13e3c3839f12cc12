//! Frozen-feature evaluation: linear probes, parameter audits, label-fraction
//! sweeps, reconstruction faithfulness and the guidance ablation.

mod ablation;
mod faithfulness;
mod features;
mod metrics;
mod probe;
mod sweep;

pub use ablation::{bigan_ablation, cycle_error, train_and_track, AblationConfig, AblationRecord, TrackPoint, TrackedRun};
pub use faithfulness::{
    faithfulness_from_features, faithfulness_study, Development, Evaluation, FaithfulnessRow, FaithfulnessTable,
};
pub use features::{extract_features, feature_set, param_checksum, FeatureSet, FeatureSource};
pub use metrics::{metrics, Confusion, Metrics};
pub use probe::{linear_probe, param_audit, probe_param_count, with_frozen, ParamAudit, ProbeConfig, ProbeResult};
pub use sweep::{label_fraction_sweep, mean_std, SweepConfig, SweepPoint, DEFAULT_FRACTIONS};

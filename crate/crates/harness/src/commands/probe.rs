use std::fmt::Write as _;

use guided_gan_core::evalkit::{
    faithfulness_study, feature_set, label_fraction_sweep, linear_probe, param_audit, with_frozen, FeatureSet,
    FeatureSource, ProbeResult, SweepConfig,
};
use guided_gan_core::frameworks::FrameworkId;
use guided_gan_core::netcore::HiddenPooling;
use serde::{Deserialize, Serialize};

use super::run_dir_of;
use crate::checkpoint;
use crate::cli::{FeatureArg, PoolingArg, ProbeArgs};
use crate::data;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_out, ManifestGuard, RunManifest, Status};
use crate::plots;

pub const RESULT: &str = "probe.json";
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema: u32,
    pub framework: FrameworkId,
    pub features: FeatureSource,
    pub checkpoint: String,
    pub checkpoint_epoch: usize,
    pub result: ProbeResult,
}

fn source(args: &ProbeArgs) -> FeatureSource {
    match args.features {
        FeatureArg::Encoder => FeatureSource::Encoder,
        FeatureArg::Discriminator => FeatureSource::Discriminator(match args.pooling {
            PoolingArg::Final => HiddenPooling::Final,
            PoolingArg::Mean => HiddenPooling::Mean,
        }),
    }
}

fn embeddings_csv(set: &FeatureSet) -> String {
    let mut s = String::from("label");
    for j in 0..set.dim() {
        let _ = write!(s, ",f{j}");
    }
    s.push('\n');
    for (i, y) in set.labels.iter().enumerate() {
        let _ = write!(s, "{y}");
        for v in set.features.row(i) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// The serde name of a unit enum variant.
fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec_pretty(v).expect("serializable")
}

pub fn run(args: &ProbeArgs) -> CliResult<()> {
    let ck = checkpoint::load(&args.checkpoint)?;
    let bundle = &ck.bundle;
    let fw = bundle.framework;
    if let Some(want) = args.framework {
        if want != fw {
            return Err(CliError::Usage(format!(
                "{} holds a {fw} model, not {want}",
                args.checkpoint.display()
            )));
        }
    }
    let source = source(args);
    match source {
        FeatureSource::Encoder if bundle.encoder.is_none() => {
            return Err(CliError::Usage(format!(
                "{fw} has no encoder to read features from; probe its discriminator with --features discriminator"
            )))
        }
        FeatureSource::Discriminator(_) if bundle.discriminator.is_none() => {
            return Err(CliError::Usage(format!("{fw} has no discriminator; use --features encoder")))
        }
        _ => {}
    }
    if args.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(CliError::Usage("--fractions must lie in (0, 1]".into()));
    }
    if !args.fractions.is_empty() && args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let mut cfg = ck.header.config.clone();
    if let Some(dir) = &args.data_dir {
        cfg.data.data_dir = Some(dir.clone());
    }
    let mut probe_cfg = cfg.run.probe_config();
    if let Some(e) = args.probe_epochs {
        probe_cfg.epochs = e;
    }
    if let Some(s) = args.probe_seed {
        probe_cfg.seed = s;
    }
    let split = cfg.data.load()?;
    if split.channels() != bundle.dims.channels || split.steps() != bundle.dims.steps {
        return Err(CliError::Usage(format!(
            "dataset windows are {}×{} but the checkpoint expects {}×{}",
            split.channels(),
            split.steps(),
            bundle.dims.channels,
            bundle.dims.steps
        )));
    }
    let out = args.out.clone().unwrap_or_else(|| run_dir_of(&args.checkpoint).join("probe"));
    prepare_out(&out, args.force)?;
    let mut manifest = RunManifest::new(format!("probe-{fw}-epoch{}", ck.header.epoch), "probe");
    manifest.config_hash = Some(cfg.hash());
    manifest.dataset_fingerprint = Some(data::fingerprint(&split));
    manifest.seeds.insert("probe".into(), probe_cfg.seed);
    if !args.fractions.is_empty() {
        manifest.seeds.insert("subset".into(), args.subset_seed);
    }
    let mut guard = ManifestGuard::start(&out, manifest)?;

    let result = (|| -> CliResult<()> {
        let k = split.num_classes;
        let train = feature_set(bundle, &split.train, source)?;
        let test = feature_set(bundle, &split.test, source)?;
        let audit = param_audit(Some(bundle), source, train.dim(), k);
        let r = with_frozen(linear_probe(&train, &test, k, &probe_cfg)?, audit.frozen);
        log::info!(
            "{fw}: accuracy {:.4}, macro F1 {:.4}, trainable {} / frozen {}",
            r.accuracy,
            r.macro_f1,
            r.trainable_params,
            r.frozen_params
        );
        plots::confusion_heatmap(&r.confusion, &format!("{fw} probe"), &out.join("confusion.svg"))?;
        guard.record("confusion.svg")?;
        let report = ProbeReport {
            schema: SCHEMA,
            framework: fw,
            features: source,
            checkpoint: args.checkpoint.display().to_string(),
            checkpoint_epoch: ck.header.epoch,
            result: r,
        };
        guard.write_artifact(RESULT, &json(&report))?;

        if args.export_embeddings {
            guard.write_artifact("embeddings_train.csv", embeddings_csv(&train).as_bytes())?;
            guard.write_artifact("embeddings_test.csv", embeddings_csv(&test).as_bytes())?;
        }
        if !args.fractions.is_empty() {
            let sweep_cfg = SweepConfig {
                fractions: args.fractions.clone(),
                runs: args.runs,
                subset_seed: args.subset_seed,
                probe: probe_cfg.clone(),
            };
            let points = label_fraction_sweep(&train, &test, k, &sweep_cfg)?;
            let mut csv = String::from("fraction,run,accuracy\n");
            for p in &points {
                for (run, a) in p.accuracies.iter().enumerate() {
                    let _ = writeln!(csv, "{},{run},{}", p.fraction, a.map(|a| a.to_string()).unwrap_or_default());
                }
                log::info!("fraction {}: mean {:.4} ± {:.4}", p.fraction, p.mean, p.std);
            }
            guard.write_artifact("sweep.csv", csv.as_bytes())?;
            guard.write_artifact("sweep.json", &json(&points))?;
        }
        if args.faithfulness {
            if bundle.generator.is_none() || bundle.encoder.is_none() {
                return Err(CliError::Usage(format!("{fw} cannot reconstruct; faithfulness needs an encoder and a generator")));
            }
            let table = faithfulness_study(bundle, &split, source, &probe_cfg)?;
            let mut csv = String::from("development,evaluation,accuracy,macro_f1\n");
            for row in &table.rows {
                let _ = writeln!(csv, "{},{},{},{}", tag(&row.development), tag(&row.evaluation), row.accuracy, row.macro_f1);
            }
            guard.write_artifact("faithfulness.csv", csv.as_bytes())?;
            guard.write_artifact("faithfulness.json", &json(&table))?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => guard.finish(Status::Completed, None),
        Err(e) => {
            guard.finish(Status::Failed, Some(e.to_string()))?;
            Err(e)
        }
    }
}


use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use guided_gan_core::datapipe::DatasetSplit;
use guided_gan_core::evalkit::{feature_set, linear_probe, FeatureSource};
use guided_gan_core::frameworks::{BatchRecord, EpochRecord, LossReport, ModelBundle, TrainObserver, Trainer};
use guided_gan_core::netcore::HiddenPooling;
use guided_gan_core::Error;
use toml::Value;

use super::{csv_opt, epoch_series, LOSS_COLUMNS};
use crate::checkpoint;
use crate::cli::TrainArgs;
use crate::config::RunConfig;
use crate::data;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_out, ManifestGuard, RunManifest, Status};
use crate::plots;

pub const LOSSES: &str = "losses.csv";
pub const EPOCHS: &str = "epochs.csv";
pub const TRACK: &str = "probe_track.csv";
pub const CONFIG: &str = "config.toml";
pub const FINAL_CHECKPOINT: &str = "checkpoints/final.ggck";

/// File defaults, then `--config`, then `--set`, then the dedicated flags.
pub fn build_config(args: &TrainArgs) -> CliResult<RunConfig> {
    for (flag, v) in [("--lambda-x", args.lambda_x), ("--lambda-z", args.lambda_z)] {
        if let Some(v) = v {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Usage(format!("{flag} must be a non-negative number, got {v}")));
            }
        }
    }
    let mut table = RunConfig::default().to_table();
    if let Some(path) = &args.config {
        table.extend(RunConfig::read_table(path)?);
    }
    table.extend(args.set.iter().cloned());
    let mut put = |k: &str, v: Value| {
        table.insert(k.to_string(), v);
    };
    if let Some(f) = args.framework {
        put("framework", Value::String(f.as_str().into()));
    }
    if let Some(d) = args.dataset {
        put("dataset", Value::try_from(d).expect("serializable"));
    }
    if let Some(p) = &args.data_dir {
        put("data_dir", Value::String(p.display().to_string()));
    }
    let int = |v: u64| Value::Integer(v as i64);
    if let Some(v) = args.train_limit {
        put("train_limit", int(v as u64));
    }
    if let Some(v) = args.epochs {
        put("epochs", int(v as u64));
    }
    if let Some(v) = args.seed {
        put("seed", int(v));
    }
    if let Some(v) = args.lambda_x {
        put("lambda_x", Value::Float(v));
    }
    if let Some(v) = args.lambda_z {
        put("lambda_z", Value::Float(v));
    }
    if let Some(v) = args.batch_size {
        put("batch_size", int(v as u64));
    }
    if let Some(v) = args.learning_rate {
        put("learning_rate", Value::Float(v));
    }
    if let Some(v) = args.checkpoint_every {
        put("checkpoint_every", int(v as u64));
    }
    if let Some(v) = args.probe_every {
        put("probe_every", int(v as u64));
    }
    let cfg = RunConfig::from_table(table)?;
    cfg.validate()?;
    Ok(cfg)
}

fn dataset_name(cfg: &RunConfig) -> String {
    Value::try_from(cfg.data.dataset).expect("serializable").as_str().unwrap_or("data").to_string()
}

struct RunObserver<'a> {
    guard: &'a mut ManifestGuard,
    cfg: &'a RunConfig,
    split: &'a DatasetSplit,
    losses: BufWriter<File>,
    epochs: BufWriter<File>,
    track: Option<BufWriter<File>>,
    history: Vec<(usize, LossReport)>,
}

fn csv_file(guard: &mut ManifestGuard, name: &str, header: &str) -> CliResult<BufWriter<File>> {
    let path = guard.dir().join(name);
    let mut w = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
    writeln!(w, "{header}").map_err(|e| CliError::io(&path, e))?;
    guard.record(name)?;
    Ok(w)
}

fn loss_cells(r: &LossReport) -> String {
    r.values().iter().map(|v| csv_opt(*v)).collect::<Vec<_>>().join(",")
}

fn obs<E: std::fmt::Display>(e: E) -> Error {
    Error::Observer(e.to_string())
}

impl RunObserver<'_> {
    fn checkpoint(&mut self, bundle: &ModelBundle<f32>, done: usize) -> CliResult<()> {
        let name = if done == self.cfg.model.epochs {
            FINAL_CHECKPOINT.to_string()
        } else {
            format!("checkpoints/epoch_{done:04}.ggck")
        };
        let bytes = checkpoint::encode(self.cfg, bundle, self.split.num_classes, done);
        self.guard.write_artifact(&name, &bytes)?;
        Ok(())
    }

    fn probe(&mut self, bundle: &ModelBundle<f32>, done: usize) -> CliResult<()> {
        let source = if bundle.encoder.is_some() {
            FeatureSource::Encoder
        } else {
            FeatureSource::Discriminator(HiddenPooling::Final)
        };
        let tr = feature_set(bundle, &self.split.train, source)?;
        let te = feature_set(bundle, &self.split.test, source)?;
        let r = linear_probe(&tr, &te, self.split.num_classes, &self.cfg.run.probe_config())?;
        log::info!("epoch {done}: probe accuracy {:.4}, macro F1 {:.4}", r.accuracy, r.macro_f1);
        if self.track.is_none() {
            self.track = Some(csv_file(self.guard, TRACK, "epoch,accuracy,macro_f1")?);
        }
        let w = self.track.as_mut().expect("opened");
        writeln!(w, "{done},{},{}", r.accuracy, r.macro_f1).and_then(|_| w.flush()).map_err(|e| CliError::Runtime(e.to_string()))
    }
}

impl TrainObserver<f32> for RunObserver<'_> {
    fn on_batch(&mut self, r: &BatchRecord) -> guided_gan_core::Result<()> {
        writeln!(self.losses, "{},{},{},{}", r.epoch + 1, r.step, r.size, loss_cells(&r.report)).map_err(obs)
    }

    fn on_epoch(&mut self, r: &EpochRecord, bundle: &ModelBundle<f32>) -> guided_gan_core::Result<bool> {
        let done = r.epoch + 1;
        writeln!(self.epochs, "{done},{},{}", r.batches, loss_cells(&r.mean)).map_err(obs)?;
        self.losses.flush().map_err(obs)?;
        self.epochs.flush().map_err(obs)?;
        self.history.push((done, r.mean));
        let cells: Vec<String> = LOSS_COLUMNS
            .iter()
            .zip(r.mean.values())
            .filter_map(|(n, v)| v.map(|v| format!("{n} {v:.4}")))
            .collect();
        log::info!("epoch {done}/{}: {}", self.cfg.model.epochs, cells.join(", "));
        let every = self.cfg.run.probe_every;
        if every > 0 && done % every == 0 {
            self.probe(bundle, done).map_err(obs)?;
        }
        let save = done % self.cfg.run.checkpoint_every == 0 || done == self.cfg.model.epochs;
        if save {
            self.checkpoint(bundle, done).map_err(obs)?;
        }
        Ok(save)
    }
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let cfg = build_config(args)?;
    if args.print_config {
        print!("{}", cfg.snapshot());
        return Ok(());
    }
    cfg.data.resolve_dir()?;
    let out = args.out.clone().unwrap_or_else(|| {
        PathBuf::from("runs").join(format!("{}-{}-seed{}", cfg.model.framework, dataset_name(&cfg), cfg.model.seed))
    });
    let split = cfg.data.load()?;
    prepare_out(&out, args.force)?;

    let hash = cfg.hash();
    let mut manifest = RunManifest::new(
        format!("{}-{}-seed{}-{}", cfg.model.framework, dataset_name(&cfg), cfg.model.seed, &hash[..8]),
        "train",
    );
    manifest.config_snapshot = Some(CONFIG.into());
    manifest.config_hash = Some(hash);
    manifest.dataset_fingerprint = Some(data::fingerprint(&split));
    manifest.seeds.insert("model".into(), cfg.model.seed);
    manifest.seeds.insert("data".into(), cfg.data.data_seed);
    manifest.seeds.insert("probe".into(), cfg.run.probe_seed);
    let mut guard = ManifestGuard::start(&out, manifest)?;
    guard.write_artifact(CONFIG, cfg.snapshot().as_bytes())?;
    log::info!(
        "training {} on {} ({} train / {} test windows, {}×{}) into {}",
        cfg.model.framework,
        dataset_name(&cfg),
        split.train.len(),
        split.test.len(),
        split.channels(),
        split.steps(),
        out.display()
    );

    let header = format!("epoch,step,size,{}", LOSS_COLUMNS.join(","));
    let losses = csv_file(&mut guard, LOSSES, &header)?;
    let epochs = csv_file(&mut guard, EPOCHS, &format!("epoch,batches,{}", LOSS_COLUMNS.join(",")))?;
    let mut trainer = Trainer::<f32>::new(&cfg.model, split.channels(), split.steps(), Some(split.num_classes))?;
    let mut observer = RunObserver { guard: &mut guard, cfg: &cfg, split: &split, losses, epochs, track: None, history: Vec::new() };
    let result = if cfg.model.framework == guided_gan_core::frameworks::FrameworkId::Rand {
        // nothing to fit; the initial weights are the model
        observer.checkpoint(&trainer.bundle, cfg.model.epochs).map_err(obs)
    } else {
        trainer.fit(&split.train, &mut observer)
    };
    let history = std::mem::take(&mut observer.history);
    drop(observer);
    match result {
        Ok(()) => {
            if !history.is_empty() {
                let plot = "plots/losses.svg";
                std::fs::create_dir_all(out.join("plots")).map_err(|e| CliError::io(&out, e))?;
                plots::loss_curves(&epoch_series(&history), &format!("{} losses", cfg.model.framework), &out.join(plot))?;
                guard.record(plot)?;
            }
            guard.finish(Status::Completed, None)
        }
        Err(e @ Error::Diverged { .. }) => {
            let msg = e.to_string();
            guard.finish(Status::Diverged, Some(msg.clone()))?;
            Err(CliError::Runtime(msg))
        }
        Err(e) => {
            let msg = e.to_string();
            guard.finish(Status::Failed, Some(msg.clone()))?;
            Err(CliError::Runtime(msg))
        }
    }
}

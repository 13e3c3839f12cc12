use guided_gan_core::datapipe::{SequenceWindow, SourceSpan};
use guided_gan_core::frameworks::reconstruct;
use guided_gan_core::netcore::sample_prior;
use guided_gan_core::rng::{Purpose, SeedTree};

use super::run_dir_of;
use crate::checkpoint;
use crate::cli::GenerateArgs;
use crate::data::cache::{encode_windows, CacheHeader};
use crate::data;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_out, ManifestGuard, RunManifest, Status};
use crate::plots;

pub const SAMPLES: &str = "generated.ggds";
pub const RECONSTRUCTED: &str = "reconstructed.ggds";

/// MNIST-shaped windows also get a picture.
fn is_image(w: &SequenceWindow) -> bool {
    w.channels == 28 && w.steps == 28
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let ck = checkpoint::load(&args.checkpoint)?;
    let bundle = &ck.bundle;
    let fw = bundle.framework;
    let gen = bundle
        .generator
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{fw} has no generator to sample from")))?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if args.reconstruct && bundle.encoder.is_none() {
        return Err(CliError::Usage(format!("{fw} has no encoder; --reconstruct needs one")));
    }
    let mut cfg = ck.header.config.clone();
    if let Some(dir) = &args.data_dir {
        cfg.data.data_dir = Some(dir.clone());
    }
    let split = if args.reconstruct { Some(cfg.data.load()?) } else { None };
    let out = args.out.clone().unwrap_or_else(|| run_dir_of(&args.checkpoint).join("generated"));
    prepare_out(&out, args.force)?;
    let mut manifest = RunManifest::new(format!("generate-{fw}-seed{}", args.seed), "generate");
    manifest.config_hash = Some(cfg.hash());
    manifest.dataset_fingerprint = split.as_ref().map(data::fingerprint);
    manifest.seeds.insert("generate".into(), args.seed);
    let mut guard = ManifestGuard::start(&out, manifest)?;

    let result = (|| -> CliResult<()> {
        let (c, w) = (bundle.dims.channels, bundle.dims.steps);
        let mut rng = SeedTree::new(args.seed).fork(Purpose::Generate);
        let z = sample_prior::<f32>(args.n, bundle.dims.latent, &mut rng);
        let x = gen.forward(&z, w)?.output;
        let samples: Vec<SequenceWindow> = (0..args.n)
            .map(|b| SequenceWindow {
                channels: c,
                steps: w,
                values: x.window(b),
                label: None,
                span: SourceSpan { stream: 0, start: b as u32 },
            })
            .collect();
        let header = CacheHeader {
            split: "generated".into(),
            channels: c,
            steps: w,
            classes: ck.header.classes,
            seed: args.seed,
            normalizer: None,
        };
        guard.write_artifact(SAMPLES, &encode_windows(&header, &samples))?;
        if is_image(&samples[0]) {
            let refs: Vec<&SequenceWindow> = samples.iter().collect();
            plots::window_grid(&refs, 8, &out.join("generated.png"))?;
            guard.record("generated.png")?;
        }
        log::info!("{} samples from {fw} written to {}", args.n, out.display());

        if let Some(split) = &split {
            let originals: Vec<SequenceWindow> = split.test.iter().take(args.n).cloned().collect();
            let rec = reconstruct(bundle, &originals)?;
            let header = CacheHeader { split: "reconstructed".into(), normalizer: split.normalizer.clone(), ..header };
            guard.write_artifact(RECONSTRUCTED, &encode_windows(&header, &rec))?;
            if is_image(&rec[0]) {
                // original on the left, its reconstruction on the right
                let tiles: Vec<&SequenceWindow> = originals.iter().zip(&rec).flat_map(|(o, r)| [o, r]).collect();
                plots::window_grid(&tiles, 2, &out.join("pairs.png"))?;
                guard.record("pairs.png")?;
            }
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

use guided_gan_core::datapipe::{synth_har, DatasetSplit, SynthHarConfig};
use guided_gan_core::frameworks::{train, FrameworkConfig, FrameworkId, Silent, Trainer};
use guided_gan_core::netcore::Module;
use guided_gan_core::Error;

fn split() -> DatasetSplit {
    synth_har(&SynthHarConfig { classes: 3, channels: 2, window: 6, per_class: 12, seed: 2, ..Default::default() }).unwrap()
}

fn cfg(framework: FrameworkId) -> FrameworkConfig {
    FrameworkConfig {
        framework,
        epochs: 2,
        batch_size: 8,
        latent_dim: 4,
        hidden_dim: 5,
        projection_dim: 3,
        seed: 17,
        ..FrameworkConfig::default()
    }
}

#[test]
fn every_framework_trains_deterministically() {
    let s = split();
    for fw in FrameworkId::ALL {
        let c = cfg(fw);
        let (b1, r1) = train::<f32>(&c, &s.train, 3, &mut Silent).unwrap();
        let (b2, r2) = train::<f32>(&c, &s.train, 3, &mut Silent).unwrap();
        assert_eq!(r1, r2, "{fw}");
        assert_eq!(b1.named_tensors(""), b2.named_tensors(""), "{fw}");
        let batches = s.train.len().div_ceil(8) * 2;
        if fw == FrameworkId::Rand {
            assert!(r1.batches.is_empty());
            assert_eq!(b1.step, 0);
        } else {
            assert_eq!(r1.batches.len(), batches, "{fw}");
            assert_eq!(b1.step, batches as u64, "{fw}");
            assert!(r1.batches.iter().all(|b| b.report.is_finite()), "{fw}");
        }
    }
}

#[test]
fn different_seeds_give_different_models() {
    let s = split();
    let a = train::<f32>(&cfg(FrameworkId::GuidedGan), &s.train, 3, &mut Silent).unwrap().0;
    let b = train::<f32>(&FrameworkConfig { seed: 18, ..cfg(FrameworkId::GuidedGan) }, &s.train, 3, &mut Silent).unwrap().0;
    assert_ne!(a.named_tensors(""), b.named_tensors(""));
}

#[test]
fn adversarial_losses_start_near_chance() {
    // with small initial logits D's two terms are each close to ln 2
    let s = split();
    let mut t = Trainer::<f64>::new(&cfg(FrameworkId::Rgan), 2, 6, Some(3)).unwrap();
    let first = t.run_epoch(&s.train, &mut Silent).unwrap();
    let d = first.mean.d_loss.unwrap();
    assert!((d - 2.0 * std::f64::consts::LN_2).abs() < 0.2, "{d}");
}

#[test]
fn exploding_learning_rate_reports_divergence() {
    let s = split();
    let c = FrameworkConfig { learning_rate: 3e38, epochs: 20, ..cfg(FrameworkId::RaeL2) };
    match train::<f32>(&c, &s.train, 3, &mut Silent) {
        Err(Error::Diverged { step, last_checkpoint }) => {
            assert!(step <= 20 * 4);
            assert_eq!(last_checkpoint, None);
        }
        other => panic!("expected divergence, got {:?}", other.map(|(_, r)| r.epochs.len())),
    }
}

#[test]
fn mismatched_windows_are_rejected() {
    let s = split();
    let mut t = Trainer::<f32>::new(&cfg(FrameworkId::Rgan), 3, 6, None).unwrap();
    assert!(matches!(t.run_epoch(&s.train, &mut Silent), Err(Error::Shape(_))));
}

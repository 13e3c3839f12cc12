use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{HiddenPooling, LstmInit};

/// The trainable frameworks plus the two reference extractors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameworkId {
    /// Recurrent GAN: generator + data-space discriminator.
    Rgan,
    /// Recurrent flipped adversarial autoencoder: RGAN + latent-regressing encoder.
    Rfaae,
    /// Recurrent BiGAN: joint data-latent discriminator.
    Rbigan,
    /// Recurrent BiGAN plus data- and latent-space reconstruction guidance.
    GuidedGan,
    RaeL1,
    RaeL2,
    /// Recurrent variational autoencoder (Motion2Vector).
    M2v,
    /// Encoder + linear head trained with labels.
    Sup,
    /// Frozen, randomly initialised encoder.
    Rand,
}

impl FrameworkId {
    pub const ALL: [FrameworkId; 9] = [
        Self::Rgan,
        Self::Rfaae,
        Self::Rbigan,
        Self::GuidedGan,
        Self::RaeL1,
        Self::RaeL2,
        Self::M2v,
        Self::Sup,
        Self::Rand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rgan => "rgan",
            Self::Rfaae => "rfaae",
            Self::Rbigan => "rbigan",
            Self::GuidedGan => "guided_gan",
            Self::RaeL1 => "rae_l1",
            Self::RaeL2 => "rae_l2",
            Self::M2v => "m2v",
            Self::Sup => "sup",
            Self::Rand => "rand",
        }
    }

    pub fn is_adversarial(self) -> bool {
        matches!(self, Self::Rgan | Self::Rfaae | Self::Rbigan | Self::GuidedGan)
    }

    pub fn has_generator(self) -> bool {
        !matches!(self, Self::Sup | Self::Rand)
    }

    pub fn has_encoder(self) -> bool {
        !matches!(self, Self::Rgan)
    }

    pub fn uses_joint_discriminator(self) -> bool {
        matches!(self, Self::Rbigan | Self::GuidedGan)
    }
}

impl fmt::Display for FrameworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameworkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown framework {s:?}")))
    }
}

/// Objective the generator (and encoder) minimise against the discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorLoss {
    /// `log(1 - D(fake))`, the literal minimax form.
    Minimax,
    /// `-log D(fake)`.
    #[default]
    NonSaturating,
}

/// How squared reconstruction errors are reduced within one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconReduction {
    /// Sum over all entries of the sample (squared vector norm).
    #[default]
    Sum,
    /// Mean over entries.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameworkConfig {
    pub framework: FrameworkId,
    pub lambda_x: f64,
    pub lambda_z: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub projection_dim: usize,
    pub seed: u64,
    pub generator_loss: GeneratorLoss,
    pub recon_reduction: ReconReduction,
    /// RFAAE only: also score `G(E(x))` as fake in the generator/encoder
    /// objective so the encoder receives adversarial feedback.
    pub faae_adversarial_encoder: bool,
    /// Discriminator updates per mini-batch before each generator/encoder update.
    pub disc_steps: usize,
    pub forget_bias: f64,
    pub orthogonal_init: bool,
    /// RGAN feature extraction: pooling of the discriminator's hidden states.
    pub rgan_pooling: HiddenPooling,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        Self {
            framework: FrameworkId::GuidedGan,
            lambda_x: 0.01,
            lambda_z: 1.0,
            epochs: 500,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.5,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            latent_dim: 100,
            hidden_dim: 100,
            projection_dim: 100,
            seed: 0,
            generator_loss: GeneratorLoss::NonSaturating,
            recon_reduction: ReconReduction::Sum,
            faae_adversarial_encoder: false,
            disc_steps: 1,
            forget_bias: 1.0,
            orthogonal_init: true,
            rgan_pooling: HiddenPooling::Final,
        }
    }
}

impl FrameworkConfig {
    pub fn for_framework(framework: FrameworkId) -> Self {
        Self { framework, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Argument(what));
        if !(self.lambda_x.is_finite() && self.lambda_x >= 0.0) {
            return bad(format!("lambda_x must be a non-negative number, got {}", self.lambda_x));
        }
        if !(self.lambda_z.is_finite() && self.lambda_z >= 0.0) {
            return bad(format!("lambda_z must be a non-negative number, got {}", self.lambda_z));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("adam_epsilon must be positive".into());
        }
        if self.latent_dim == 0 || self.hidden_dim == 0 || self.projection_dim == 0 {
            return bad("latent, hidden and projection widths must be positive".into());
        }
        if self.disc_steps == 0 {
            return bad("disc_steps must be at least 1".into());
        }
        Ok(())
    }

    pub fn lstm_init(&self) -> LstmInit {
        LstmInit { forget_bias: self.forget_bias, orthogonal_recurrent: self.orthogonal_init }
    }
}

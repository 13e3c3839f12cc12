use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::config::{FrameworkConfig, FrameworkId};
use crate::error::{Error, Result};
use crate::netcore::{DataDiscriminator, Encoder, Generator, JointDiscriminator, Linear, ModelDims, Module};
use crate::rng::{Purpose, SeedTree};
use crate::tensor::{Real, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub enum Discriminator<T> {
    Data(DataDiscriminator<T>),
    Joint(JointDiscriminator<T>),
}

impl<T: Real> Module<T> for Discriminator<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        match self {
            Self::Data(d) => d.visit(prefix, f),
            Self::Joint(d) => d.visit(prefix, f),
        }
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        match self {
            Self::Data(d) => d.visit_mut(f),
            Self::Joint(d) => d.visit_mut(f),
        }
    }
}

/// Parameter groups optimised by separate Adam instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    Discriminator,
    /// Generator, encoder and (for SUP) the classifier head.
    Model,
}

/// All networks of one framework.
///
/// Blocks a framework does not use are `None`. Each block is held exactly
/// once, so the encoder the probe reads is the one training updated.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle<T> {
    pub framework: FrameworkId,
    pub dims: ModelDims,
    pub generator: Option<Generator<T>>,
    pub encoder: Option<Encoder<T>>,
    pub discriminator: Option<Discriminator<T>>,
    pub classifier: Option<Linear<T>>,
    /// Completed generator/encoder updates.
    pub step: u64,
}

impl<T: Real> ModelBundle<T> {
    /// `classes` is required for SUP and ignored otherwise.
    pub fn new(cfg: &FrameworkConfig, channels: usize, steps: usize, classes: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        if channels == 0 || steps == 0 {
            return Err(Error::Shape(format!("cannot build a model for {channels}×{steps} windows")));
        }
        let dims = ModelDims {
            channels,
            steps,
            latent: cfg.latent_dim,
            hidden: cfg.hidden_dim,
            projection: cfg.projection_dim,
        };
        let fw = cfg.framework;
        let init = cfg.lstm_init();
        let mut rng = SeedTree::new(cfg.seed).fork(Purpose::Init);
        let generator = fw
            .has_generator()
            .then(|| Generator::new(dims.latent, dims.hidden, channels, init, &mut rng));
        let enc_out = if fw == FrameworkId::M2v { 2 * dims.latent } else { dims.latent };
        let encoder = fw
            .has_encoder()
            .then(|| Encoder::new(channels, dims.hidden, enc_out, init, &mut rng));
        let discriminator = match fw {
            FrameworkId::Rgan | FrameworkId::Rfaae => {
                Some(Discriminator::Data(DataDiscriminator::new(channels, dims.hidden, init, &mut rng)))
            }
            FrameworkId::Rbigan | FrameworkId::GuidedGan => Some(Discriminator::Joint(JointDiscriminator::new(
                channels,
                dims.latent,
                dims.hidden,
                dims.projection,
                init,
                &mut rng,
            ))),
            _ => None,
        };
        let classifier = if fw == FrameworkId::Sup {
            let k = classes.filter(|&k| k >= 2).ok_or_else(|| {
                Error::Argument("supervised training needs at least two classes".into())
            })?;
            Some(Linear::new(dims.latent, k, &mut rng))
        } else {
            None
        };
        Ok(Self { framework: fw, dims, generator, encoder, discriminator, classifier, step: 0 })
    }

    pub fn generator(&self) -> Result<&Generator<T>> {
        self.generator.as_ref().ok_or(self.missing("a generator"))
    }

    pub fn encoder(&self) -> Result<&Encoder<T>> {
        self.encoder.as_ref().ok_or(self.missing("an encoder"))
    }

    pub fn data_discriminator(&self) -> Result<&DataDiscriminator<T>> {
        match &self.discriminator {
            Some(Discriminator::Data(d)) => Ok(d),
            _ => Err(self.missing("a data-space discriminator")),
        }
    }

    pub fn joint_discriminator(&self) -> Result<&JointDiscriminator<T>> {
        match &self.discriminator {
            Some(Discriminator::Joint(d)) => Ok(d),
            _ => Err(self.missing("a joint discriminator")),
        }
    }

    fn missing(&self, what: &str) -> Error {
        Error::Unsupported { framework: self.framework.as_str().into(), what: format!("has no {what}") }
    }

    /// Parameters of the encoder alone, the representation handed to the probe.
    pub fn encoder_param_count(&self) -> usize {
        self.encoder.as_ref().map_or(0, Module::param_count)
    }

    pub fn visit_group<'a>(&'a self, group: ParamGroup, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        match group {
            ParamGroup::Discriminator => {
                if let Some(d) = &self.discriminator {
                    d.visit("discriminator", f);
                }
            }
            ParamGroup::Model => {
                if let Some(g) = &self.generator {
                    g.visit("generator", f);
                }
                if let Some(e) = &self.encoder {
                    e.visit("encoder", f);
                }
                if let Some(c) = &self.classifier {
                    c.visit("classifier", f);
                }
            }
        }
    }

    pub fn visit_group_mut<'a>(&'a mut self, group: ParamGroup, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        match group {
            ParamGroup::Discriminator => {
                if let Some(d) = &mut self.discriminator {
                    d.visit_mut(f);
                }
            }
            ParamGroup::Model => {
                if let Some(g) = &mut self.generator {
                    g.visit_mut(f);
                }
                if let Some(e) = &mut self.encoder {
                    e.visit_mut(f);
                }
                if let Some(c) = &mut self.classifier {
                    c.visit_mut(f);
                }
            }
        }
    }

    pub fn group_tensors(&self, group: ParamGroup) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        self.visit_group(group, &mut |_, t| out.push(t));
        out
    }

    pub fn group_tensors_mut(&mut self, group: ParamGroup) -> Vec<&mut Tensor<T>> {
        let mut out = Vec::new();
        self.visit_group_mut(group, &mut |t| out.push(t));
        out
    }

    /// Copies every tensor into the other element type.
    pub fn cast<U: Real>(&self) -> ModelBundle<U> {
        fn conv<T: Real, U: Real>(src: &Tensor<T>) -> Tensor<U> {
            Tensor { shape: src.shape.clone(), data: src.data.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect() }
        }
        let mut tensors = Vec::new();
        self.visit("", &mut |_, t| tensors.push(conv::<T, U>(t)));
        let mut out = ModelBundle::<U> {
            framework: self.framework,
            dims: self.dims,
            generator: self.generator.as_ref().map(cast_generator),
            encoder: self.encoder.as_ref().map(cast_encoder),
            discriminator: self.discriminator.as_ref().map(|d| match d {
                Discriminator::Data(d) => Discriminator::Data(DataDiscriminator {
                    lstm: cast_lstm(&d.lstm),
                    head: cast_linear(&d.head),
                }),
                Discriminator::Joint(d) => Discriminator::Joint(JointDiscriminator {
                    lstm: cast_lstm(&d.lstm),
                    project: cast_linear(&d.project),
                    head: cast_linear(&d.head),
                }),
            }),
            classifier: self.classifier.as_ref().map(cast_linear),
            step: self.step,
        };
        let mut it = tensors.into_iter();
        out.visit_mut(&mut |t| *t = it.next().expect("same structure"));
        out
    }
}

fn empty<T: Real, U: Real>(t: &Tensor<T>) -> Tensor<U> {
    Tensor::zeros(&t.shape)
}

fn cast_linear<T: Real, U: Real>(l: &Linear<T>) -> Linear<U> {
    Linear { weight: empty(&l.weight), bias: empty(&l.bias) }
}

fn cast_lstm<T: Real, U: Real>(l: &crate::netcore::Lstm<T>) -> crate::netcore::Lstm<U> {
    crate::netcore::Lstm { w_ih: empty(&l.w_ih), w_hh: empty(&l.w_hh), b_ih: empty(&l.b_ih), b_hh: empty(&l.b_hh) }
}

fn cast_generator<T: Real, U: Real>(g: &Generator<T>) -> Generator<U> {
    Generator { lstm: cast_lstm(&g.lstm), head: cast_linear(&g.head) }
}

fn cast_encoder<T: Real, U: Real>(e: &Encoder<T>) -> Encoder<U> {
    Encoder { lstm: cast_lstm(&e.lstm), head: cast_linear(&e.head) }
}

impl<T: Real> Module<T> for ModelBundle<T> {
    fn visit<'a>(&'a self, _prefix: &str, f: &mut dyn FnMut(String, &'a Tensor<T>)) {
        self.visit_group(ParamGroup::Model, f);
        self.visit_group(ParamGroup::Discriminator, f);
    }

    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&'a mut Tensor<T>)) {
        // Split borrows: the two groups touch disjoint fields.
        let Self { generator, encoder, discriminator, classifier, .. } = self;
        if let Some(g) = generator {
            g.visit_mut(f);
        }
        if let Some(e) = encoder {
            e.visit_mut(f);
        }
        if let Some(c) = classifier {
            c.visit_mut(f);
        }
        if let Some(d) = discriminator {
            d.visit_mut(f);
        }
    }
}

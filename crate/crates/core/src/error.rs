use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("upsampling not supported: source {source_hz} Hz, requested {target_hz} Hz")]
    UpsamplingNotSupported { source_hz: f64, target_hz: f64 },

    #[error("channel {channel} ({name}) is constant and cannot be normalized")]
    DegenerateChannel { channel: usize, name: String },

    #[error("training diverged at step {step} (last good checkpoint: {last_checkpoint:?})")]
    Diverged {
        step: u64,
        last_checkpoint: Option<usize>,
    },

    #[error("operation not supported by {framework}: {what}")]
    Unsupported { framework: String, what: String },

    #[error("linear probe needs at least two classes in the training labels")]
    DegenerateProbe,

    #[error("metrics are undefined for an all-zero confusion matrix")]
    UndefinedMetrics,

    #[error("training observer failed: {0}")]
    Observer(String),
}

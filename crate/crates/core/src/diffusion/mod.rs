//! Denoising diffusion over the features of expanded bipartite graphs.

pub mod denoiser;
pub mod edm;
pub mod features;
pub mod sample;
pub mod train;

pub use denoiser::{
    ConstantDenoiser, DenoiseContext, Denoiser, ModelConfig, ReferenceDenoiser, ZeroDenoiser,
};
pub use edm::{edm_loss, reverse_sde_sample, NoiseConfig};
pub use features::{noise_features, FeatureTriple};
pub use sample::{
    sample, sample_deterministic, sample_free, sample_many, ReplayDenoiser, SampleConfig,
    SampleOutcome, Variant,
};
pub use train::{
    train, Checkpoint, LevelCache, LogRow, LrSchedule, OptimizerKind, TrainConfig, TrainOutcome,
    Trainer,
};

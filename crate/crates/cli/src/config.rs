use std::path::Path;

use anyhow::Context;
use hgen_core::coarsen::CoarseningParams;
use hgen_core::datagen::DatasetSpec;
use hgen_core::diffusion::{
    LrSchedule, ModelConfig, NoiseConfig, OptimizerKind, SampleConfig, TrainConfig, Variant,
};
use hgen_core::eval::{EvalConfig, SbmCheck, SpectralParams, Validator};
use serde::{Deserialize, Serialize};

use crate::Invalid;

/// Everything a pipeline run needs apart from the seed and file paths.
/// Each section mirrors one library module; missing keys take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DatasetSpec,
    pub coarsen: CoarseningParams,
    pub train: TrainSection,
    pub model: ModelConfig,
    pub noise: NoiseConfig,
    pub sample: SampleSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub optimizer: OptimizerKind,
    pub lr_schedule: LrSchedule,
    pub perturb_radius: usize,
    pub perturb_prob: f64,
    pub eval_batch: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            steps: t.steps,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            grad_clip: t.grad_clip,
            optimizer: t.optimizer,
            lr_schedule: t.lr_schedule,
            perturb_radius: t.perturb_radius,
            perturb_prob: t.perturb_prob,
            eval_batch: t.eval_batch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub count: usize,
    /// Fixed target size. Without it, targets cycle through the node counts
    /// of the graphs passed with `--sizes-from`.
    pub n_target: Option<usize>,
    pub variant: Variant,
    pub max_iterations: Option<usize>,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self {
            count: 40,
            n_target: None,
            variant: Variant::Deterministic,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Pair generated and test graphs by index for the node-count metric.
    /// Needs equally sized sets.
    pub paired: bool,
    pub spectral: SpectralParams,
    pub sbm: SbmCheck,
    pub validator: Option<Validator>,
}

impl Default for EvalSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            paired: e.paired,
            spectral: e.spectral,
            sbm: e.sbm,
            validator: None,
        }
    }
}

impl EvalSection {
    pub fn metrics(&self) -> EvalConfig {
        EvalConfig {
            paired: self.paired,
            spectral: self.spectral,
            sbm: self.sbm,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Invalid(format!("config {}: {e}", path.display())).into())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            steps: t.steps,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            grad_clip: t.grad_clip,
            optimizer: t.optimizer,
            lr_schedule: t.lr_schedule,
            perturb_radius: t.perturb_radius,
            perturb_prob: t.perturb_prob,
            eval_batch: t.eval_batch,
            seed,
            coarsening: self.coarsen,
            model: self.model,
            noise: self.noise,
        }
    }

    /// Sampling parameters; the spectral width always follows the model.
    pub fn sample_config(&self, model: &ModelConfig, noise: NoiseConfig) -> SampleConfig {
        SampleConfig {
            rho_min: self.coarsen.rho_min,
            rho_max: self.coarsen.rho_max,
            spectral_k: model.spectral_k,
            noise,
            max_iterations: self.sample.max_iterations,
        }
    }
}

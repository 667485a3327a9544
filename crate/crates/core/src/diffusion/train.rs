//! Training: turning coarsening sequences into denoising examples and fitting
//! the reference denoiser to them.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarsen::{sample_coarsening_sequence, CoarseningParams, CoarseningSequence};
use crate::error::{Error, Result};
use crate::expand::{
    align_fine, cluster_sizes, edge_labels, perturbed_expand, EdgeSelection, ExpansionVectors,
};
use crate::hypergraph::{BipartiteGraph, Hypergraph};
use crate::spectral::{node_embeddings, NodeEmbeddings};

use super::denoiser::{DenoiseContext, ModelConfig, ReferenceDenoiser};
use super::edm::NoiseConfig;
use super::features::FeatureTriple;

/// One supervised instance: features to recover on a (perturbed) expansion of
/// a coarse level, plus everything the denoiser is conditioned on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub host: BipartiteGraph,
    pub embeddings: NodeEmbeddings,
    pub target: FeatureTriple,
    /// Left size of the original graph.
    pub n_target: usize,
    pub rho_hat: f64,
    pub level: usize,
}

impl TrainingExample {
    pub fn context(&self) -> DenoiseContext<'_> {
        DenoiseContext {
            host: &self.host,
            embeddings: &self.embeddings,
            n_target: self.n_target,
            rho_hat: self.rho_hat,
        }
    }
}

/// Builds the example for level `level` of `seq`.
///
/// The host is the expansion of level `level + 1` by the cluster sizes that
/// undo step `level`, optionally perturbed; for the coarsest level it is the
/// single-pair graph. Targets are the edge bits that recover level `level`
/// and the cluster sizes that will expand it further (all ones at level 0),
/// listed in host order.
pub fn training_example(
    seq: &CoarseningSequence,
    level: usize,
    spectral_k: usize,
    perturb_radius: usize,
    perturb_prob: f64,
    rng: &mut impl Rng,
) -> Result<TrainingExample> {
    let depth = seq.len();
    if level > depth {
        return Err(Error::InvalidParameter(format!(
            "level {level} beyond sequence of length {depth}"
        )));
    }
    let fine = &seq.graphs[level];
    let sizes = if level == 0 {
        ExpansionVectors::ones(fine)
    } else {
        cluster_sizes(&seq.steps[level - 1])
    };

    let (host, embeddings, target) = if level == depth {
        let host = BipartiteGraph::minimal();
        let emb = node_embeddings(&host, &ExpansionVectors::ones(&host), spectral_k, rng)?;
        let labels = EdgeSelection::all(1);
        (host, emb, FeatureTriple::from_labels(&sizes, &labels))
    } else {
        let step = &seq.steps[level];
        let coarse = &seq.graphs[level + 1];
        let up = cluster_sizes(step);
        let host = perturbed_expand(coarse, &up, perturb_radius, perturb_prob, rng)?;
        let emb = node_embeddings(coarse, &up, spectral_k, rng)?;
        let aligned = align_fine(fine, step)?;
        let labels = edge_labels(&host, &aligned)?;
        let ordered = ExpansionVectors {
            left: step
                .left_fine_order()
                .iter()
                .map(|&v| sizes.left[v])
                .collect(),
            right: step
                .right_fine_order()
                .iter()
                .map(|&v| sizes.right[v])
                .collect(),
        };
        (host, emb, FeatureTriple::from_labels(&ordered, &labels))
    };
    let rho_hat = if level == 0 {
        0.0
    } else {
        1.0 - fine.n_left() as f64 / seq.graphs[level - 1].n_left() as f64
    };
    Ok(TrainingExample {
        host,
        embeddings,
        target,
        n_target: seq.graphs[0].n_left(),
        rho_hat,
        level,
    })
}

/// A coarsening sequence per training graph whose levels are handed out
/// uniformly at random without replacement; a fresh sequence is sampled once
/// all levels of the current one have been used.
#[derive(Debug, Clone)]
pub struct LevelCache {
    params: CoarseningParams,
    entries: Vec<Option<(CoarseningSequence, Vec<usize>)>>,
}

impl LevelCache {
    pub fn new(num_graphs: usize, params: CoarseningParams) -> Self {
        Self {
            params,
            entries: vec![None; num_graphs],
        }
    }

    pub fn draw<'a>(
        &'a mut self,
        graph: usize,
        h: &Hypergraph,
        rng: &mut impl Rng,
    ) -> Result<(&'a CoarseningSequence, usize)> {
        let entry = &mut self.entries[graph];
        if entry.as_ref().is_none_or(|(_, left)| left.is_empty()) {
            let seq = sample_coarsening_sequence(h, &self.params, rng)?;
            let levels = (0..=seq.len()).collect();
            *entry = Some((seq, levels));
        }
        let (seq, left) = entry.as_mut().expect("entry filled above");
        let pick = rng.random_range(0..left.len());
        let level = left.swap_remove(pick);
        Ok((seq, level))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Sgd,
    Adam,
}

/// Step-size schedule over the configured number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Half-cosine decay from the base rate to zero at `steps`.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub grad_clip: f64,
    pub optimizer: OptimizerKind,
    pub lr_schedule: LrSchedule,
    pub perturb_radius: usize,
    pub perturb_prob: f64,
    /// Size of the fixed batch used to report loss before and after training.
    pub eval_batch: usize,
    pub seed: u64,
    pub coarsening: CoarseningParams,
    pub model: ModelConfig,
    pub noise: NoiseConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            batch_size: 8,
            learning_rate: 1e-3,
            grad_clip: 1.0,
            optimizer: OptimizerKind::Sgd,
            lr_schedule: LrSchedule::Constant,
            perturb_radius: crate::expand::DEFAULT_PERTURB_RADIUS,
            perturb_prob: crate::expand::DEFAULT_PERTURB_PROB,
            eval_batch: 32,
            seed: 0,
            coarsening: CoarseningParams::default(),
            model: ModelConfig::default(),
            noise: NoiseConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.coarsening.validate()?;
        self.noise.validate()?;
        if self.batch_size == 0 || self.model.hidden == 0 {
            return Err(Error::InvalidParameter(
                "batch size and hidden width must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || self.grad_clip < 0.0 {
            return Err(Error::InvalidParameter(
                "learning rate must be positive and the clip non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.perturb_prob) {
            return Err(Error::OutOfDomain {
                value: self.perturb_prob,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub step: usize,
    pub sigma: f64,
    pub loss: f64,
}

pub fn write_log_csv(path: impl AsRef<Path>, rows: &[LogRow]) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "step,sigma,loss")?;
    for r in rows {
        writeln!(buf, "{},{:e},{:e}", r.step, r.sigma, r.loss)?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue or reuse a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TrainConfig,
    /// Optimizer steps taken so far.
    pub step: usize,
    pub params: Vec<f64>,
    adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ck: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn model(&self) -> Result<ReferenceDenoiser> {
        ReferenceDenoiser::from_params(self.config.model, self.config.noise, self.params.clone())
    }
}

/// A drawn example together with its noise.
struct NoisyExample {
    example: TrainingExample,
    sigma: f64,
    eps: FeatureTriple,
}

/// Draws examples for one stream of training or evaluation data.
struct ExampleSource<'a> {
    dataset: &'a [Hypergraph],
    cache: LevelCache,
    rng: ChaCha8Rng,
}

impl<'a> ExampleSource<'a> {
    fn new(dataset: &'a [Hypergraph], cfg: &TrainConfig, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Self {
            dataset,
            cache: LevelCache::new(dataset.len(), cfg.coarsening),
            rng,
        }
    }

    fn next(&mut self, cfg: &TrainConfig) -> Result<NoisyExample> {
        let g = self.rng.random_range(0..self.dataset.len());
        let (seq, level) = self.cache.draw(g, &self.dataset[g], &mut self.rng)?;
        let example = training_example(
            seq,
            level,
            cfg.model.spectral_k,
            cfg.perturb_radius,
            cfg.perturb_prob,
            &mut self.rng,
        )?;
        let sigma = cfg.noise.sample_sigma(&mut self.rng);
        let eps = FeatureTriple::standard_normal(&example.target, &mut self.rng);
        Ok(NoisyExample {
            example,
            sigma,
            eps,
        })
    }
}

const DATA_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

/// Stateful training loop. Data, parameter initialization and the evaluation
/// batch use independent random streams derived from the seed, so resuming
/// from a checkpoint only needs to replay the data stream.
pub struct Trainer<'a> {
    cfg: TrainConfig,
    model: ReferenceDenoiser,
    step: usize,
    adam: Option<AdamState>,
    source: ExampleSource<'a>,
    eval: Vec<NoisyExample>,
}

impl<'a> Trainer<'a> {
    pub fn new(dataset: &'a [Hypergraph], cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if dataset.is_empty() {
            return Err(Error::InvalidParameter("training set is empty".into()));
        }
        if let Some(i) = dataset
            .iter()
            .position(|h| !h.is_connected() || h.has_isolated_nodes())
        {
            return Err(Error::InvalidParameter(format!(
                "training graph {i} is disconnected or has isolated nodes"
            )));
        }
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        init_rng.set_stream(INIT_STREAM);
        let model = ReferenceDenoiser::init(cfg.model, cfg.noise, &mut init_rng);
        let adam = (cfg.optimizer == OptimizerKind::Adam).then(|| AdamState {
            m: vec![0.0; model.params.len()],
            v: vec![0.0; model.params.len()],
        });
        let mut eval_source = ExampleSource::new(dataset, &cfg, EVAL_STREAM);
        let eval = (0..cfg.eval_batch)
            .map(|_| eval_source.next(&cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source: ExampleSource::new(dataset, &cfg, DATA_STREAM),
            cfg,
            model,
            step: 0,
            adam,
            eval,
        })
    }

    /// Continues the run stored in `ck` on the same dataset.
    pub fn resume(dataset: &'a [Hypergraph], ck: &Checkpoint) -> Result<Self> {
        let mut t = Self::new(dataset, ck.config.clone())?;
        t.model = ck.model()?;
        t.adam = ck.adam.clone();
        for _ in 0..ck.step * t.cfg.batch_size {
            t.source.next(&ck.config)?;
        }
        t.step = ck.step;
        Ok(t)
    }

    pub fn model(&self) -> &ReferenceDenoiser {
        &self.model
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: self.cfg.clone(),
            step: self.step,
            params: self.model.params.clone(),
            adam: self.adam.clone(),
        }
    }

    /// Mean loss of the current parameters on the fixed evaluation batch.
    pub fn eval_loss(&self) -> Result<f64> {
        if self.eval.is_empty() {
            return Ok(0.0);
        }
        let losses = self
            .eval
            .par_iter()
            .map(|ex| {
                self.model
                    .loss(&ex.example.target, &ex.eps, ex.sigma, &ex.example.context())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(losses.iter().sum::<f64>() / losses.len() as f64)
    }

    /// Step size for the next step.
    pub fn learning_rate(&self) -> f64 {
        let base = self.cfg.learning_rate;
        match self.cfg.lr_schedule {
            LrSchedule::Constant => base,
            LrSchedule::Cosine => {
                let t = (self.step as f64 / self.cfg.steps.max(1) as f64).min(1.0);
                0.5 * base * (1.0 + (std::f64::consts::PI * t).cos())
            }
        }
    }

    /// One optimizer step on a fresh batch. Returns one log row per example.
    pub fn step(&mut self) -> Result<Vec<LogRow>> {
        let batch = (0..self.cfg.batch_size)
            .map(|_| self.source.next(&self.cfg))
            .collect::<Result<Vec<_>>>()?;
        let results = batch
            .par_iter()
            .map(|ex| {
                self.model.loss_and_grad(
                    &ex.example.target,
                    &ex.eps,
                    ex.sigma,
                    &ex.example.context(),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        // Reduce in batch order so the result does not depend on scheduling.
        let mut grad = vec![0.0; self.model.params.len()];
        let mut rows = Vec::with_capacity(batch.len());
        for (ex, (loss, g)) in batch.iter().zip(&results) {
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
            rows.push(LogRow {
                step: self.step,
                sigma: ex.sigma,
                loss: *loss,
            });
        }
        let scale = 1.0 / batch.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if self.cfg.grad_clip > 0.0 && norm > self.cfg.grad_clip {
            let s = self.cfg.grad_clip / norm;
            grad.iter_mut().for_each(|g| *g *= s);
        }

        let lr = self.learning_rate();
        match &mut self.adam {
            None => {
                for (p, g) in self.model.params.iter_mut().zip(&grad) {
                    *p -= lr * g;
                }
            }
            Some(state) => {
                let t = (self.step + 1) as i32;
                let (c1, c2) = (1.0 - ADAM_BETA1.powi(t), 1.0 - ADAM_BETA2.powi(t));
                for i in 0..grad.len() {
                    state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * grad[i];
                    state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
                    let m_hat = state.m[i] / c1;
                    let v_hat = state.v[i] / c2;
                    self.model.params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
        self.step += 1;
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: Vec<LogRow>,
    pub initial_eval_loss: f64,
    pub final_eval_loss: f64,
}

/// Runs `cfg.steps` optimizer steps from a fresh initialization.
pub fn train(dataset: &[Hypergraph], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(dataset, cfg.clone())?;
    let initial_eval_loss = trainer.eval_loss()?;
    let mut log = Vec::with_capacity(cfg.steps * cfg.batch_size);
    for _ in 0..cfg.steps {
        log.extend(trainer.step()?);
    }
    Ok(TrainOutcome {
        final_eval_loss: trainer.eval_loss()?,
        checkpoint: trainer.checkpoint(),
        log,
        initial_eval_loss,
    })
}

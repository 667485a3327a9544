//! Generation: growing a hypergraph from a single node-hyperedge pair by
//! repeated expansion and refinement.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarsen::{CoarseningParams, CoarseningSequence};
use crate::error::{Error, Result};
use crate::expand::{
    align_fine, expand, inversion_labels, refine, EdgeSelection, ExpansionVectors,
};
use crate::hypergraph::{from_bipartite, BipartiteGraph, Hypergraph};
use crate::spectral::node_embeddings_lenient;

use super::denoiser::{DenoiseContext, Denoiser};
use super::edm::{reverse_sde_sample, NoiseConfig};
use super::features::FeatureTriple;

/// Right scores below this become cluster size 1.
pub const RIGHT_THRESHOLD_LOW: f64 = 1.66;
/// Right scores below this (and not below the low threshold) become size 2; the rest 3.
pub const RIGHT_THRESHOLD_HIGH: f64 = 2.33;
/// Edge scores above this keep the edge.
pub const EDGE_THRESHOLD: f64 = 0.5;
/// Left scores at or above this duplicate the node when the expansion size is free.
pub const LEFT_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Duplicate exactly the number of left nodes implied by a drawn reduction fraction.
    #[default]
    Deterministic,
    /// Duplicate every left node whose score crosses [`LEFT_THRESHOLD`].
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub spectral_k: usize,
    pub noise: NoiseConfig,
    /// Iteration limit for the free variant; `None` means ten times the
    /// sequence-length bound for the target size.
    pub max_iterations: Option<usize>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        let c = CoarseningParams::default();
        Self {
            rho_min: c.rho_min,
            rho_max: c.rho_max,
            spectral_k: crate::spectral::DEFAULT_SPECTRAL_FEATURES,
            noise: NoiseConfig::default(),
            max_iterations: None,
        }
    }
}

impl SampleConfig {
    fn iteration_cap(&self, n_target: usize) -> usize {
        self.max_iterations.unwrap_or_else(|| {
            let bound = CoarseningParams {
                rho_min: self.rho_min,
                rho_max: self.rho_max,
                ..Default::default()
            }
            .length_bound(n_target);
            10 * bound.max(1)
        })
    }
}

/// Smallest `n⁺` with `n⁺ = ⌈ρ (n + n⁺)⌉`.
pub fn expansion_count(n: usize, rho: f64) -> usize {
    let mut k = 0;
    loop {
        if k == (rho * (n + k) as f64).ceil() as usize {
            return k;
        }
        // For ρ < 1 the right-hand side grows slower than k, so a fixed point exists.
        if k > n * 64 + 64 {
            return (rho * n as f64 / (1.0 - rho)).ceil() as usize;
        }
        k += 1;
    }
}

pub fn discretize_right(score: f64) -> usize {
    if score < RIGHT_THRESHOLD_LOW {
        1
    } else if score < RIGHT_THRESHOLD_HIGH {
        2
    } else {
        3
    }
}

pub fn keep_edge(score: f64) -> bool {
    score > EDGE_THRESHOLD
}

pub fn discretize_left_free(score: f64) -> usize {
    if score < LEFT_THRESHOLD {
        1
    } else {
        2
    }
}

/// Left counts with exactly `n_plus` twos at the highest scores; ties go to the lower index.
pub fn select_top(scores: &[f64], n_plus: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut counts = vec![1; scores.len()];
    for &i in order.iter().take(n_plus) {
        counts[i] = 2;
    }
    counts
}

/// One generated graph with its raw form before isolated nodes and empty
/// hyperedges are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub hypergraph: Hypergraph,
    pub bipartite: BipartiteGraph,
    pub iterations: usize,
}

/// Generates one hypergraph with `n_target` nodes before cleanup.
pub fn sample_deterministic(
    d: &dyn Denoiser,
    n_target: usize,
    cfg: &SampleConfig,
    rng: &mut impl Rng,
) -> Result<SampleOutcome> {
    sample_loop(d, n_target, cfg, Variant::Deterministic, rng)
}

/// Generates one hypergraph, letting the denoiser decide how many nodes to
/// duplicate. Stops once at least `n_target` nodes exist.
pub fn sample_free(
    d: &dyn Denoiser,
    n_target: usize,
    cfg: &SampleConfig,
    rng: &mut impl Rng,
) -> Result<SampleOutcome> {
    sample_loop(d, n_target, cfg, Variant::Free, rng)
}

pub fn sample(
    d: &dyn Denoiser,
    n_target: usize,
    cfg: &SampleConfig,
    variant: Variant,
    rng: &mut impl Rng,
) -> Result<SampleOutcome> {
    sample_loop(d, n_target, cfg, variant, rng)
}

fn sample_loop(
    d: &dyn Denoiser,
    n_target: usize,
    cfg: &SampleConfig,
    variant: Variant,
    rng: &mut impl Rng,
) -> Result<SampleOutcome> {
    if n_target == 0 {
        return Err(Error::InvalidParameter(
            "target size must be at least 1".into(),
        ));
    }
    if !(cfg.rho_min > 0.0 && cfg.rho_min <= cfg.rho_max && cfg.rho_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reduction fraction range [{}, {}] must satisfy 0 < min <= max < 1",
            cfg.rho_min, cfg.rho_max
        )));
    }
    cfg.noise.validate()?;
    let cap = cfg.iteration_cap(n_target);

    let mut b = BipartiteGraph::minimal();
    let mut counts = ExpansionVectors::ones(&b);
    let mut iterations = 0;
    while b.n_left() < n_target {
        if variant == Variant::Free && iterations >= cap {
            return Err(Error::IterationCap {
                target: n_target,
                cap,
                reached: b.n_left(),
            });
        }
        let embeddings = node_embeddings_lenient(&b, &counts, cfg.spectral_k, rng)?;
        let host = expand(&b, &counts)?;
        let n = host.n_left();
        let rho = rng.random_range(cfg.rho_min..=cfg.rho_max);
        let n_plus = expansion_count(n, rho)
            .min(n_target.saturating_sub(n))
            .min(n);
        let rho_hat = 1.0 - n as f64 / (n + n_plus) as f64;
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &embeddings,
            n_target,
            rho_hat,
        };
        let x = reverse_sde_sample(d, &cfg.noise, &ctx, rng);

        let left = match variant {
            Variant::Deterministic => select_top(&x.vl, n_plus),
            Variant::Free => x.vl.iter().map(|&s| discretize_left_free(s)).collect(),
        };
        let right = x.vr.iter().map(|&s| discretize_right(s)).collect();
        let bits = EdgeSelection(x.e.iter().map(|&s| keep_edge(s)).collect());
        b = refine(&host, &bits)?;
        counts = ExpansionVectors::new(left, right)?;
        iterations += 1;
    }
    Ok(SampleOutcome {
        hypergraph: from_bipartite(&b),
        bipartite: b,
        iterations,
    })
}

/// Samples one graph per entry of `n_targets`. Sample `i` uses its own random
/// stream, so results do not depend on how work is scheduled across threads.
pub fn sample_many(
    d: &dyn Denoiser,
    n_targets: &[usize],
    cfg: &SampleConfig,
    variant: Variant,
    seed: u64,
) -> Vec<Result<SampleOutcome>> {
    n_targets
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample_loop(d, n, cfg, variant, &mut rng)
        })
        .collect()
}

/// A stub denoiser that knows the right answer: it replays a recorded
/// coarsening sequence backwards, returning for every host it has seen the
/// exact labels that turn it into the next finer level.
#[derive(Debug, Clone)]
pub struct ReplayDenoiser {
    answers: HashMap<BipartiteGraph, FeatureTriple>,
    levels: Vec<BipartiteGraph>,
    left_relabel: Vec<usize>,
}

impl ReplayDenoiser {
    /// Prepares the replay of `seq`.
    ///
    /// Generation builds every level in its own node order (copies of a
    /// coarse node are contiguous), so the replayed levels are the recorded
    /// ones up to a relabelling that is tracked from the coarsest level down.
    pub fn new(seq: &CoarseningSequence) -> Result<Self> {
        let depth = seq.len();
        let mut answers = HashMap::new();
        let mut current = seq.graphs[depth].clone();
        // Label in `current` of every node of `seq.graphs[l]`.
        let mut lperm: Vec<usize> = (0..current.n_left()).collect();
        let mut rperm: Vec<usize> = (0..current.n_right()).collect();
        let mut host = BipartiteGraph::minimal();
        let mut host_bits = EdgeSelection::all(1);
        let mut levels = vec![current.clone()];

        for l in (0..=depth).rev() {
            let (next_counts, next) = if l == 0 {
                (ExpansionVectors::ones(&current), None)
            } else {
                let step = seq.steps[l - 1].permute_coarse(&lperm, &rperm)?;
                let (counts, bits) = inversion_labels(&seq.graphs[l - 1], &step)?;
                let finer = align_fine(&seq.graphs[l - 1], &step)?;
                let mut lp = vec![0; finer.n_left()];
                for (k, v) in step.left_fine_order().into_iter().enumerate() {
                    lp[v] = k;
                }
                let mut rp = vec![0; finer.n_right()];
                for (k, v) in step.right_fine_order().into_iter().enumerate() {
                    rp[v] = k;
                }
                (counts, Some((bits, finer, lp, rp)))
            };
            let answer = FeatureTriple::from_labels(&next_counts, &host_bits);
            answers.insert(host.clone(), answer);

            if let Some((bits, finer, lp, rp)) = next {
                host = expand(&current, &next_counts)?;
                host_bits = bits;
                current = finer;
                lperm = lp;
                rperm = rp;
                levels.push(current.clone());
            }
        }
        levels.reverse();
        Ok(Self {
            answers,
            levels,
            left_relabel: lperm,
        })
    }

    /// The finest replayed level equals the recorded input relabelled by this
    /// map (original node to generated node).
    pub fn left_relabel(&self) -> &[usize] {
        &self.left_relabel
    }

    /// Replayed levels, finest first, in generation order.
    pub fn levels(&self) -> &[BipartiteGraph] {
        &self.levels
    }
}

impl Denoiser for ReplayDenoiser {
    fn denoise(&self, x: &FeatureTriple, _sigma: f64, ctx: &DenoiseContext<'_>) -> FeatureTriple {
        match self.answers.get(ctx.host) {
            Some(a) => a.clone(),
            None => x.map(|_| 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsen::sample_coarsening_sequence;
    use crate::diffusion::denoiser::{ConstantDenoiser, ZeroDenoiser};
    use crate::hypergraph::star_expansion;
    use crate::spectral::NodeEmbeddings;

    #[test]
    fn expansion_count_fixed_point() {
        assert_eq!(expansion_count(10, 0.2), 3);
        assert_eq!(expansion_count(1, 0.1), 1);
        for n in 1..200 {
            for rho in [0.1, 0.17, 0.25, 0.3] {
                let k = expansion_count(n, rho);
                assert_eq!(k, (rho * (n + k) as f64).ceil() as usize);
                assert!((0..k).all(|j| j != (rho * (n + j) as f64).ceil() as usize));
            }
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(discretize_right(2.0), 2);
        assert_eq!(discretize_right(2.4), 3);
        assert_eq!(discretize_right(1.0), 1);
        assert_eq!(discretize_left_free(1.4), 1);
        assert_eq!(discretize_left_free(1.6), 2);
        assert!(keep_edge(0.51) && !keep_edge(0.5));
        let mut last = 0;
        for i in 0..400 {
            let s = i as f64 / 100.0;
            assert!(discretize_right(s) >= last);
            last = discretize_right(s);
        }
    }

    #[test]
    fn top_selection_breaks_ties_by_index() {
        assert_eq!(select_top(&[1.0, 2.0, 2.0, 0.5], 2), vec![1, 2, 2, 1]);
        assert_eq!(select_top(&[1.0, 1.0, 1.0], 1), vec![2, 1, 1]);
        assert_eq!(select_top(&[1.0], 0), vec![1]);
    }

    #[test]
    fn sampler_returns_constant_denoiser_output() {
        let host = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        let emb = NodeEmbeddings::zeros(1, 2, 1);
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &emb,
            n_target: 2,
            rho_hat: 0.0,
        };
        let target = FeatureTriple {
            vl: vec![1.0, 2.0],
            vr: vec![3.0],
            e: vec![0.0, 1.0],
        };
        let stub = ConstantDenoiser(target.clone());
        for steps in [1, 64] {
            let cfg = NoiseConfig {
                sampler_steps: steps,
                ..Default::default()
            };
            let out = reverse_sde_sample(&stub, &cfg, &ctx, &mut ChaCha8Rng::seed_from_u64(5));
            assert!(out.max_abs_diff(&target) < 1e-6, "{steps}: {out:?}");
        }
    }

    #[test]
    fn deterministic_variant_hits_target_size() {
        let cfg = SampleConfig {
            noise: NoiseConfig {
                sampler_steps: 2,
                ..Default::default()
            },
            ..Default::default()
        };
        for n in [1, 2, 7, 20] {
            let out = sample_deterministic(
                &ZeroDenoiser,
                n,
                &cfg,
                &mut ChaCha8Rng::seed_from_u64(n as u64),
            )
            .unwrap();
            assert_eq!(out.bipartite.n_left(), n);
            assert!(out.hypergraph.num_nodes() <= n);
        }
    }

    #[test]
    fn free_variant_hits_cap_with_zero_denoiser() {
        let cfg = SampleConfig {
            noise: NoiseConfig {
                sampler_steps: 2,
                ..Default::default()
            },
            ..Default::default()
        };
        let err = sample_free(&ZeroDenoiser, 5, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::IterationCap { .. })));
    }

    #[test]
    fn replay_reconstructs_the_input() {
        let h = Hypergraph::new(
            7,
            vec![
                vec![0, 1, 2],
                vec![2, 3],
                vec![3, 4, 5],
                vec![5, 6],
                vec![1, 6],
            ],
        )
        .unwrap();
        let cfg = SampleConfig {
            noise: NoiseConfig {
                sampler_steps: 3,
                ..Default::default()
            },
            ..Default::default()
        };
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq =
                sample_coarsening_sequence(&h, &CoarseningParams::default(), &mut rng).unwrap();
            let stub = ReplayDenoiser::new(&seq).unwrap();
            let out = sample_free(&stub, h.num_nodes(), &cfg, &mut rng).unwrap();
            assert_eq!(out.iterations, seq.len() + 1);
            let expected = h.relabel(stub.left_relabel()).unwrap();
            assert_eq!(out.hypergraph.canonical(), expected.canonical());
            assert_eq!(&out.bipartite, &stub.levels()[0]);
            assert_eq!(stub.levels()[0].num_edges(), star_expansion(&h).num_edges());
        }
    }
}

//! Shared fixtures for the benchmarks.

use hgen_core::datagen::{DatasetKind, DatasetSpec};
use hgen_core::diffusion::{ModelConfig, NoiseConfig, ReferenceDenoiser};
use hgen_core::Hypergraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A connected graph from the default generator for `kind`.
pub fn connected(kind: DatasetKind, seed: u64) -> Hypergraph {
    let spec = DatasetSpec {
        kind,
        ..Default::default()
    };
    let mut r = rng(seed);
    loop {
        let h = spec.generate_one(&mut r).unwrap().without_isolated_nodes();
        if h.num_edges() > 0 && h.is_connected() {
            return h;
        }
    }
}

/// Untrained denoiser with the default architecture.
pub fn denoiser(seed: u64) -> ReferenceDenoiser {
    ReferenceDenoiser::init(
        ModelConfig::default(),
        NoiseConfig::default(),
        &mut rng(seed),
    )
}

//! Metrics comparing a generated set of hypergraphs against a reference set.

mod centrality;
mod distance;
mod hash;
mod mmd;
mod report;
mod validity;

pub use centrality::{centralities, line_graph, Centralities};
pub use distance::{node_num_diff, node_num_diff_unpaired, wasserstein_1d};
pub use hash::{hypergraph_hash, novelty, uniqueness, WL_ROUNDS};
pub use mmd::{emd_1d, spectral_histogram, spectral_mmd, SpectralParams};
pub use report::{evaluate, EvalConfig, MetricReport, Validator, METRIC_NAMES};
pub use validity::{
    intra_inter_rates, spectral_bisection, valid_ego, valid_sbm, valid_tree, SbmCheck,
};

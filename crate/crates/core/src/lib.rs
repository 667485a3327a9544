//! Hypergraph generation by coarsening, expansion and denoising diffusion.
//!
//! A hypergraph is handled through its star expansion, a bipartite graph with
//! nodes on the left and hyperedges on the right. Training graphs are
//! coarsened into sequences of shrinking bipartite graphs; a denoiser learns to
//! undo one coarsening step at a time, and sampling grows a graph from a
//! single node-hyperedge pair by repeated expansion and refinement.

pub mod coarsen;
pub mod datagen;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod expand;
pub mod hypergraph;
pub mod io;
pub mod laplacian;
pub mod spectral;

pub use error::{Error, Result};
pub use hypergraph::{
    clique_expansion, from_bipartite, star_expansion, BipartiteGraph, Hypergraph, Side,
    WeightedGraph,
};

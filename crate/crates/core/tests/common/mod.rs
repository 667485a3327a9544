#![allow(dead_code)]

use hgen_core::Hypergraph;
use proptest::prelude::*;
use rand::seq::index;
use rand::Rng;

/// Random hypergraph with up to `max_nodes` nodes and `max_edges` hyperedges.
/// Isolated nodes and duplicate hyperedges may occur.
pub fn random_hypergraph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> Hypergraph {
    let n = rng.random_range(1..=max_nodes);
    let m = rng.random_range(0..=max_edges);
    let edges = (0..m)
        .map(|_| {
            let size = rng.random_range(1..=n.min(5));
            let mut e = index::sample(rng, n, size).into_vec();
            e.sort_unstable();
            e
        })
        .collect();
    Hypergraph::new(n, edges).unwrap()
}

/// Redraws until the hypergraph is connected, edge-bearing and free of
/// isolated nodes.
pub fn random_connected(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> Hypergraph {
    loop {
        let h = random_hypergraph(rng, max_nodes, max_edges);
        if h.num_edges() > 0 && !h.has_isolated_nodes() && connected_oracle(&h) {
            return h;
        }
    }
}

/// Union-find connectivity over nodes, independent of the library's BFS.
pub fn connected_oracle(h: &Hypergraph) -> bool {
    let n = h.num_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in h.edges() {
        for w in e.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let roots: std::collections::HashSet<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    roots.len() <= 1
}

prop_compose! {
    pub fn arb_hypergraph(max_nodes: usize, max_edges: usize)
        (n in 1..=max_nodes)
        (edges in prop::collection::vec(
            prop::collection::btree_set(0..n, 1..=n.min(5)), 0..=max_edges), n in Just(n))
        -> Hypergraph
    {
        Hypergraph::new(n, edges.into_iter().map(|e| e.into_iter().collect()).collect()).unwrap()
    }
}

pub fn arb_permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

prop_compose! {
    /// Like [`arb_hypergraph`] but without duplicate hyperedges.
    pub fn arb_simple_hypergraph(max_nodes: usize, max_edges: usize)
        (n in 1..=max_nodes)
        (edges in prop::collection::btree_set(
            prop::collection::btree_set(0..n, 1..=n.min(5)), 0..=max_edges), n in Just(n))
        -> Hypergraph
    {
        Hypergraph::new(n, edges.into_iter().map(|e| e.into_iter().collect()).collect()).unwrap()
    }
}

//! Hypergraphs and their two graph views: the star expansion (a bipartite
//! graph with nodes on the left and hyperedges on the right) and the weighted
//! clique expansion.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// A hypergraph on nodes `0..num_nodes`.
///
/// Each hyperedge is kept as a sorted list of distinct node indices. Duplicate
/// hyperedges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    num_nodes: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Builds a hypergraph, sorting each hyperedge and dropping repeated nodes
    /// inside a hyperedge.
    pub fn new(num_nodes: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (j, mut e) in edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(Error::EmptyHyperedge(j));
            }
            e.sort_unstable();
            e.dedup();
            if let Some(&max) = e.last() {
                if max >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        index: max,
                        len: num_nodes,
                    });
                }
            }
            out.push(e);
        }
        Ok(Self {
            num_nodes,
            edges: out,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            edges: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn num_incidences(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Number of hyperedges containing each node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn edge_sizes(&self) -> Vec<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same hypergraph with hyperedges sorted lexicographically.
    pub fn canonical(&self) -> Self {
        let mut edges = self.edges.clone();
        edges.sort();
        Self {
            num_nodes: self.num_nodes,
            edges,
        }
    }

    /// Renames node `v` to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes {
            return Err(Error::LengthMismatch {
                what: "node permutation",
                expected: self.num_nodes,
                got: perm.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| perm[v]).collect())
            .collect();
        Self::new(self.num_nodes, edges)
    }

    /// Drops nodes that belong to no hyperedge and re-indexes the rest densely,
    /// keeping their relative order.
    pub fn without_isolated_nodes(&self) -> Self {
        let deg = self.degrees();
        let mut remap = vec![usize::MAX; self.num_nodes];
        let mut next = 0;
        for (v, &d) in deg.iter().enumerate() {
            if d > 0 {
                remap[v] = next;
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| remap[v]).collect())
            .collect();
        Self {
            num_nodes: next,
            edges,
        }
    }

    pub fn has_isolated_nodes(&self) -> bool {
        self.degrees().contains(&0)
    }

    /// Connectivity of the star expansion: every node and hyperedge reachable
    /// from every other.
    pub fn is_connected(&self) -> bool {
        star_expansion(self).is_connected()
    }

    pub fn contains_duplicate_edges(&self) -> bool {
        let mut sorted = self.edges.clone();
        sorted.sort();
        sorted.windows(2).any(|w| w[0] == w[1])
    }
}

/// A bipartite graph. Edges are stored sorted by `(left, right)` without
/// duplicates, which is also the canonical edge order used by edge selections.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(l, r) in &edges {
            if l >= n_left {
                return Err(Error::NodeOutOfRange {
                    index: l,
                    len: n_left,
                });
            }
            if r >= n_right {
                return Err(Error::NodeOutOfRange {
                    index: r,
                    len: n_right,
                });
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self {
            n_left,
            n_right,
            edges,
        })
    }

    /// Callers guarantee indices are in range; edges get sorted and deduplicated.
    pub(crate) fn from_parts(
        n_left: usize,
        n_right: usize,
        mut edges: Vec<(usize, usize)>,
    ) -> Self {
        edges.sort_unstable();
        edges.dedup();
        debug_assert!(edges.iter().all(|&(l, r)| l < n_left && r < n_right));
        Self {
            n_left,
            n_right,
            edges,
        }
    }

    /// One left node joined to one right node: the start of every generation run.
    pub fn minimal() -> Self {
        Self {
            n_left: 1,
            n_right: 1,
            edges: vec![(0, 0)],
        }
    }

    pub fn is_minimal(&self) -> bool {
        self.n_left == 1 && self.n_right == 1 && self.edges.len() == 1
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn num_nodes(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, l: usize, r: usize) -> bool {
        self.edges.binary_search(&(l, r)).is_ok()
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for &(l, _) in &self.edges {
            d[l] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for &(_, r) in &self.edges {
            d[r] += 1;
        }
        d
    }

    /// Right neighbours of every left node, ascending.
    pub fn left_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_left];
        for &(l, r) in &self.edges {
            adj[l].push(r);
        }
        adj
    }

    /// Left neighbours of every right node, ascending.
    pub fn right_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_right];
        for &(l, r) in &self.edges {
            adj[r].push(l);
        }
        adj
    }

    /// First isolated node, left side checked first.
    pub fn first_isolated(&self) -> Option<(Side, usize)> {
        if let Some(i) = self.left_degrees().iter().position(|&d| d == 0) {
            return Some((Side::Left, i));
        }
        self.right_degrees()
            .iter()
            .position(|&d| d == 0)
            .map(|j| (Side::Right, j))
    }

    /// Connectivity of the graph on all `n_left + n_right` nodes. Graphs with
    /// at most one node are connected.
    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes();
        if n <= 1 {
            return true;
        }
        let left = self.left_adjacency();
        let right = self.right_adjacency();
        // Right node r is vertex n_left + r.
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            let neighbours: Box<dyn Iterator<Item = usize>> = if u < self.n_left {
                Box::new(left[u].iter().map(|&r| self.n_left + r))
            } else {
                Box::new(right[u - self.n_left].iter().copied())
            };
            for w in neighbours {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Hop distances from left node `source` to every left and right node
    /// (`usize::MAX` when unreachable).
    pub fn distances_from_left(&self, source: usize) -> (Vec<usize>, Vec<usize>) {
        let left = self.left_adjacency();
        let right = self.right_adjacency();
        let mut dl = vec![usize::MAX; self.n_left];
        let mut dr = vec![usize::MAX; self.n_right];
        dl[source] = 0;
        let mut queue = VecDeque::from([(Side::Left, source)]);
        while let Some((side, u)) = queue.pop_front() {
            match side {
                Side::Left => {
                    for &r in &left[u] {
                        if dr[r] == usize::MAX {
                            dr[r] = dl[u] + 1;
                            queue.push_back((Side::Right, r));
                        }
                    }
                }
                Side::Right => {
                    for &l in &right[u] {
                        if dl[l] == usize::MAX {
                            dl[l] = dr[u] + 1;
                            queue.push_back((Side::Left, l));
                        }
                    }
                }
            }
        }
        (dl, dr)
    }

    /// Renames left node `i` to `left_perm[i]` and right node `j` to `right_perm[j]`.
    pub fn relabel(&self, left_perm: &[usize], right_perm: &[usize]) -> Result<Self> {
        if left_perm.len() != self.n_left {
            return Err(Error::LengthMismatch {
                what: "left permutation",
                expected: self.n_left,
                got: left_perm.len(),
            });
        }
        if right_perm.len() != self.n_right {
            return Err(Error::LengthMismatch {
                what: "right permutation",
                expected: self.n_right,
                got: right_perm.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|&(l, r)| (left_perm[l], right_perm[r]))
            .collect();
        Self::new(self.n_left, self.n_right, edges)
    }
}

/// Undirected graph with strictly positive edge weights and no self-loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    num_nodes: usize,
    weights: BTreeMap<(usize, usize), f64>,
}

impl WeightedGraph {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            weights: BTreeMap::new(),
        }
    }

    /// Adds `w` to the weight of `{u, v}`. Self-loops and non-positive weights
    /// are ignored.
    pub fn add_weight(&mut self, u: usize, v: usize, w: f64) {
        assert!(
            u < self.num_nodes && v < self.num_nodes,
            "node out of range"
        );
        if u == v || w <= 0.0 {
            return;
        }
        let key = (u.min(v), u.max(v));
        *self.weights.entry(key).or_insert(0.0) += w;
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.weights.get(&(u.min(v), u.max(v))).copied()
    }

    /// Edges as `(u, v, w)` with `u < v`, in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_nodes];
        for (u, v, w) in self.edges() {
            d[u] += w;
            d[v] += w;
        }
        d
    }

    /// Contracts nodes by `assignment[v] = cluster of v`. Weights between
    /// clusters add up; intra-cluster edges vanish.
    pub fn contract(&self, assignment: &[usize], num_clusters: usize) -> Self {
        let mut out = Self::new(num_clusters);
        for (u, v, w) in self.edges() {
            out.add_weight(assignment[u], assignment[v], w);
        }
        out
    }
}

/// Star expansion: node `v` of `h` is left node `v`, hyperedge `j` is right node `j`.
pub fn star_expansion(h: &Hypergraph) -> BipartiteGraph {
    let edges = h
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(j, e)| e.iter().map(move |&v| (v, j)))
        .collect();
    BipartiteGraph::from_parts(h.num_nodes(), h.num_edges(), edges)
}

/// Clique expansion where `{u, v}` weighs the sum of `1/|e|` over hyperedges
/// containing both.
pub fn clique_expansion(h: &Hypergraph) -> WeightedGraph {
    let mut g = WeightedGraph::new(h.num_nodes());
    for e in h.edges() {
        let w = 1.0 / e.len() as f64;
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                g.add_weight(u, v, w);
            }
        }
    }
    g
}

/// Reads a hypergraph back off a bipartite graph: every right node with at
/// least one edge becomes a hyperedge, isolated left nodes are removed and the
/// remaining ones re-indexed in ascending order.
pub fn from_bipartite(b: &BipartiteGraph) -> Hypergraph {
    let deg = b.left_degrees();
    let mut remap = vec![usize::MAX; b.n_left()];
    let mut next = 0;
    for (v, &d) in deg.iter().enumerate() {
        if d > 0 {
            remap[v] = next;
            next += 1;
        }
    }
    let edges = b
        .right_adjacency()
        .into_iter()
        .filter(|members| !members.is_empty())
        .map(|members| members.into_iter().map(|v| remap[v]).collect())
        .collect();
    Hypergraph {
        num_nodes: next,
        edges,
    }
}

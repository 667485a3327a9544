//! Spectrum-preserving coarsening of hypergraphs.
//!
//! Coarsening runs on two views in parallel. Contraction decisions are made on
//! the weighted clique expansion, whose unnormalized Laplacian equals the
//! hypergraph's, using local variation costs. The same left-node merges are
//! then applied to the star expansion, after which right nodes (hyperedges)
//! with identical neighbourhoods are merged as well.
//!
//! Only pairs of adjacent clique nodes are contracted. A single pair merge
//! never puts more than three hyperedges into one right cluster; when several
//! pairs are merged in one level the bound is enforced by rolling back any
//! pair that would break it.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{
    clique_expansion, star_expansion, BipartiteGraph, Hypergraph, WeightedGraph,
};
use crate::laplacian::graph_laplacian;
use crate::spectral::symmetric_eigen;

/// Largest right cluster a coarsening step may produce.
pub const MAX_RIGHT_CLUSTER: usize = 3;

/// Below this many left nodes a level always uses the largest reduction fraction.
pub const SMALL_GRAPH_NODES: usize = 16;

/// An edge `{u, v}` of the clique expansion scored for contraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionPair {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

/// Local variation cost of contracting every edge of `c`, ascending by cost
/// with ties (agreement to 1e-10) broken by `(min, max)` node index.
///
/// The test space is spanned by the `k` lowest eigenvectors of the Laplacian,
/// each scaled by `λ^{-1/2}` (null-space directions contribute nothing). For an
/// edge with weight `w` the cost is `‖Bᵀ L_e B‖_F`, where `B` projects the two
/// endpoint rows of the scaled basis onto the complement of the constant
/// vector and `L_e` is the local Laplacian `[[2d_u - w, -w], [-w, 2d_v - w]]`.
pub fn local_variation_costs(c: &WeightedGraph, k: usize) -> Vec<ContractionPair> {
    let n = c.num_nodes();
    if c.num_edges() == 0 {
        return Vec::new();
    }
    let eig = symmetric_eigen(&graph_laplacian(c));
    let dims = k.min(n);
    // basis[node][m]
    let mut basis = vec![vec![0.0; dims]; n];
    for m in 0..dims {
        let lambda = eig.eigenvalues[m];
        if lambda < 1e-10 {
            continue;
        }
        let scale = lambda.powf(-0.5);
        for (node, row) in basis.iter_mut().enumerate() {
            row[m] = eig.eigenvectors[m][node] * scale;
        }
    }
    let deg = c.weighted_degrees();

    let mut pairs: Vec<ContractionPair> = c
        .edges()
        .map(|(u, v, w)| {
            let local = [[2.0 * deg[u] - w, -w], [-w, 2.0 * deg[v] - w]];
            // Rows of (I - 11ᵀ/2) [basis_u; basis_v].
            let b: [Vec<f64>; 2] = [
                (0..dims)
                    .map(|m| 0.5 * (basis[u][m] - basis[v][m]))
                    .collect(),
                (0..dims)
                    .map(|m| 0.5 * (basis[v][m] - basis[u][m]))
                    .collect(),
            ];
            let mut frob = 0.0;
            for a in 0..dims {
                for bcol in 0..dims {
                    let mut s = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            s += b[i][a] * local[i][j] * b[j][bcol];
                        }
                    }
                    frob += s * s;
                }
            }
            ContractionPair {
                u,
                v,
                cost: frob.sqrt(),
            }
        })
        .collect();
    // Costs that agree to 1e-10 count as tied so that symmetric edges fall back
    // to index order instead of rounding noise.
    let key = |c: f64| (c * 1e10).round();
    pairs.sort_by(|a, b| {
        key(a.cost)
            .total_cmp(&key(b.cost))
            .then((a.u, a.v).cmp(&(b.u, b.v)))
    });
    pairs
}

/// One level of coarsening: which fine nodes each coarse node stands for, and
/// the resulting coarse views.
///
/// Coarse node `p` on either side is `partition[p]`. Parts are ordered by
/// their smallest member and each part lists its members ascending. This order
/// fixes the correspondence between fine nodes and expansion copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseningStep {
    pub left_partition: Vec<Vec<usize>>,
    pub right_partition: Vec<Vec<usize>>,
    pub coarse_bipartite: BipartiteGraph,
    pub coarse_clique: WeightedGraph,
}

impl CoarseningStep {
    pub fn max_right_cluster(&self) -> usize {
        self.right_partition.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_left_cluster(&self) -> usize {
        self.left_partition.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Fine left nodes in expansion order: the members of part 0, then part 1, ...
    pub fn left_fine_order(&self) -> Vec<usize> {
        self.left_partition.iter().flatten().copied().collect()
    }

    pub fn right_fine_order(&self) -> Vec<usize> {
        self.right_partition.iter().flatten().copied().collect()
    }

    /// The same step after renaming coarse left node `p` to `left_perm[p]` and
    /// coarse right node `q` to `right_perm[q]`.
    pub fn permute_coarse(&self, left_perm: &[usize], right_perm: &[usize]) -> Result<Self> {
        let coarse_bipartite = self.coarse_bipartite.relabel(left_perm, right_perm)?;
        let mut left_partition = vec![Vec::new(); self.left_partition.len()];
        for (p, part) in self.left_partition.iter().enumerate() {
            left_partition[left_perm[p]] = part.clone();
        }
        let mut right_partition = vec![Vec::new(); self.right_partition.len()];
        for (q, part) in self.right_partition.iter().enumerate() {
            right_partition[right_perm[q]] = part.clone();
        }
        let mut coarse_clique = WeightedGraph::new(self.coarse_clique.num_nodes());
        for (u, v, w) in self.coarse_clique.edges() {
            coarse_clique.add_weight(left_perm[u], left_perm[v], w);
        }
        Ok(Self {
            left_partition,
            right_partition,
            coarse_bipartite,
            coarse_clique,
        })
    }
}

/// Partition ids for a list of parts, checking it covers `0..n` exactly once.
fn assignment_of(parts: &[Vec<usize>], n: usize) -> Result<Vec<usize>> {
    let mut assignment = vec![usize::MAX; n];
    for (p, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "partition part {p} is empty"
            )));
        }
        for &v in part {
            if v >= n {
                return Err(Error::NodeOutOfRange { index: v, len: n });
            }
            if assignment[v] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "node {v} appears in more than one part"
                )));
            }
            assignment[v] = p;
        }
    }
    if let Some(v) = assignment.iter().position(|&a| a == usize::MAX) {
        return Err(Error::InvalidParameter(format!("node {v} is in no part")));
    }
    Ok(assignment)
}

fn induces_connected(c: &WeightedGraph, part: &[usize], adjacency: &[Vec<usize>]) -> bool {
    if part.len() <= 1 {
        return true;
    }
    let _ = c;
    let inside: std::collections::HashSet<usize> = part.iter().copied().collect();
    let mut seen = std::collections::HashSet::from([part[0]]);
    let mut queue = VecDeque::from([part[0]]);
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if inside.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == part.len()
}

/// Merges left nodes by `assignment` and then groups right nodes whose merged
/// neighbourhoods coincide. Returns the right partition and the coarse graph.
fn merge_bipartite(
    b: &BipartiteGraph,
    assignment: &[usize],
    n_coarse_left: usize,
) -> (Vec<Vec<usize>>, BipartiteGraph) {
    let mut groups: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut right_partition: Vec<Vec<usize>> = Vec::new();
    let mut group_neighbourhoods: Vec<Vec<usize>> = Vec::new();
    for (j, members) in b.right_adjacency().into_iter().enumerate() {
        let mut nb: Vec<usize> = members.into_iter().map(|v| assignment[v]).collect();
        nb.sort_unstable();
        nb.dedup();
        match groups.get(&nb) {
            Some(&g) => right_partition[g].push(j),
            None => {
                groups.insert(nb.clone(), right_partition.len());
                right_partition.push(vec![j]);
                group_neighbourhoods.push(nb);
            }
        }
    }
    let edges = group_neighbourhoods
        .iter()
        .enumerate()
        .flat_map(|(g, nb)| nb.iter().map(move |&l| (l, g)))
        .collect();
    let coarse = BipartiteGraph::from_parts(n_coarse_left, right_partition.len(), edges);
    (right_partition, coarse)
}

/// Size of the largest right cluster produced by merging left nodes per `assignment`.
fn max_cluster_after(b: &BipartiteGraph, right_adj: &[Vec<usize>], assignment: &[usize]) -> usize {
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::with_capacity(b.n_right());
    let mut max = 0;
    for members in right_adj {
        let mut nb: Vec<usize> = members.iter().map(|&v| assignment[v]).collect();
        nb.sort_unstable();
        nb.dedup();
        let c = counts.entry(nb).or_insert(0);
        *c += 1;
        max = max.max(*c);
    }
    max
}

/// Coarsens both views by an explicit left partition. Every part must induce a
/// connected subgraph of `c`.
pub fn coarsen_with_partition(
    b: &BipartiteGraph,
    c: &WeightedGraph,
    left_partition: Vec<Vec<usize>>,
) -> Result<CoarseningStep> {
    if c.num_nodes() != b.n_left() {
        return Err(Error::LengthMismatch {
            what: "clique expansion nodes",
            expected: b.n_left(),
            got: c.num_nodes(),
        });
    }
    let mut parts: Vec<Vec<usize>> = left_partition
        .into_iter()
        .map(|mut p| {
            p.sort_unstable();
            p
        })
        .collect();
    parts.sort_by_key(|p| p.first().copied().unwrap_or(usize::MAX));
    let assignment = assignment_of(&parts, b.n_left())?;

    let mut adjacency = vec![Vec::new(); c.num_nodes()];
    for (u, v, _) in c.edges() {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    for (p, part) in parts.iter().enumerate() {
        if !induces_connected(c, part, &adjacency) {
            return Err(Error::InvalidParameter(format!(
                "part {p} does not induce a connected subgraph"
            )));
        }
    }

    let (right_partition, coarse_bipartite) = merge_bipartite(b, &assignment, parts.len());
    let coarse_clique = c.contract(&assignment, parts.len());
    Ok(CoarseningStep {
        left_partition: parts,
        right_partition,
        coarse_bipartite,
        coarse_clique,
    })
}

/// Contracts a single clique edge.
pub fn coarsen_pair(
    b: &BipartiteGraph,
    c: &WeightedGraph,
    pair: &ContractionPair,
) -> Result<CoarseningStep> {
    if pair.u == pair.v || c.weight(pair.u, pair.v).is_none() {
        return Err(Error::InvalidParameter(format!(
            "({}, {}) is not an edge of the clique expansion",
            pair.u, pair.v
        )));
    }
    coarsen_with_partition(b, c, matching_partition(b.n_left(), &[(pair.u, pair.v)]))
}

fn matching_partition(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut partner = vec![usize::MAX; n];
    for &(u, v) in pairs {
        partner[u] = v;
        partner[v] = u;
    }
    let mut parts = Vec::with_capacity(n - pairs.len());
    for v in 0..n {
        match partner[v] {
            usize::MAX => parts.push(vec![v]),
            w if w > v => parts.push(vec![v, w]),
            _ => {}
        }
    }
    parts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseningParams {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Probability that a candidate contraction is considered at all.
    pub lambda: f64,
    /// Size of the preserved eigenspace in the cost function.
    pub k: usize,
}

impl Default for CoarseningParams {
    fn default() -> Self {
        Self {
            rho_min: 0.1,
            rho_max: 0.3,
            lambda: 0.3,
            k: 8,
        }
    }
}

impl CoarseningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho_max && self.rho_max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "reduction fraction range [{}, {}] must satisfy 0 < min <= max < 1",
                self.rho_min, self.rho_max
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) || self.lambda == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "randomization parameter {} must lie in (0, 1]",
                self.lambda
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter(
                "eigenspace size must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// `ρ_min / (1 - ρ_min)`: the per-level growth rate that bounds sequence length.
    pub fn epsilon(&self) -> f64 {
        self.rho_min / (1.0 - self.rho_min)
    }

    /// `⌈log_{1+ε} n⌉`.
    pub fn length_bound(&self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        ((n as f64).ln() / (1.0 + self.epsilon()).ln()).ceil() as usize
    }
}

/// Bipartite graphs from the input (`graphs[0]`) down to the minimal pair
/// (`graphs[L]`), with `steps[l]` taking `graphs[l]` to `graphs[l + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseningSequence {
    pub graphs: Vec<BipartiteGraph>,
    pub steps: Vec<CoarseningStep>,
    pub reduction_fractions: Vec<f64>,
}

impl CoarseningSequence {
    /// Number of coarsening steps `L`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn max_right_cluster(&self) -> usize {
        self.steps
            .iter()
            .map(CoarseningStep::max_right_cluster)
            .max()
            .unwrap_or(0)
    }
}

fn stuck(b: &BipartiteGraph) -> Error {
    Error::CoarseningStuck {
        n_left: b.n_left(),
        n_right: b.n_right(),
        graph: serde_json::to_string(b).unwrap_or_default(),
    }
}

/// Samples a random coarsening sequence of `h` down to a single connected pair.
///
/// Each level draws a reduction fraction, scores all clique edges once, and
/// walks them from cheapest to most expensive. A pair is considered with
/// probability `lambda`, skipped if it touches an already merged node, and
/// rolled back if the accumulated merges would create a right cluster larger
/// than three. The level stops once more than `red_frac · n_left` nodes have
/// been removed. If the walk ends short of that, the level keeps what it has;
/// a walk that accepts nothing is repeated.
pub fn sample_coarsening_sequence(
    h: &Hypergraph,
    params: &CoarseningParams,
    rng: &mut impl Rng,
) -> Result<CoarseningSequence> {
    params.validate()?;
    if h.num_nodes() == 0 {
        return Err(Error::InvalidParameter("hypergraph has no nodes".into()));
    }
    let mut b = star_expansion(h);
    let mut c = clique_expansion(h);
    if !b.is_connected() {
        return Err(stuck(&b));
    }
    let mut seq = CoarseningSequence {
        graphs: vec![b.clone()],
        steps: Vec::new(),
        reduction_fractions: Vec::new(),
    };

    while !b.is_minimal() {
        let n_left = b.n_left();
        let drawn = rng.random_range(params.rho_min..=params.rho_max);
        let red_frac = if n_left < SMALL_GRAPH_NODES {
            params.rho_max
        } else {
            drawn
        };

        let step = if n_left == 1 {
            // Only duplicate hyperedges remain to be merged.
            let step = coarsen_with_partition(&b, &c, vec![vec![0]])?;
            if step.coarse_bipartite.n_right() == b.n_right()
                || step.max_right_cluster() > MAX_RIGHT_CLUSTER
            {
                return Err(stuck(&b));
            }
            step
        } else {
            let pairs = local_variation_costs(&c, params.k);
            let right_adj = b.right_adjacency();
            let identity: Vec<usize> = (0..n_left).collect();
            let feasible = pairs.iter().any(|p| {
                let mut a = identity.clone();
                a[p.v] = p.u;
                max_cluster_after(&b, &right_adj, &a) <= MAX_RIGHT_CLUSTER
            });
            if !feasible {
                return Err(stuck(&b));
            }

            let mut accepted: Vec<(usize, usize)> = Vec::new();
            let mut assignment = identity;
            while accepted.is_empty() {
                for p in &pairs {
                    if rng.random::<f64>() < params.lambda
                        && assignment[p.u] == p.u
                        && assignment[p.v] == p.v
                        && !accepted
                            .iter()
                            .any(|&(x, y)| x == p.u || y == p.u || x == p.v || y == p.v)
                    {
                        assignment[p.v] = p.u;
                        if max_cluster_after(&b, &right_adj, &assignment) <= MAX_RIGHT_CLUSTER {
                            accepted.push((p.u, p.v));
                        } else {
                            assignment[p.v] = p.v;
                        }
                    }
                    if accepted.len() as f64 > red_frac * n_left as f64 {
                        break;
                    }
                }
            }
            coarsen_with_partition(&b, &c, matching_partition(n_left, &accepted))?
        };

        debug_assert!(step.max_right_cluster() <= MAX_RIGHT_CLUSTER);
        b = step.coarse_bipartite.clone();
        c = step.coarse_clique.clone();
        seq.graphs.push(b.clone());
        seq.steps.push(step);
        seq.reduction_fractions.push(red_frac);
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(n);
        for i in 0..n - 1 {
            g.add_weight(i, i + 1, 1.0);
        }
        g
    }

    #[test]
    fn triangle_costs_are_equal() {
        let mut g = WeightedGraph::new(3);
        g.add_weight(0, 1, 1.0);
        g.add_weight(1, 2, 1.0);
        g.add_weight(0, 2, 1.0);
        // With k >= n the whole spectrum is used, so the degenerate pair λ = 3 does
        // not pick out a direction.
        let costs = local_variation_costs(&g, 8);
        assert_eq!(costs.len(), 3);
        for c in &costs {
            assert!((c.cost - costs[0].cost).abs() < 1e-12);
        }
        // Ties fall back to index order.
        assert_eq!((costs[0].u, costs[0].v), (0, 1));
        assert_eq!((costs[2].u, costs[2].v), (1, 2));
    }

    #[test]
    fn symmetric_dumbbells_have_matching_costs() {
        // Two copies of a weighted dumbbell 0-1-2-3 (heavy ends) on nodes 0..4 and 4..8.
        let mut g = WeightedGraph::new(8);
        for off in [0, 4] {
            g.add_weight(off, off + 1, 2.0);
            g.add_weight(off + 1, off + 2, 0.5);
            g.add_weight(off + 2, off + 3, 2.0);
        }
        let costs = local_variation_costs(&g, 4);
        let cost = |u, v| costs.iter().find(|p| p.u == u && p.v == v).unwrap().cost;
        for (u, v) in [(0, 1), (1, 2), (2, 3)] {
            assert!((cost(u, v) - cost(u + 4, v + 4)).abs() < 1e-9);
        }
    }

    #[test]
    fn path_costs_distinguish_middle_edge() {
        let costs = local_variation_costs(&path(4), 2);
        let cost = |u, v| costs.iter().find(|p| p.u == u && p.v == v).unwrap().cost;
        assert!((cost(0, 1) - cost(2, 3)).abs() < 1e-12);
        assert!((cost(0, 1) - cost(1, 2)).abs() > 1e-6);
    }

    #[test]
    fn pair_contraction_without_right_merge() {
        let h = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let (b, c) = (star_expansion(&h), clique_expansion(&h));
        let step = coarsen_pair(
            &b,
            &c,
            &ContractionPair {
                u: 0,
                v: 1,
                cost: 0.0,
            },
        )
        .unwrap();
        assert_eq!(step.left_partition, vec![vec![0, 1], vec![2]]);
        assert_eq!(step.right_partition, vec![vec![0], vec![1]]);
        // Hyperedge 0 becomes {01}, hyperedge 1 becomes {01, 2}.
        assert_eq!(step.coarse_bipartite.edges(), &[(0, 0), (0, 1), (1, 1)]);
        assert_eq!(step.coarse_clique.weight(0, 1), Some(0.5));
    }

    #[test]
    fn pair_contraction_with_right_merge() {
        let h = Hypergraph::new(3, vec![vec![0, 2], vec![1, 2]]).unwrap();
        let (b, c) = (star_expansion(&h), clique_expansion(&h));
        // 0 and 1 are not adjacent in the clique expansion.
        assert!(coarsen_pair(
            &b,
            &c,
            &ContractionPair {
                u: 0,
                v: 1,
                cost: 0.0
            }
        )
        .is_err());
        let step = coarsen_with_partition(&b, &c, vec![vec![0, 1], vec![2]]);
        assert!(step.is_err(), "disconnected part must be rejected");

        // Contract via a partition that is connected: add the edge {0,1}.
        let h = Hypergraph::new(3, vec![vec![0, 2], vec![1, 2], vec![0, 1, 2]]).unwrap();
        let (b, c) = (star_expansion(&h), clique_expansion(&h));
        let step = coarsen_pair(
            &b,
            &c,
            &ContractionPair {
                u: 0,
                v: 1,
                cost: 0.0,
            },
        )
        .unwrap();
        assert_eq!(step.right_partition, vec![vec![0, 1, 2]]);
        assert_eq!(step.max_right_cluster(), 3);
    }

    #[test]
    fn spec_merge_example_two_hyperedges() {
        // {0,2} and {1,2} with 0-1 adjacent through an extra hyperedge {0,1,3}
        // would merge three; use a two-hyperedge-only variant instead.
        let h = Hypergraph::new(3, vec![vec![0, 2], vec![1, 2]]).unwrap();
        let b = star_expansion(&h);
        let mut c = clique_expansion(&h);
        c.add_weight(0, 1, 1.0);
        let step = coarsen_pair(
            &b,
            &c,
            &ContractionPair {
                u: 0,
                v: 1,
                cost: 0.0,
            },
        )
        .unwrap();
        assert_eq!(step.right_partition, vec![vec![0, 1]]);
        assert_eq!(step.coarse_bipartite.edges(), &[(0, 0), (1, 0)]);
    }

    #[test]
    fn singleton_sequence_is_empty() {
        let h = Hypergraph::new(1, vec![vec![0]]).unwrap();
        let seq = sample_coarsening_sequence(
            &h,
            &CoarseningParams::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.graphs.len(), 1);
    }

    #[test]
    fn two_node_edge_takes_one_step() {
        let h = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        let seq = sample_coarsening_sequence(
            &h,
            &CoarseningParams::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(seq.len(), 1);
        assert!(seq.graphs[1].is_minimal());
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let h = Hypergraph::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let err = sample_coarsening_sequence(
            &h,
            &CoarseningParams::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(err, Err(Error::CoarseningStuck { .. })));
    }

    #[test]
    fn sequence_invariants_on_cycle() {
        let edges: Vec<Vec<usize>> = (0..20).map(|i| vec![i, (i + 1) % 20]).collect();
        let h = Hypergraph::new(20, edges).unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq =
                sample_coarsening_sequence(&h, &CoarseningParams::default(), &mut rng).unwrap();
            assert_eq!(seq.graphs[0], star_expansion(&h));
            assert!(seq.graphs.last().unwrap().is_minimal());
            assert!(seq.max_right_cluster() <= MAX_RIGHT_CLUSTER);
            for w in seq.graphs.windows(2) {
                assert!(w[1].n_left() < w[0].n_left());
                assert!(w[1].num_edges() <= w[0].num_edges());
            }
        }
    }

    #[test]
    fn permute_coarse_reorders_parts() {
        let h = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let (b, c) = (star_expansion(&h), clique_expansion(&h));
        let step = coarsen_pair(
            &b,
            &c,
            &ContractionPair {
                u: 1,
                v: 2,
                cost: 0.0,
            },
        )
        .unwrap();
        let p = step.permute_coarse(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(p.left_partition, vec![vec![1, 2], vec![0]]);
        assert_eq!(p.left_fine_order(), vec![1, 2, 0]);
    }

    #[test]
    fn params_validation_and_bound() {
        assert!(CoarseningParams::default().validate().is_ok());
        let bad = CoarseningParams {
            rho_min: 0.4,
            rho_max: 0.3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        // ε = 1/9, ⌈ln 32 / ln(10/9)⌉ = 33.
        assert_eq!(CoarseningParams::default().length_bound(32), 33);
    }
}

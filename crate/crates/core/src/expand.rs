//! Expansion and refinement, the two halves of undoing a coarsening step.
//!
//! Expanding a bipartite graph replaces every node by a cluster of copies and
//! connects every pair of copies whose parents were adjacent. Refinement then
//! keeps a subset of those edges. Copies are laid out parent by parent, so the
//! copies of left node `p` are the contiguous range starting at the sum of
//! `left[..p]`. This fixed layout is what lets [`inversion_labels`] reproduce
//! a finer level exactly rather than up to isomorphism.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coarsen::CoarseningStep;
use crate::error::{Error, Result};
use crate::hypergraph::BipartiteGraph;

/// Number of copies per left and per right node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionVectors {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl ExpansionVectors {
    pub fn new(left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        if let Some(p) = left.iter().chain(&right).position(|&c| c == 0) {
            return Err(Error::InvalidParameter(format!(
                "expansion count at position {p} is zero"
            )));
        }
        Ok(Self { left, right })
    }

    /// The identity expansion of `b`.
    pub fn ones(b: &BipartiteGraph) -> Self {
        Self {
            left: vec![1; b.n_left()],
            right: vec![1; b.n_right()],
        }
    }

    pub fn check_against(&self, b: &BipartiteGraph) -> Result<()> {
        if self.left.len() != b.n_left() {
            return Err(Error::LengthMismatch {
                what: "left expansion vector",
                expected: b.n_left(),
                got: self.left.len(),
            });
        }
        if self.right.len() != b.n_right() {
            return Err(Error::LengthMismatch {
                what: "right expansion vector",
                expected: b.n_right(),
                got: self.right.len(),
            });
        }
        Ok(())
    }

    pub fn total_left(&self) -> usize {
        self.left.iter().sum()
    }

    pub fn total_right(&self) -> usize {
        self.right.iter().sum()
    }

    pub fn is_identity(&self) -> bool {
        self.left.iter().chain(&self.right).all(|&c| c == 1)
    }
}

fn offsets(counts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0;
    out.push(0);
    for &c in counts {
        acc += c;
        out.push(acc);
    }
    out
}

/// One keep/drop bit per edge of an expanded graph, in its sorted edge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSelection(pub Vec<bool>);

impl EdgeSelection {
    pub fn all(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_selected(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Replaces every node by its copies and joins all copies of adjacent parents.
pub fn expand(b: &BipartiteGraph, ev: &ExpansionVectors) -> Result<BipartiteGraph> {
    ev.check_against(b)?;
    let lo = offsets(&ev.left);
    let ro = offsets(&ev.right);
    let mut edges = Vec::new();
    for &(p, q) in b.edges() {
        for i in lo[p]..lo[p + 1] {
            for j in ro[q]..ro[q + 1] {
                edges.push((i, j));
            }
        }
    }
    Ok(BipartiteGraph::from_parts(
        ev.total_left(),
        ev.total_right(),
        edges,
    ))
}

/// Keeps exactly the edges whose selection bit is set.
pub fn refine(b_exp: &BipartiteGraph, e: &EdgeSelection) -> Result<BipartiteGraph> {
    if e.len() != b_exp.num_edges() {
        return Err(Error::LengthMismatch {
            what: "edge selection",
            expected: b_exp.num_edges(),
            got: e.len(),
        });
    }
    let edges = b_exp
        .edges()
        .iter()
        .zip(&e.0)
        .filter(|(_, &keep)| keep)
        .map(|(&edge, _)| edge)
        .collect();
    Ok(BipartiteGraph::from_parts(
        b_exp.n_left(),
        b_exp.n_right(),
        edges,
    ))
}

/// Default perturbation radius used during training.
pub const DEFAULT_PERTURB_RADIUS: usize = 1;
/// Default probability of adding each eligible perturbation edge.
pub const DEFAULT_PERTURB_PROB: f64 = 0.1;

/// [`expand`] plus random extra edges between copies of parents that are not
/// adjacent but lie within bipartite distance `2 * radius + 1` of each other.
/// Each eligible copy pair is added independently with probability `p`.
///
/// Candidates are visited in sorted `(left copy, right copy)` order. No random
/// numbers are drawn when `p` is 0 or 1.
pub fn perturbed_expand(
    b: &BipartiteGraph,
    ev: &ExpansionVectors,
    radius: usize,
    p: f64,
    rng: &mut impl Rng,
) -> Result<BipartiteGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfDomain {
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let base = expand(b, ev)?;
    if p == 0.0 || radius == 0 {
        return Ok(base);
    }
    let max_dist = 2 * radius + 1;
    let lo = offsets(&ev.left);
    let ro = offsets(&ev.right);
    let mut edges = base.edges().to_vec();
    for parent_l in 0..b.n_left() {
        let (_, dr) = b.distances_from_left(parent_l);
        for i in lo[parent_l]..lo[parent_l + 1] {
            for (parent_r, &d) in dr.iter().enumerate() {
                // Bipartite distances between sides are odd; 1 means already adjacent.
                if d == usize::MAX || d < 3 || d > max_dist {
                    continue;
                }
                for j in ro[parent_r]..ro[parent_r + 1] {
                    if p >= 1.0 || rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
        }
    }
    Ok(BipartiteGraph::from_parts(
        base.n_left(),
        base.n_right(),
        edges,
    ))
}

fn inverse_order(order: &[usize], what: &'static str) -> Result<Vec<usize>> {
    let mut perm = vec![usize::MAX; order.len()];
    for (k, &v) in order.iter().enumerate() {
        if v >= order.len() || perm[v] != usize::MAX {
            return Err(Error::InconsistentStep(format!(
                "{what} partition is not a permutation"
            )));
        }
        perm[v] = k;
    }
    Ok(perm)
}

/// Renames the nodes of `fine` so that the members of each part of `step`
/// occupy the copy slots of their coarse node: fine node `order[k]` becomes `k`.
pub fn align_fine(fine: &BipartiteGraph, step: &CoarseningStep) -> Result<BipartiteGraph> {
    let lorder = step.left_fine_order();
    let rorder = step.right_fine_order();
    if lorder.len() != fine.n_left() || rorder.len() != fine.n_right() {
        return Err(Error::InconsistentStep(format!(
            "step partitions cover {}x{} nodes, fine graph has {}x{}",
            lorder.len(),
            rorder.len(),
            fine.n_left(),
            fine.n_right()
        )));
    }
    let lperm = inverse_order(&lorder, "left")?;
    let rperm = inverse_order(&rorder, "right")?;
    fine.relabel(&lperm, &rperm)
}

/// Cluster sizes of `step` as expansion counts for its coarse graph.
pub fn cluster_sizes(step: &CoarseningStep) -> ExpansionVectors {
    ExpansionVectors {
        left: step.left_partition.iter().map(Vec::len).collect(),
        right: step.right_partition.iter().map(Vec::len).collect(),
    }
}

/// Marks each edge of `host` that is present in `target`. Both graphs must
/// share node sets.
pub fn edge_labels(host: &BipartiteGraph, target: &BipartiteGraph) -> Result<EdgeSelection> {
    if host.n_left() != target.n_left() || host.n_right() != target.n_right() {
        return Err(Error::InconsistentStep(format!(
            "host is {}x{}, target is {}x{}",
            host.n_left(),
            host.n_right(),
            target.n_left(),
            target.n_right()
        )));
    }
    Ok(EdgeSelection(
        host.edges()
            .iter()
            .map(|&(l, r)| target.has_edge(l, r))
            .collect(),
    ))
}

/// Expansion counts and edge selection that turn `step.coarse_bipartite` back
/// into `fine`: `refine(expand(coarse, v), e) == align_fine(fine, step)`.
pub fn inversion_labels(
    fine: &BipartiteGraph,
    step: &CoarseningStep,
) -> Result<(ExpansionVectors, EdgeSelection)> {
    let ev = cluster_sizes(step);
    let aligned = align_fine(fine, step)?;
    let expanded = expand(&step.coarse_bipartite, &ev)?;
    let e = edge_labels(&expanded, &aligned)?;
    if e.count_selected() != aligned.num_edges() {
        return Err(Error::InconsistentStep(
            "fine graph has edges between copies of non-adjacent coarse nodes".into(),
        ));
    }
    Ok((ev, e))
}

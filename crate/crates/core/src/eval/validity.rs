use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hypergraph::{clique_expansion, Hypergraph};
use crate::laplacian::{graph_laplacian, DenseSymMatrix};
use crate::spectral::symmetric_eigen;

/// True iff there is a hyperedge and some node lies in every hyperedge.
pub fn valid_ego(h: &Hypergraph) -> bool {
    let Some((first, rest)) = h.edges().split_first() else {
        return false;
    };
    first
        .iter()
        .any(|v| rest.iter().all(|e| e.binary_search(v).is_ok()))
}

/// GYO reduction: drop nodes that occur in only one hyperedge, then
/// hyperedges that are empty or contained in another, until nothing changes.
/// Returns whether every hyperedge was eliminated.
fn gyo_empties(h: &Hypergraph) -> bool {
    let mut edges: Vec<Vec<usize>> = h.edges().to_vec();
    loop {
        let mut changed = false;
        let mut deg = vec![0usize; h.num_nodes()];
        for e in &edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        for e in &mut edges {
            let before = e.len();
            e.retain(|&v| deg[v] > 1);
            changed |= e.len() != before;
        }
        let mut keep = vec![true; edges.len()];
        for i in 0..edges.len() {
            if edges[i].is_empty() {
                keep[i] = false;
                continue;
            }
            for j in 0..edges.len() {
                if i == j || !keep[j] {
                    continue;
                }
                let inside = edges[i].iter().all(|v| edges[j].binary_search(v).is_ok());
                // Equal copies: the later one goes.
                if inside && (edges[i].len() < edges[j].len() || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
        if keep.contains(&false) {
            changed = true;
            let mut it = keep.iter();
            edges.retain(|_| *it.next().unwrap());
        }
        if edges.is_empty() {
            return true;
        }
        if !changed {
            return false;
        }
    }
}

/// Connected, alpha-acyclic (GYO empties it) and no two hyperedges share more
/// than one node. A hypergraph without hyperedges is not a tree.
pub fn valid_tree(h: &Hypergraph) -> bool {
    if h.num_edges() == 0 || !h.is_connected() {
        return false;
    }
    let edges = h.edges();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let shared = edges[i]
                .iter()
                .filter(|v| edges[j].binary_search(v).is_ok())
                .count();
            if shared > 1 {
                return false;
            }
        }
    }
    gyo_empties(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmCheck {
    pub p_intra: f64,
    pub p_inter: f64,
    /// Multiplicative tolerance on both rates.
    pub tol: f64,
    /// Allowed relative deviation of a group's size from `n / 2`.
    pub balance: f64,
    /// Expected counts below this only get the upper bound checked, since a
    /// rare event may legitimately not occur at all.
    pub min_expected: f64,
}

impl Default for SbmCheck {
    fn default() -> Self {
        Self {
            p_intra: 0.05,
            p_inter: 0.001,
            tol: 2.0,
            balance: 0.25,
            min_expected: 10.0,
        }
    }
}

/// Splits nodes in two halves by the Fiedler vector of the clique-expansion
/// Laplacian. Returns `true` for members of the first half. The constant
/// direction is shifted to the top of the spectrum first, so disconnected
/// graphs split along their components.
pub fn spectral_bisection(h: &Hypergraph) -> Vec<bool> {
    let n = h.num_nodes();
    if n == 0 {
        return Vec::new();
    }
    let l = graph_laplacian(&clique_expansion(h)).into_matrix();
    let shift = l.trace() + 1.0;
    let m = l + DMatrix::from_element(n, n, shift / n as f64);
    let eig = symmetric_eigen(&DenseSymMatrix::new(m).expect("shifted Laplacian is symmetric"));
    let fiedler = &eig.eigenvectors[0];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(a.cmp(&b)));
    let mut side = vec![false; n];
    for &v in &order[..n / 2] {
        side[v] = true;
    }
    side
}

fn choose3(k: usize) -> f64 {
    if k < 3 {
        0.0
    } else {
        (k * (k - 1) * (k - 2)) as f64 / 6.0
    }
}

/// Observed intra- and inter-group 3-edge rates and their candidate counts.
pub fn intra_inter_rates(h: &Hypergraph, side: &[bool]) -> ((f64, f64), (f64, f64)) {
    let a = side.iter().filter(|&&s| s).count();
    let b = side.len() - a;
    let intra_slots = choose3(a) + choose3(b);
    let inter_slots = choose3(side.len()) - intra_slots;
    let (mut intra, mut inter) = (0usize, 0usize);
    for e in h.edges().iter().filter(|e| e.len() == 3) {
        if e.iter().all(|&v| side[v] == side[e[0]]) {
            intra += 1;
        } else {
            inter += 1;
        }
    }
    let rate = |c: usize, slots: f64| if slots > 0.0 { c as f64 / slots } else { 0.0 };
    (
        (rate(intra, intra_slots), intra_slots),
        (rate(inter, inter_slots), inter_slots),
    )
}

fn rate_ok(observed: f64, reference: f64, slots: f64, check: &SbmCheck) -> bool {
    if observed > reference * check.tol {
        return false;
    }
    reference * slots < check.min_expected || observed >= reference / check.tol
}

/// Two balanced groups whose 3-edge rates inside and across groups match the
/// reference probabilities within the tolerance factor. Every hyperedge must
/// have exactly three nodes.
pub fn valid_sbm(h: &Hypergraph, check: &SbmCheck) -> bool {
    let n = h.num_nodes();
    if n < 4 || h.num_edges() == 0 || h.edges().iter().any(|e| e.len() != 3) {
        return false;
    }
    let side = spectral_bisection(h);
    let a = side.iter().filter(|&&s| s).count() as f64;
    let half = n as f64 / 2.0;
    if (a - half).abs() > check.balance * half
        || ((n as f64 - a) - half).abs() > check.balance * half
    {
        return false;
    }
    let ((intra, intra_slots), (inter, inter_slots)) = intra_inter_rates(h, &side);
    rate_ok(intra, check.p_intra, intra_slots, check)
        && rate_ok(inter, check.p_inter, inter_slots, check)
}

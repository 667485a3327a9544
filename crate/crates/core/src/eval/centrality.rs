use std::collections::VecDeque;

use crate::hypergraph::Hypergraph;

/// Per-hyperedge centralities on the line graph where two hyperedges are
/// adjacent when they share at least one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Centralities {
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub harmonic: Vec<f64>,
}

/// Adjacency lists of the line graph, sorted.
pub fn line_graph(h: &Hypergraph) -> Vec<Vec<usize>> {
    let m = h.num_edges();
    let mut incident = vec![Vec::new(); h.num_nodes()];
    for (j, e) in h.edges().iter().enumerate() {
        for &v in e {
            incident[v].push(j);
        }
    }
    let mut adj = vec![Vec::new(); m];
    for edges in &incident {
        for &a in edges {
            for &b in edges {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Closeness is `(r - 1) / Σ d` over the `r` hyperedges reachable from a
/// hyperedge (itself included), harmonic is `Σ 1/d`, and betweenness is
/// Brandes' count normalized by `(m - 1)(m - 2)` with both directions of
/// every pair counted.
pub fn centralities(h: &Hypergraph) -> Centralities {
    let adj = line_graph(h);
    let m = adj.len();
    let mut closeness = vec![0.0; m];
    let mut harmonic = vec![0.0; m];
    let mut betweenness = vec![0.0; m];

    let mut dist = vec![usize::MAX; m];
    let mut sigma = vec![0.0f64; m];
    let mut delta = vec![0.0f64; m];
    let mut order = Vec::with_capacity(m);
    let mut queue = VecDeque::new();
    for s in 0..m {
        dist.fill(usize::MAX);
        sigma.fill(0.0);
        delta.fill(0.0);
        order.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        let total: usize = order.iter().map(|&v| dist[v]).sum();
        if total > 0 {
            closeness[s] = (order.len() - 1) as f64 / total as f64;
        }
        // Summed in index order so the value does not depend on BFS order.
        harmonic[s] = (0..m)
            .filter(|&v| v != s && dist[v] != usize::MAX)
            .map(|v| 1.0 / dist[v] as f64)
            .sum();
        for &w in order.iter().rev() {
            for &v in &adj[w] {
                if dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                betweenness[w] += delta[w];
            }
        }
    }
    if m > 2 {
        let scale = 1.0 / ((m - 1) * (m - 2)) as f64;
        betweenness.iter_mut().for_each(|b| *b *= scale);
    } else {
        betweenness.fill(0.0);
    }
    Centralities {
        closeness,
        betweenness,
        harmonic,
    }
}

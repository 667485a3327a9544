mod common;

use std::collections::HashMap;

use common::{arb_hypergraph, arb_permutation, random_hypergraph};
use hgen_core::datagen::{gen_er, gen_sbm};
use hgen_core::eval::{
    centralities, evaluate, hypergraph_hash, node_num_diff, spectral_mmd, valid_sbm, valid_tree,
    wasserstein_1d, EvalConfig, SbmCheck, SpectralParams, Validator,
};
use hgen_core::Hypergraph;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum-cost perfect matching (Hungarian algorithm, O(n³)). For two
/// equal-size samples with uniform weights the optimal transport plan is a
/// permutation, so this solves the transport LP exactly.
fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

#[test]
fn wasserstein_matches_transport_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..100 {
        let a: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        // Half the trials use integer-valued samples so ties are exercised.
        let b: Vec<f64> = (0..50)
            .map(|_| {
                let x: f64 = rng.random_range(-2.0..4.0);
                if trial % 2 == 0 {
                    x.round()
                } else {
                    x
                }
            })
            .collect();
        let cost: Vec<Vec<f64>> = a
            .iter()
            .map(|x| b.iter().map(|y| (x - y).abs()).collect())
            .collect();
        let oracle = assignment_cost(&cost) / 50.0;
        let w = wasserstein_1d(&a, &b).unwrap();
        assert!((w - oracle).abs() <= 1e-9, "{w} vs {oracle}");
    }
}

#[test]
fn wasserstein_with_unequal_sizes_matches_replicated_lp() {
    // Replicating each sample of a by |b| and each of b by |a| gives equal,
    // uniform weights without changing either distribution.
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let a: Vec<f64> = (0..rng.random_range(1..7))
            .map(|_| rng.random_range(0.0..5.0))
            .collect();
        let b: Vec<f64> = (0..rng.random_range(1..7))
            .map(|_| rng.random_range(0.0..5.0))
            .collect();
        let ra: Vec<f64> = a
            .iter()
            .flat_map(|&x| std::iter::repeat_n(x, b.len()))
            .collect();
        let rb: Vec<f64> = b
            .iter()
            .flat_map(|&x| std::iter::repeat_n(x, a.len()))
            .collect();
        let cost: Vec<Vec<f64>> = ra
            .iter()
            .map(|x| rb.iter().map(|y| (x - y).abs()).collect())
            .collect();
        let oracle = assignment_cost(&cost) / ra.len() as f64;
        assert!((wasserstein_1d(&a, &b).unwrap() - oracle).abs() <= 1e-9);
    }
}

#[test]
fn node_num_diff_is_mean_absolute_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let len = rng.random_range(1..10);
        let a: Vec<Hypergraph> = (0..len)
            .map(|_| random_hypergraph(&mut rng, 12, 3))
            .collect();
        let b: Vec<Hypergraph> = (0..len)
            .map(|_| random_hypergraph(&mut rng, 12, 3))
            .collect();
        let brute: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x.num_nodes() as f64 - y.num_nodes() as f64).abs())
            .sum::<f64>()
            / len as f64;
        assert!((node_num_diff(&a, &b).unwrap() - brute).abs() < 1e-12);
    }
}

/// Normalized-Laplacian spectrum from dense products, isolated nodes excluded.
fn spectrum(h: &Hypergraph) -> Vec<f64> {
    let h = h.without_isolated_nodes();
    let (n, m) = (h.num_nodes(), h.num_edges());
    let mut inc = DMatrix::zeros(n, m);
    for (j, e) in h.edges().iter().enumerate() {
        for &v in e {
            inc[(v, j)] = 1.0;
        }
    }
    let dv = DMatrix::from_diagonal(&inc.column_sum().map(|d: f64| d.powf(-0.5)));
    let de = DMatrix::from_diagonal(&inc.row_sum().transpose().map(|d| 1.0 / d));
    let l = DMatrix::identity(n, n) - &dv * &inc * de * inc.transpose() * dv;
    l.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Earth mover's distance between two histograms on bins `0..k` through
/// their quantile functions: `∫ |F⁻¹(t) − G⁻¹(t)| dt`.
fn emd_by_quantiles(a: &[f64], b: &[f64]) -> f64 {
    let cum = |h: &[f64]| -> Vec<f64> {
        h.iter()
            .scan(0.0, |s, x| {
                *s += x;
                Some(*s)
            })
            .collect()
    };
    let (ca, cb) = (cum(a), cum(b));
    let mut cuts: Vec<f64> = ca
        .iter()
        .chain(&cb)
        .copied()
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    let quantile =
        |c: &[f64], t: f64| c.iter().position(|&x| x > t + 1e-15).unwrap_or(c.len() - 1) as f64;
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * (quantile(&ca, mid) - quantile(&cb, mid)).abs()
        })
        .sum()
}

fn histogram(h: &Hypergraph, bins: usize) -> Vec<f64> {
    let ev = spectrum(h);
    let mut out = vec![0.0; bins];
    for x in &ev {
        // Points within 1e-9 under an edge belong to the upper bin.
        let idx = ((x.clamp(0.0, 1.0) * bins as f64 + 1e-9).floor() as usize).min(bins - 1);
        out[idx] += 1.0 / ev.len() as f64;
    }
    out
}

fn mmd_oracle(x: &[Hypergraph], y: &[Hypergraph], bins: usize, sigma: f64) -> f64 {
    let hx: Vec<_> = x.iter().map(|h| histogram(h, bins)).collect();
    let hy: Vec<_> = y.iter().map(|h| histogram(h, bins)).collect();
    let k = |p: &[f64], q: &[f64]| (-emd_by_quantiles(p, q).powi(2) / (2.0 * sigma * sigma)).exp();
    let mean = |s: &[Vec<f64>], t: &[Vec<f64>]| {
        let mut acc = 0.0;
        for p in s {
            for q in t {
                acc += k(p, q);
            }
        }
        acc / (s.len() * t.len()) as f64
    };
    (mean(&hx, &hx) + mean(&hy, &hy) - 2.0 * mean(&hx, &hy)).max(0.0)
}

fn connected_set(rng: &mut impl Rng, count: usize, max_nodes: usize) -> Vec<Hypergraph> {
    (0..count)
        .map(|_| common::random_connected(rng, max_nodes, max_nodes))
        .collect()
}

#[test]
fn spectral_mmd_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for bins in [10, 100] {
        for _ in 0..5 {
            let x = connected_set(&mut rng, 6, 8);
            let y = connected_set(&mut rng, 4, 10);
            let params = SpectralParams { bins, sigma: 1.0 };
            let got = spectral_mmd(&x, &y, &params).unwrap();
            let want = mmd_oracle(&x, &y, bins, 1.0);
            assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        }
    }
}

#[test]
fn distances_vanish_on_identical_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let d = connected_set(&mut rng, 12, 9);
    let report = evaluate(
        &d,
        &d,
        Some(&d),
        Some(Validator::Tree),
        &EvalConfig::default(),
    )
    .unwrap();
    for (name, value) in report.entries() {
        if matches!(name, "Uniqueness" | "Novelty" | "ValidTree") {
            continue;
        }
        assert!(value.unwrap().abs() <= 1e-9, "{name} = {value:?}");
    }
    assert_eq!(report.novelty, Some(0.0));
}

/// All-pairs shortest paths on the line graph built independently from
/// hyperedge intersections, with path counts.
fn line_graph_paths(h: &Hypergraph) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let m = h.num_edges();
    let adj: Vec<Vec<bool>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| a != b && h.edges()[a].iter().any(|v| h.edges()[b].contains(v)))
                .collect()
        })
        .collect();
    let mut dist = vec![vec![usize::MAX; m]; m];
    let mut count = vec![vec![0.0; m]; m];
    for s in 0..m {
        dist[s][s] = 0;
        count[s][s] = 1.0;
        let mut frontier = vec![s];
        let mut d = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for t in 0..m {
                if dist[s][t] != usize::MAX {
                    continue;
                }
                let c: f64 = frontier
                    .iter()
                    .filter(|&&u| adj[u][t])
                    .map(|&u| count[s][u])
                    .sum();
                if c > 0.0 {
                    dist[s][t] = d + 1;
                    count[s][t] = c;
                    next.push(t);
                }
            }
            frontier = next;
            d += 1;
        }
    }
    (dist, count)
}

#[test]
fn centralities_match_all_pairs_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..50 {
        let h = random_hypergraph(&mut rng, 10, 9);
        let m = h.num_edges();
        let (dist, count) = line_graph_paths(&h);
        let got = centralities(&h);
        for v in 0..m {
            let reach: Vec<usize> = (0..m)
                .filter(|&t| t != v && dist[v][t] != usize::MAX)
                .collect();
            let total: usize = reach.iter().map(|&t| dist[v][t]).sum();
            let closeness = if total == 0 {
                0.0
            } else {
                reach.len() as f64 / total as f64
            };
            let harmonic: f64 = reach.iter().map(|&t| 1.0 / dist[v][t] as f64).sum();
            assert_eq!(got.closeness[v], closeness);
            assert_eq!(got.harmonic[v], harmonic);
            let mut pair_sum = 0.0;
            for s in 0..m {
                for t in s + 1..m {
                    if s == v || t == v || dist[s][t] == usize::MAX {
                        continue;
                    }
                    if dist[s][v] != usize::MAX
                        && dist[v][t] != usize::MAX
                        && dist[s][v] + dist[v][t] == dist[s][t]
                    {
                        pair_sum += count[s][v] * count[v][t] / count[s][t];
                    }
                }
            }
            let betweenness = if m <= 2 {
                0.0
            } else {
                2.0 * pair_sum / ((m - 1) * (m - 2)) as f64
            };
            assert!((got.betweenness[v] - betweenness).abs() <= 1e-12);
        }
    }
}

/// Lexicographically smallest sorted edge list over all node permutations.
fn brute_canonical(n: usize, edges: &[Vec<usize>]) -> (usize, Vec<Vec<usize>>) {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
    let best = perms(n)
        .into_iter()
        .map(|p| {
            let mut es: Vec<Vec<usize>> = edges
                .iter()
                .map(|e| {
                    let mut x: Vec<usize> = e.iter().map(|&v| p[v]).collect();
                    x.sort_unstable();
                    x
                })
                .collect();
            es.sort();
            es
        })
        .min()
        .unwrap();
    (n, best)
}

#[test]
fn hash_separates_all_small_hypergraphs() {
    let mut classes: HashMap<(usize, Vec<Vec<usize>>), u64> = HashMap::new();
    for n in 1..=4usize {
        let subsets: Vec<Vec<usize>> = (1..1usize << n)
            .map(|mask| (0..n).filter(|v| mask >> v & 1 == 1).collect())
            .collect();
        let k = subsets.len();
        let mut choices: Vec<Vec<usize>> = vec![vec![]];
        for a in 0..k {
            choices.push(vec![a]);
            for b in a + 1..k {
                choices.push(vec![a, b]);
                for c in b + 1..k {
                    choices.push(vec![a, b, c]);
                }
            }
        }
        for choice in choices {
            let edges: Vec<Vec<usize>> = choice.iter().map(|&i| subsets[i].clone()).collect();
            let h = Hypergraph::new(n, edges.clone()).unwrap();
            let key = brute_canonical(n, &edges);
            let hash = hypergraph_hash(&h);
            if let Some(&prev) = classes.get(&key) {
                assert_eq!(prev, hash, "isomorphic graphs hashed apart: {key:?}");
            } else {
                classes.insert(key, hash);
            }
        }
    }
    let mut by_hash: HashMap<u64, usize> = HashMap::new();
    for &h in classes.values() {
        *by_hash.entry(h).or_default() += 1;
    }
    let collisions = by_hash.values().filter(|&&c| c > 1).count();
    assert_eq!(collisions, 0, "{} classes", classes.len());
}

#[test]
fn sbm_checker_closed_loop() {
    let check = SbmCheck::default();
    let passed = (0..200)
        .filter(|&s| {
            valid_sbm(
                &gen_sbm(32, 0.05, 0.0, &mut ChaCha8Rng::seed_from_u64(s)).unwrap(),
                &check,
            )
        })
        .count();
    assert!(passed >= 190, "{passed}/200");
}

#[test]
fn sbm_checker_rejects_uniform_triples() {
    // 3-uniform random hypergraphs with the same mean density as the block model.
    let check = SbmCheck::default();
    let p = (0.05 * 1120.0 + 0.001 * 3840.0) / 4960.0;
    let accepted = (0..1000)
        .filter(|&s| {
            valid_sbm(
                &gen_er(32, 0.0, p, 0.0, &mut ChaCha8Rng::seed_from_u64(s)).unwrap(),
                &check,
            )
        })
        .count();
    assert!(accepted < 50, "{accepted}/1000 accepted");
}

#[test]
fn triangle_of_pairs_is_not_a_tree() {
    let h = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
    assert!(!valid_tree(&h));
}

proptest! {
    #[test]
    fn hash_ignores_node_and_edge_order(
        (h, perm, seed) in arb_hypergraph(8, 6).prop_flat_map(|h| {
            let n = h.num_nodes();
            (Just(h), arb_permutation(n), any::<u64>())
        })
    ) {
        let g = h.relabel(&perm).unwrap();
        let mut edges = g.edges().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..edges.len()).rev() {
            edges.swap(i, rng.random_range(0..=i));
        }
        let g = Hypergraph::new(g.num_nodes(), edges).unwrap();
        prop_assert_eq!(hypergraph_hash(&h), hypergraph_hash(&g));
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let (ch, cg) = (centralities(&h), centralities(&g));
        for (a, b) in [(ch.harmonic, cg.harmonic), (ch.betweenness, cg.betweenness)] {
            for (x, y) in sorted(a).iter().zip(sorted(b)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wasserstein_is_a_symmetric_shift_metric(
        a in prop::collection::vec(-10.0f64..10.0, 1..30),
        b in prop::collection::vec(-10.0f64..10.0, 1..30),
        shift in -5.0f64..5.0,
    ) {
        let ab = wasserstein_1d(&a, &b).unwrap();
        prop_assert!((ab - wasserstein_1d(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(wasserstein_1d(&a, &a).unwrap().abs() < 1e-12);
        let moved: Vec<f64> = a.iter().map(|x| x + shift).collect();
        prop_assert!((wasserstein_1d(&a, &moved).unwrap() - shift.abs()).abs() < 1e-9);
    }
}

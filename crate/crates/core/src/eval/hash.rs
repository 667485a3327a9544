use std::collections::HashSet;

use crate::hypergraph::Hypergraph;

/// Refinement rounds on the star expansion.
pub const WL_ROUNDS: usize = 3;

const LEFT_SEED: u64 = 0x6c65_6674;
const RIGHT_SEED: u64 = 0x7269_6768;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(acc: u64, x: u64) -> u64 {
    splitmix64(acc ^ splitmix64(x))
}

fn mix_multiset(seed: u64, mut colors: Vec<u64>) -> u64 {
    colors.sort_unstable();
    colors
        .iter()
        .fold(mix(seed, colors.len() as u64), |acc, &c| mix(acc, c))
}

/// Isomorphism-invariant 64-bit hash from colour refinement on the star
/// expansion, with nodes and hyperedges starting from different colours.
/// Isomorphic hypergraphs always collide; non-isomorphic ones rarely do.
pub fn hypergraph_hash(h: &Hypergraph) -> u64 {
    let n = h.num_nodes();
    let mut node_edges = vec![Vec::new(); n];
    for (j, e) in h.edges().iter().enumerate() {
        for &v in e {
            node_edges[v].push(j);
        }
    }
    let mut left = vec![splitmix64(LEFT_SEED); n];
    let mut right = vec![splitmix64(RIGHT_SEED); h.num_edges()];
    for _ in 0..WL_ROUNDS {
        let new_left: Vec<u64> = (0..n)
            .map(|v| mix_multiset(left[v], node_edges[v].iter().map(|&j| right[j]).collect()))
            .collect();
        let new_right: Vec<u64> = h
            .edges()
            .iter()
            .enumerate()
            .map(|(j, e)| mix_multiset(right[j], e.iter().map(|&v| left[v]).collect()))
            .collect();
        left = new_left;
        right = new_right;
    }
    let l = mix_multiset(LEFT_SEED, left);
    let r = mix_multiset(RIGHT_SEED, right);
    mix(mix(l, r), (n as u64) << 32 | h.num_edges() as u64)
}

/// Fraction of pairwise non-isomorphic graphs in `gen`, by hash.
pub fn uniqueness(gen: &[Hypergraph]) -> f64 {
    if gen.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<u64> = gen.iter().map(hypergraph_hash).collect();
    distinct.len() as f64 / gen.len() as f64
}

/// Fraction of `gen` whose hash does not occur in `train`.
pub fn novelty(gen: &[Hypergraph], train: &[Hypergraph]) -> f64 {
    if gen.is_empty() {
        return 0.0;
    }
    let seen: HashSet<u64> = train.iter().map(hypergraph_hash).collect();
    let novel = gen
        .iter()
        .filter(|h| !seen.contains(&hypergraph_hash(h)))
        .count();
    novel as f64 / gen.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabelling_preserves_hash() {
        let h =
            Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4], vec![0, 4]]).unwrap();
        let p = h.relabel(&[3, 0, 4, 1, 2]).unwrap();
        assert_eq!(hypergraph_hash(&h), hypergraph_hash(&p));
        let mut shuffled = h.edges().to_vec();
        shuffled.reverse();
        assert_eq!(
            hypergraph_hash(&h),
            hypergraph_hash(&Hypergraph::new(5, shuffled).unwrap())
        );
    }

    #[test]
    fn identical_sets() {
        let h = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        let gen = vec![h.clone(); 4];
        assert_eq!(uniqueness(&gen), 0.25);
        assert_eq!(novelty(&gen, &[h]), 0.0);
        let other = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        assert_eq!(novelty(&gen, &[other]), 1.0);
    }

    #[test]
    fn node_count_separates() {
        assert_ne!(
            hypergraph_hash(&Hypergraph::empty(3)),
            hypergraph_hash(&Hypergraph::empty(4))
        );
    }
}

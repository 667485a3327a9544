//! Synthetic hypergraph families and dataset assembly.

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::io::write_jsonl;

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: p,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Includes every 2-, 3- and 4-subset of `n` nodes independently with
/// probability `p2`, `p3` and `p4`.
pub fn gen_er(n: usize, p2: f64, p3: f64, p4: f64, rng: &mut impl Rng) -> Result<Hypergraph> {
    for p in [p2, p3, p4] {
        check_prob(p)?;
    }
    let mut edges = Vec::new();
    for (k, p) in [(2, p2), (3, p3), (4, p4)] {
        if p == 0.0 {
            continue;
        }
        for_each_subset(n, k, |s| {
            if rng.random::<f64>() < p {
                edges.push(s.to_vec());
            }
        });
    }
    Hypergraph::new(n, edges)
}

/// Two blocks `0..n/2` and `n/2..n`; every 3-subset inside one block is a
/// hyperedge with probability `p_intra`, every mixed one with `p_inter`.
pub fn gen_sbm(n: usize, p_intra: f64, p_inter: f64, rng: &mut impl Rng) -> Result<Hypergraph> {
    check_prob(p_intra)?;
    check_prob(p_inter)?;
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "block model needs an even node count, got {n}"
        )));
    }
    let half = n / 2;
    let mut edges = Vec::new();
    for_each_subset(n, 3, |s| {
        let same = (s[0] < half) == (s[2] < half);
        let p = if same { p_intra } else { p_inter };
        if rng.random::<f64>() < p {
            edges.push(s.to_vec());
        }
    });
    Hypergraph::new(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgoParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub num_edges: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub max_retries: usize,
}

impl Default for EgoParams {
    fn default() -> Self {
        Self {
            min_nodes: 150,
            max_nodes: 200,
            num_edges: 3000,
            min_size: 2,
            max_size: 5,
            max_retries: 100,
        }
    }
}

/// Draws a random base hypergraph and keeps the hyperedges around one random
/// node. Base hyperedges are distinct node sets of uniformly random size.
pub fn gen_ego(params: &EgoParams, rng: &mut impl Rng) -> Result<Hypergraph> {
    let p = params;
    if p.min_nodes == 0
        || p.min_nodes > p.max_nodes
        || p.min_size == 0
        || p.min_size > p.max_size
        || p.max_size > p.min_nodes
    {
        return Err(Error::InvalidParameter(format!(
            "invalid ego parameters {p:?}"
        )));
    }
    for _ in 0..p.max_retries.max(1) {
        let n = rng.random_range(p.min_nodes..=p.max_nodes);
        let mut edges: Vec<Vec<usize>> = (0..p.num_edges)
            .map(|_| {
                let size = rng.random_range(p.min_size..=p.max_size);
                let mut e = index::sample(rng, n, size).into_vec();
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort();
        edges.dedup();
        let ego = rng.random_range(0..n);
        let kept: Vec<Vec<usize>> = edges
            .into_iter()
            .filter(|e| e.binary_search(&ego).is_ok())
            .collect();
        if !kept.is_empty() {
            return Ok(Hypergraph::new(n, kept)?.without_isolated_nodes());
        }
    }
    Err(Error::RetriesExhausted(p.max_retries))
}

/// A uniformly random labelled tree on `n` nodes from a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &seq {
        degree[v] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &seq {
        let leaf = leaves
            .pop_first()
            .expect("a Prüfer sequence always leaves a leaf");
        edges.push((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.insert(v);
        }
    }
    let a = leaves.pop_first().expect("two leaves remain");
    let b = leaves.pop_first().expect("two leaves remain");
    edges.push((a, b));
    edges
}

fn union_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() || j < b.len() {
        n += 1;
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
    }
    n
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// A random tree whose edges are merged into hyperedges: repeatedly, a
/// uniformly random pair of hyperedges that share a node and whose union has
/// at most `max_size` nodes is replaced by the union. Stops when no pair
/// qualifies or after `merge_budget` merges.
pub fn gen_tree(
    n: usize,
    max_size: usize,
    merge_budget: Option<usize>,
    rng: &mut impl Rng,
) -> Result<Hypergraph> {
    if n < 2 || max_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "tree needs n >= 2 and max_size >= 2, got n={n}, max_size={max_size}"
        )));
    }
    let mut edges: Vec<Vec<usize>> = random_tree(n, rng)
        .into_iter()
        .map(|(a, b)| vec![a, b])
        .collect();
    let mut merges = 0;
    while merge_budget.is_none_or(|b| merges < b) {
        let mut candidates = Vec::new();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if intersects(&edges[i], &edges[j]) && union_size(&edges[i], &edges[j]) <= max_size
                {
                    candidates.push((i, j));
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let (i, j) = candidates[rng.random_range(0..candidates.len())];
        let other = edges.swap_remove(j);
        edges[i].extend(other);
        edges[i].sort_unstable();
        edges[i].dedup();
        merges += 1;
    }
    Hypergraph::new(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Er,
    Sbm,
    Ego,
    Tree,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Er => "er",
            Self::Sbm => "sbm",
            Self::Ego => "ego",
            Self::Tree => "tree",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" => Ok(Self::Er),
            "sbm" => Ok(Self::Sbm),
            "ego" => Ok(Self::Ego),
            "tree" => Ok(Self::Tree),
            other => Err(Error::InvalidParameter(format!(
                "unknown dataset kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErParams {
    pub n: usize,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl Default for ErParams {
    fn default() -> Self {
        Self {
            n: 32,
            p2: 0.1,
            p3: 0.005,
            p4: 0.0005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmParams {
    pub n: usize,
    pub p_intra: f64,
    pub p_inter: f64,
}

impl Default for SbmParams {
    fn default() -> Self {
        Self {
            n: 32,
            p_intra: 0.05,
            p_inter: 0.001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub n: usize,
    pub max_size: usize,
    /// Merge limit; `None` merges until no qualifying pair is left.
    pub merge_budget: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            n: 32,
            max_size: 5,
            merge_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub seed: u64,
    /// Draws allowed per emitted graph before giving up.
    pub max_retries: usize,
    pub er: ErParams,
    pub sbm: SbmParams,
    pub ego: EgoParams,
    pub tree: TreeParams,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Tree,
            train: 128,
            val: 32,
            test: 40,
            seed: 0,
            max_retries: 1000,
            er: ErParams::default(),
            sbm: SbmParams::default(),
            ego: EgoParams::default(),
            tree: TreeParams::default(),
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train == 0 || self.val == 0 || self.test == 0 {
            return Err(Error::InvalidParameter(
                "split sizes must be positive".into(),
            ));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidParameter(
                "max_retries must be positive".into(),
            ));
        }
        match self.kind {
            DatasetKind::Er => {
                for p in [self.er.p2, self.er.p3, self.er.p4] {
                    check_prob(p)?;
                }
                Ok(())
            }
            DatasetKind::Sbm => {
                check_prob(self.sbm.p_intra)?;
                check_prob(self.sbm.p_inter)?;
                if !self.sbm.n.is_multiple_of(2) {
                    return Err(Error::InvalidParameter(format!(
                        "block model needs an even node count, got {}",
                        self.sbm.n
                    )));
                }
                Ok(())
            }
            DatasetKind::Ego => {
                // Zero base edges exercise only the parameter checks.
                let e = EgoParams {
                    num_edges: 0,
                    max_retries: 1,
                    ..self.ego
                };
                match gen_ego(&e, &mut ChaCha8Rng::seed_from_u64(0)) {
                    Err(Error::RetriesExhausted(_)) | Ok(_) => Ok(()),
                    Err(err) => Err(err),
                }
            }
            DatasetKind::Tree => {
                if self.tree.n < 2 || self.tree.max_size < 2 {
                    return Err(Error::InvalidParameter(
                        "tree needs n >= 2 and max_size >= 2".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// One raw draw of the configured family.
    pub fn generate_one(&self, rng: &mut impl Rng) -> Result<Hypergraph> {
        match self.kind {
            DatasetKind::Er => gen_er(self.er.n, self.er.p2, self.er.p3, self.er.p4, rng),
            DatasetKind::Sbm => gen_sbm(self.sbm.n, self.sbm.p_intra, self.sbm.p_inter, rng),
            DatasetKind::Ego => gen_ego(&self.ego, rng),
            DatasetKind::Tree => {
                gen_tree(self.tree.n, self.tree.max_size, self.tree.merge_budget, rng)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<Hypergraph>,
    pub val: Vec<Hypergraph>,
    pub test: Vec<Hypergraph>,
    /// Draws discarded because they were disconnected after dropping isolated nodes.
    pub rejected: usize,
}

impl Dataset {
    pub fn splits(&self) -> [(&'static str, &[Hypergraph]); 3] {
        [
            ("train", &self.train),
            ("val", &self.val),
            ("test", &self.test),
        ]
    }
}

/// Draws all three splits from one random stream. Isolated nodes are dropped
/// and disconnected draws are replaced by fresh ones.
pub fn make_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rejected = 0;
    let mut draw = |count: usize, rng: &mut ChaCha8Rng| -> Result<Vec<Hypergraph>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut accepted = false;
            for _ in 0..spec.max_retries {
                let h = spec.generate_one(rng)?.without_isolated_nodes();
                if h.num_edges() > 0 && h.is_connected() {
                    out.push(h.canonical());
                    accepted = true;
                    break;
                }
                rejected += 1;
            }
            if !accepted {
                return Err(Error::RetriesExhausted(spec.max_retries));
            }
        }
        Ok(out)
    };
    let train = draw(spec.train, &mut rng)?;
    let val = draw(spec.val, &mut rng)?;
    let test = draw(spec.test, &mut rng)?;
    Ok(Dataset {
        train,
        val,
        test,
        rejected,
    })
}

/// Writes `<kind>_{train,val,test}.jsonl` into `dir` and returns the paths.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    kind: DatasetKind,
    data: &Dataset,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (split, graphs) in data.splits() {
        let path = dir.join(format!("{}_{split}.jsonl", kind.name()));
        write_jsonl(&path, graphs)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Mean and population standard deviation of node counts.
pub fn node_count_summary(graphs: &[Hypergraph]) -> (f64, f64) {
    if graphs.is_empty() {
        return (0.0, 0.0);
    }
    let n = graphs.len() as f64;
    let mean = graphs.iter().map(|h| h.num_nodes() as f64).sum::<f64>() / n;
    let var = graphs
        .iter()
        .map(|h| (h.num_nodes() as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_lexicographic() {
        let mut all = Vec::new();
        for_each_subset(4, 2, |s| all.push(s.to_vec()));
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_subset(32, 4, |_| count += 1);
        assert_eq!(count, 35960);
    }

    #[test]
    fn er_zero_probabilities_give_no_edges() {
        let h = gen_er(10, 0.0, 0.0, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(h.num_edges(), 0);
    }

    #[test]
    fn sbm_rejects_odd_n() {
        assert!(gen_sbm(31, 0.05, 0.001, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn sbm_without_inter_edges_splits() {
        let h = gen_sbm(32, 0.05, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(h.edges().iter().all(|e| (e[0] < 16) == (e[2] < 16)));
    }

    #[test]
    fn tree_of_two_nodes() {
        let h = gen_tree(2, 5, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1]]);
    }

    #[test]
    fn tree_edges_are_covered_once() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(32, &mut rng.clone());
            let h = gen_tree(32, 5, None, &mut rng).unwrap();
            assert_eq!(h.num_nodes(), 32);
            assert!(h.max_edge_size() <= 5);
            for (a, b) in tree {
                let covering = h
                    .edges()
                    .iter()
                    .filter(|e| e.contains(&a) && e.contains(&b))
                    .count();
                assert_eq!(covering, 1);
            }
        }
    }

    #[test]
    fn prufer_tree_is_spanning() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let edges = random_tree(20, &mut rng);
        assert_eq!(edges.len(), 19);
        let h = Hypergraph::new(20, edges.iter().map(|&(a, b)| vec![a, b]).collect()).unwrap();
        assert!(h.is_connected());
    }

    #[test]
    fn ego_contains_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = gen_ego(&EgoParams::default(), &mut rng).unwrap();
        let n = h.num_nodes();
        assert!((0..n).any(|v| h.edges().iter().all(|e| e.contains(&v))));
        assert!(h.max_edge_size() <= 5 && h.edges().iter().all(|e| e.len() >= 2));
    }

    #[test]
    fn dataset_is_deterministic_and_connected() {
        let spec = DatasetSpec {
            kind: DatasetKind::Er,
            train: 6,
            val: 2,
            test: 2,
            seed: 9,
            ..Default::default()
        };
        let a = make_dataset(&spec).unwrap();
        let b = make_dataset(&spec).unwrap();
        assert_eq!(a, b);
        for (_, split) in a.splits() {
            assert!(split
                .iter()
                .all(|h| h.is_connected() && !h.has_isolated_nodes()));
        }
    }
}

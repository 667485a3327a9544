//! Eigenpairs, the hypergraph-to-bipartite spectral map, and spectral node
//! embeddings used to condition the denoiser.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expand::ExpansionVectors;
use crate::hypergraph::BipartiteGraph;
use crate::laplacian::{
    bipartite_normalized_laplacian, bipartite_normalized_laplacian_lenient, DenseSymMatrix,
};

/// Eigenvalues at or below this are treated as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Default number of spectral features.
pub const DEFAULT_SPECTRAL_FEATURES: usize = 8;

/// Ascending eigenvalues with unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFeatures {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenFeatures {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Full eigendecomposition, eigenvalues ascending.
pub fn symmetric_eigen(m: &DenseSymMatrix) -> EigenFeatures {
    let n = m.dim();
    if n == 0 {
        return EigenFeatures {
            eigenvalues: Vec::new(),
            eigenvectors: Vec::new(),
        };
    }
    let eig = SymmetricEigen::new(m.as_matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    EigenFeatures {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect(),
    }
}

/// Flips `u` so that its largest-magnitude entry is positive. Entries within
/// 1e-12 of the maximum count as ties and the lowest index wins.
pub fn canonicalize_sign(u: &mut [f64]) {
    let max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    if let Some(&pivot) = u.iter().find(|x| x.abs() >= max - 1e-12) {
        if pivot < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// The `k` smallest eigenpairs with eigenvalue above [`ZERO_EIGENVALUE_TOL`],
/// never more than `dim - 1`. Eigenvector signs are canonicalized.
pub fn k_smallest_nonzero(l: &DenseSymMatrix, k: usize) -> EigenFeatures {
    let limit = k.min(l.dim().saturating_sub(1));
    let full = symmetric_eigen(l);
    let mut out = EigenFeatures {
        eigenvalues: Vec::with_capacity(limit),
        eigenvectors: Vec::with_capacity(limit),
    };
    for (lambda, mut u) in full.eigenvalues.into_iter().zip(full.eigenvectors) {
        if out.len() == limit {
            break;
        }
        if lambda > ZERO_EIGENVALUE_TOL {
            canonicalize_sign(&mut u);
            out.eigenvalues.push(lambda);
            out.eigenvectors.push(u);
        }
    }
    out
}

/// Maps an eigenvalue of the normalized hypergraph Laplacian to the pair of
/// eigenvalues `1 ± sqrt(1 - λ)` it induces on the star expansion.
pub fn spectral_map(lambda_h: f64) -> Result<(f64, f64)> {
    const TOL: f64 = 1e-9;
    if !(-TOL..=1.0 + TOL).contains(&lambda_h) {
        return Err(Error::OutOfDomain {
            value: lambda_h,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let s = (1.0 - lambda_h.clamp(0.0, 1.0)).sqrt();
    Ok((1.0 - s, 1.0 + s))
}

/// Fixed-width vectors for every left and right node of an expanded graph,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEmbeddings {
    width: usize,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl NodeEmbeddings {
    pub fn zeros(width: usize, n_left: usize, n_right: usize) -> Self {
        Self {
            width,
            left: vec![0.0; width * n_left],
            right: vec![0.0; width * n_right],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_left(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.left.len() / self.width
        }
    }

    pub fn n_right(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.right.len() / self.width
        }
    }

    pub fn left(&self, i: usize) -> &[f64] {
        &self.left[i * self.width..(i + 1) * self.width]
    }

    pub fn right(&self, j: usize) -> &[f64] {
        &self.right[j * self.width..(j + 1) * self.width]
    }
}

/// Spectral embeddings of `b`, replicated onto the copies produced by
/// expanding `b` with `ev`.
///
/// With `k == 0` the embeddings are i.i.d. standard normal draws of width 1
/// per node of `b`. Otherwise node `i` gets `u_m[i] / sqrt(λ_m + 1)` for the
/// `k` smallest non-zero eigenpairs of the normalized Laplacian, zero-padded
/// when the graph has fewer of them.
pub fn node_embeddings(
    b: &BipartiteGraph,
    ev: &ExpansionVectors,
    k: usize,
    rng: &mut impl Rng,
) -> Result<NodeEmbeddings> {
    let lap = bipartite_normalized_laplacian(b)?;
    embeddings_from_laplacian(b, &lap, ev, k, rng)
}

/// [`node_embeddings`] for intermediate sampled graphs, which may contain
/// isolated nodes; those get all-zero spectral coordinates.
pub fn node_embeddings_lenient(
    b: &BipartiteGraph,
    ev: &ExpansionVectors,
    k: usize,
    rng: &mut impl Rng,
) -> Result<NodeEmbeddings> {
    let lap = bipartite_normalized_laplacian_lenient(b);
    embeddings_from_laplacian(b, &lap, ev, k, rng)
}

fn embeddings_from_laplacian(
    b: &BipartiteGraph,
    lap: &DenseSymMatrix,
    ev: &ExpansionVectors,
    k: usize,
    rng: &mut impl Rng,
) -> Result<NodeEmbeddings> {
    ev.check_against(b)?;
    let nl = b.n_left();
    let n = b.num_nodes();

    let (width, base) = if k == 0 {
        let base: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (1, base)
    } else {
        let feats = k_smallest_nonzero(lap, k);
        let mut base = vec![0.0; n * k];
        for (m, (lambda, u)) in feats
            .eigenvalues
            .iter()
            .zip(&feats.eigenvectors)
            .enumerate()
        {
            let scale = 1.0 / (lambda + 1.0).sqrt();
            for (node, x) in u.iter().enumerate() {
                base[node * k + m] = x * scale;
            }
        }
        (k, base)
    };

    let mut left = Vec::with_capacity(width * ev.total_left());
    for (p, &copies) in ev.left.iter().enumerate() {
        for _ in 0..copies {
            left.extend_from_slice(&base[p * width..(p + 1) * width]);
        }
    }
    let mut right = Vec::with_capacity(width * ev.total_right());
    for (q, &copies) in ev.right.iter().enumerate() {
        let row = nl + q;
        for _ in 0..copies {
            right.extend_from_slice(&base[row * width..(row + 1) * width]);
        }
    }
    Ok(NodeEmbeddings { width, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{star_expansion, Hypergraph, WeightedGraph};
    use crate::laplacian::graph_laplacian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_p3_eigenvalues() {
        let mut g = WeightedGraph::new(3);
        g.add_weight(0, 1, 1.0);
        g.add_weight(1, 2, 1.0);
        let f = k_smallest_nonzero(&graph_laplacian(&g), 2);
        assert_eq!(f.len(), 2);
        assert!((f.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((f.eigenvalues[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_zero_and_deficient_spectrum() {
        let mut g = WeightedGraph::new(3);
        g.add_weight(0, 1, 1.0);
        let l = graph_laplacian(&g);
        assert!(k_smallest_nonzero(&l, 0).is_empty());
        // Only one non-zero eigenvalue (2) exists.
        assert_eq!(k_smallest_nonzero(&l, 5).eigenvalues.len(), 1);
    }

    #[test]
    fn eigenpairs_satisfy_rayleigh_and_residual() {
        let h = Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 0]]).unwrap();
        let l = crate::laplacian::zhou_laplacian(&h).unwrap();
        let f = k_smallest_nonzero(&l, 4);
        for (lambda, u) in f.eigenvalues.iter().zip(&f.eigenvectors) {
            let v = nalgebra::DVector::from_column_slice(u);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            let lu = l.as_matrix() * &v;
            assert!((v.dot(&lu) - lambda).abs() < 1e-6);
            assert!((lu - &v * *lambda).norm() < 1e-6);
        }
        assert!(f.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_map_endpoints() {
        assert_eq!(spectral_map(0.0).unwrap(), (0.0, 2.0));
        assert_eq!(spectral_map(1.0).unwrap(), (1.0, 1.0));
        assert!(spectral_map(1.1).is_err());
        assert!(spectral_map(-0.01).is_err());
    }

    #[test]
    fn sign_canonicalization() {
        let mut u = vec![0.1, -0.7, 0.7];
        canonicalize_sign(&mut u);
        assert_eq!(u, vec![-0.1, 0.7, -0.7]);
    }

    #[test]
    fn replication_on_minimal_pair() {
        let b = BipartiteGraph::minimal();
        let ev = ExpansionVectors::new(vec![2], vec![1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let emb = node_embeddings(&b, &ev, 1, &mut rng).unwrap();
        assert_eq!((emb.n_left(), emb.n_right(), emb.width()), (2, 1, 1));
        assert_eq!(emb.left(0), emb.left(1));
    }

    #[test]
    fn zero_k_draws_gaussians() {
        let b = BipartiteGraph::minimal();
        let ev = ExpansionVectors::ones(&b);
        let a = node_embeddings(&b, &ev, 0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let c = node_embeddings(&b, &ev, 0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let d = node_embeddings(&b, &ev, 0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, c);
        assert_ne!(a, d);
        assert!(a.left(0)[0] != 0.0);
    }

    #[test]
    fn embeddings_deterministic_and_padded() {
        let h = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let b = star_expansion(&h);
        let ev = ExpansionVectors::new(vec![1, 2, 1], vec![2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = node_embeddings(&b, &ev, 8, &mut rng).unwrap();
        let c = node_embeddings(&b, &ev, 8, &mut rng).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.width(), 8);
        // Five nodes give at most four non-zero eigenpairs; the rest is padding.
        for i in 0..a.n_left() {
            assert!(a.left(i)[4..].iter().all(|&x| x == 0.0));
        }
        assert_eq!(a.left(1), a.left(2));
        assert_eq!(a.right(0), a.right(1));
    }

    #[test]
    fn isolated_nodes_rejected_in_strict_mode() {
        let b = BipartiteGraph::new(2, 1, vec![(0, 0)]).unwrap();
        let ev = ExpansionVectors::ones(&b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(node_embeddings(&b, &ev, 2, &mut rng).is_err());
        assert!(node_embeddings_lenient(&b, &ev, 2, &mut rng).is_ok());
    }
}

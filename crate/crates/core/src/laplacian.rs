//! Dense Laplacians of hypergraphs, weighted graphs and bipartite graphs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hypergraph::{BipartiteGraph, Hypergraph, Side, WeightedGraph};

/// Symmetry tolerance accepted by [`DenseSymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix(DMatrix<f64>);

impl DenseSymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        (&self.0 - &other.0).amax()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

fn check_hyperedges(h: &Hypergraph) -> Result<()> {
    match h.edges().iter().position(Vec::is_empty) {
        Some(j) => Err(Error::EmptyHyperedge(j)),
        None => Ok(()),
    }
}

/// `D_V - H D_E^{-1} H^T`.
pub fn bolla_laplacian(h: &Hypergraph) -> Result<DenseSymMatrix> {
    check_hyperedges(h)?;
    let n = h.num_nodes();
    let mut m = DMatrix::zeros(n, n);
    for e in h.edges() {
        let w = 1.0 / e.len() as f64;
        for &u in e {
            m[(u, u)] += 1.0;
            for &v in e {
                m[(u, v)] -= w;
            }
        }
    }
    Ok(DenseSymMatrix(m))
}

/// `I - D_V^{-1/2} H D_E^{-1} H^T D_V^{-1/2}`.
pub fn zhou_laplacian(h: &Hypergraph) -> Result<DenseSymMatrix> {
    check_hyperedges(h)?;
    let deg = h.degrees();
    if let Some(v) = deg.iter().position(|&d| d == 0) {
        return Err(Error::IsolatedNode {
            side: Side::Left,
            index: v,
        });
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let n = h.num_nodes();
    let mut m = DMatrix::identity(n, n);
    for e in h.edges() {
        let w = 1.0 / e.len() as f64;
        for &u in e {
            for &v in e {
                m[(u, v)] -= w * inv_sqrt[u] * inv_sqrt[v];
            }
        }
    }
    Ok(DenseSymMatrix(m))
}

/// Unnormalized Laplacian `D - W` of a weighted graph.
pub fn graph_laplacian(g: &WeightedGraph) -> DenseSymMatrix {
    let n = g.num_nodes();
    let mut m = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        m[(u, v)] -= w;
        m[(v, u)] -= w;
        m[(u, u)] += w;
        m[(v, v)] += w;
    }
    DenseSymMatrix(m)
}

/// `I - D^{-1/2} A D^{-1/2}` on the `n_left + n_right` nodes, left first.
pub fn bipartite_normalized_laplacian(b: &BipartiteGraph) -> Result<DenseSymMatrix> {
    if let Some((side, index)) = b.first_isolated() {
        return Err(Error::IsolatedNode { side, index });
    }
    Ok(normalized_laplacian_inner(b))
}

/// Like [`bipartite_normalized_laplacian`] but tolerates isolated nodes, whose
/// rows and columns are left at zero.
pub fn bipartite_normalized_laplacian_lenient(b: &BipartiteGraph) -> DenseSymMatrix {
    normalized_laplacian_inner(b)
}

fn normalized_laplacian_inner(b: &BipartiteGraph) -> DenseSymMatrix {
    let nl = b.n_left();
    let n = b.num_nodes();
    let dl = b.left_degrees();
    let dr = b.right_degrees();
    let mut m = DMatrix::zeros(n, n);
    for (i, &d) in dl.iter().enumerate() {
        if d > 0 {
            m[(i, i)] = 1.0;
        }
    }
    for (j, &d) in dr.iter().enumerate() {
        if d > 0 {
            m[(nl + j, nl + j)] = 1.0;
        }
    }
    for &(l, r) in b.edges() {
        let w = 1.0 / ((dl[l] * dr[r]) as f64).sqrt();
        m[(l, nl + r)] = -w;
        m[(nl + r, l)] = -w;
    }
    DenseSymMatrix(m)
}

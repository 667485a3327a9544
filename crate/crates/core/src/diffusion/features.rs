use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expand::{EdgeSelection, ExpansionVectors};
use crate::hypergraph::BipartiteGraph;

/// Real-valued features on an expanded bipartite graph: one value per left
/// node, per right node and per edge (in sorted edge order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTriple {
    pub vl: Vec<f64>,
    pub vr: Vec<f64>,
    pub e: Vec<f64>,
}

impl FeatureTriple {
    pub fn zeros(n_left: usize, n_right: usize, n_edges: usize) -> Self {
        Self {
            vl: vec![0.0; n_left],
            vr: vec![0.0; n_right],
            e: vec![0.0; n_edges],
        }
    }

    pub fn zeros_for(host: &BipartiteGraph) -> Self {
        Self::zeros(host.n_left(), host.n_right(), host.num_edges())
    }

    /// Clean training targets: integer cluster sizes and 0/1 edge bits.
    pub fn from_labels(ev: &ExpansionVectors, e: &EdgeSelection) -> Self {
        Self {
            vl: ev.left.iter().map(|&c| c as f64).collect(),
            vr: ev.right.iter().map(|&c| c as f64).collect(),
            e: e.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn standard_normal(like: &Self, rng: &mut impl Rng) -> Self {
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
        let vl = draw(like.vl.len());
        let vr = draw(like.vr.len());
        let e = draw(like.e.len());
        Self { vl, vr, e }
    }

    pub fn len(&self) -> usize {
        self.vl.len() + self.vr.len() + self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn groups(&self) -> [&[f64]; 3] {
        [&self.vl, &self.vr, &self.e]
    }

    pub fn check_host(&self, host: &BipartiteGraph) -> Result<()> {
        for (what, expected, got) in [
            ("left features", host.n_left(), self.vl.len()),
            ("right features", host.n_right(), self.vr.len()),
            ("edge features", host.num_edges(), self.e.len()),
        ] {
            if expected != got {
                return Err(Error::LengthMismatch {
                    what,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }

    /// `a * self + b * other`, elementwise.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| a * x + b * y).collect();
        Self {
            vl: mix(&self.vl, &other.vl),
            vr: mix(&self.vr, &other.vr),
            e: mix(&self.e, &other.e),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            vl: self.vl.iter().map(|&x| f(x)).collect(),
            vr: self.vr.iter().map(|&x| f(x)).collect(),
            e: self.e.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.groups()
            .iter()
            .zip(other.groups())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `x0 + sigma * ε` with fresh standard normal `ε`.
pub fn noise_features(x0: &FeatureTriple, sigma: f64, rng: &mut impl Rng) -> FeatureTriple {
    let eps = FeatureTriple::standard_normal(x0, rng);
    x0.combine(1.0, &eps, sigma)
}

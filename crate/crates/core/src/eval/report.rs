use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

use super::centrality::{centralities, Centralities};
use super::distance::{node_num_diff, node_num_diff_unpaired, wasserstein_1d};
use super::hash::{novelty, uniqueness};
use super::mmd::{spectral_mmd, SpectralParams};
use super::validity::{valid_ego, valid_sbm, valid_tree, SbmCheck};

/// Report keys in output order; the validity key depends on the validator.
pub const METRIC_NAMES: [&str; 10] = [
    "NodeNumDiff",
    "NodeDegreeDistrWasserstein",
    "EdgeSizeDistrWasserstein",
    "Spectral",
    "Uniqueness",
    "Novelty",
    "CentralityCloseness",
    "CentralityBetweenness",
    "CentralityHarmonic",
    "Valid",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validator {
    Ego,
    Sbm,
    Tree,
}

impl Validator {
    pub fn metric_name(self) -> &'static str {
        match self {
            Self::Ego => "ValidEgo",
            Self::Sbm => "ValidSBM",
            Self::Tree => "ValidTree",
        }
    }

    pub fn check(self, h: &Hypergraph, sbm: &SbmCheck) -> bool {
        match self {
            Self::Ego => valid_ego(h),
            Self::Sbm => valid_sbm(h, sbm),
            Self::Tree => valid_tree(h),
        }
    }
}

impl FromStr for Validator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ego" => Ok(Self::Ego),
            "sbm" => Ok(Self::Sbm),
            "tree" => Ok(Self::Tree),
            other => Err(Error::InvalidParameter(format!(
                "no validator for {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Pair generated and test graphs by index for the node-count metric.
    pub paired: bool,
    pub spectral: SpectralParams,
    pub sbm: SbmCheck,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            paired: true,
            spectral: SpectralParams::default(),
            sbm: SbmCheck::default(),
        }
    }
}

/// `None` marks a metric that is undefined for the inputs, for example
/// novelty without a training set or a degree distance when one side has no
/// nodes at all.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub node_num_diff: f64,
    pub node_deg_w1: Option<f64>,
    pub edge_size_w1: Option<f64>,
    pub spectral_mmd: f64,
    pub uniqueness: f64,
    pub novelty: Option<f64>,
    pub cent_close_w1: Option<f64>,
    pub cent_betw_w1: Option<f64>,
    pub cent_harm_w1: Option<f64>,
    pub valid: Option<(Validator, f64)>,
}

impl MetricReport {
    /// `(name, value)` rows in output order.
    pub fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        let mut rows = vec![
            ("NodeNumDiff", Some(self.node_num_diff)),
            ("NodeDegreeDistrWasserstein", self.node_deg_w1),
            ("EdgeSizeDistrWasserstein", self.edge_size_w1),
            ("Spectral", Some(self.spectral_mmd)),
            ("Uniqueness", Some(self.uniqueness)),
            ("Novelty", self.novelty),
            ("CentralityCloseness", self.cent_close_w1),
            ("CentralityBetweenness", self.cent_betw_w1),
            ("CentralityHarmonic", self.cent_harm_w1),
        ];
        if let Some((v, frac)) = self.valid {
            rows.push((v.metric_name(), Some(frac)));
        }
        rows
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `metric,value` rows; undefined values are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (name, value) in self.entries() {
            match value {
                Some(x) => writeln!(out, "{name},{x}").unwrap(),
                None => writeln!(out, "{name},").unwrap(),
            }
        }
        out
    }
}

impl Serialize for MetricReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries();
        let mut map = s.serialize_map(Some(entries.len()))?;
        for (k, v) in entries {
            map.serialize_entry(k, &v)?;
        }
        map.end()
    }
}

fn pooled_w1(a: Vec<f64>, b: Vec<f64>) -> Option<f64> {
    wasserstein_1d(&a, &b).ok()
}

fn degrees(set: &[Hypergraph]) -> Vec<f64> {
    set.iter()
        .flat_map(|h| h.degrees())
        .map(|d| d as f64)
        .collect()
}

fn edge_sizes(set: &[Hypergraph]) -> Vec<f64> {
    set.iter()
        .flat_map(|h| h.edge_sizes())
        .map(|d| d as f64)
        .collect()
}

fn all_centralities(set: &[Hypergraph]) -> Vec<Centralities> {
    set.par_iter().map(centralities).collect()
}

fn pick(cs: &[Centralities], f: impl Fn(&Centralities) -> &[f64]) -> Vec<f64> {
    cs.iter().flat_map(|c| f(c).iter().copied()).collect()
}

/// Full metric suite of `gen` against `test`. Degree, size and centrality
/// distributions are pooled over each set. Isolated nodes are ignored by the
/// spectral metric, whose Laplacian is undefined on them.
pub fn evaluate(
    gen: &[Hypergraph],
    test: &[Hypergraph],
    train: Option<&[Hypergraph]>,
    validator: Option<Validator>,
    cfg: &EvalConfig,
) -> Result<MetricReport> {
    if gen.is_empty() || test.is_empty() {
        return Err(Error::InvalidParameter(
            "evaluation needs non-empty generated and test sets".into(),
        ));
    }
    let node_num_diff = if cfg.paired {
        node_num_diff(gen, test)?
    } else {
        node_num_diff_unpaired(gen, test)?
    };
    let clean = |s: &[Hypergraph]| -> Vec<Hypergraph> {
        s.iter().map(Hypergraph::without_isolated_nodes).collect()
    };
    let spectral_mmd = spectral_mmd(&clean(gen), &clean(test), &cfg.spectral)?;
    let (cg, ct) = (all_centralities(gen), all_centralities(test));
    let valid = validator.map(|v| {
        let ok = gen.par_iter().filter(|h| v.check(h, &cfg.sbm)).count();
        (v, ok as f64 / gen.len() as f64)
    });
    Ok(MetricReport {
        node_num_diff,
        node_deg_w1: pooled_w1(degrees(gen), degrees(test)),
        edge_size_w1: pooled_w1(edge_sizes(gen), edge_sizes(test)),
        spectral_mmd,
        uniqueness: uniqueness(gen),
        novelty: train.map(|t| novelty(gen, t)),
        cent_close_w1: pooled_w1(pick(&cg, |c| &c.closeness), pick(&ct, |c| &c.closeness)),
        cent_betw_w1: pooled_w1(pick(&cg, |c| &c.betweenness), pick(&ct, |c| &c.betweenness)),
        cent_harm_w1: pooled_w1(pick(&cg, |c| &c.harmonic), pick(&ct, |c| &c.harmonic)),
        valid,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::laplacian::zhou_laplacian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralParams {
    /// Histogram bins over `[0, 1]`.
    pub bins: usize,
    /// Bandwidth of the Gaussian kernel on EMD, in bin units.
    pub sigma: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self {
            bins: 100,
            sigma: 1.0,
        }
    }
}

impl SpectralParams {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(
                "spectral MMD needs bins > 0 and sigma > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Values within this distance below a bin edge are counted in the upper bin,
/// so that eigenvalues such as 0.5 do not change bins with round-off.
pub const BIN_EDGE_TOL: f64 = 1e-9;

/// Normalized histogram of the normalized-Laplacian spectrum. Eigenvalues
/// are clamped into `[0, 1]` to absorb round-off. A node-less hypergraph gives
/// an all-zero histogram.
pub fn spectral_histogram(h: &Hypergraph, bins: usize) -> Result<Vec<f64>> {
    let mut hist = vec![0.0; bins];
    if h.num_nodes() == 0 {
        return Ok(hist);
    }
    let ev = zhou_laplacian(h)?.eigenvalues();
    for &x in &ev {
        let b = ((x.clamp(0.0, 1.0) * bins as f64 + BIN_EDGE_TOL) as usize).min(bins - 1);
        hist[b] += 1.0;
    }
    let n = ev.len() as f64;
    hist.iter_mut().for_each(|c| *c /= n);
    Ok(hist)
}

/// Earth mover's distance between two histograms on the same bins, with
/// ground distance `|i - j|`.
pub fn emd_1d(a: &[f64], b: &[f64]) -> f64 {
    let mut carry = 0.0;
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        carry += x - y;
        total += carry.abs();
    }
    total
}

fn kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d = emd_1d(a, b);
    (-d * d / (2.0 * sigma * sigma)).exp()
}

fn mean_kernel(xs: &[Vec<f64>], ys: &[Vec<f64>], sigma: f64) -> f64 {
    let mut s = 0.0;
    for x in xs {
        for y in ys {
            s += kernel(x, y, sigma);
        }
    }
    s / (xs.len() * ys.len()) as f64
}

/// Biased squared MMD between the spectral histograms of two sets, clipped at 0.
pub fn spectral_mmd(
    gen: &[Hypergraph],
    test: &[Hypergraph],
    params: &SpectralParams,
) -> Result<f64> {
    params.validate()?;
    if gen.is_empty() || test.is_empty() {
        return Err(Error::InvalidParameter(
            "spectral MMD needs non-empty sets".into(),
        ));
    }
    let hist = |s: &[Hypergraph]| -> Result<Vec<Vec<f64>>> {
        s.iter()
            .map(|h| spectral_histogram(h, params.bins))
            .collect()
    };
    let (x, y) = (hist(gen)?, hist(test)?);
    let s = params.sigma;
    let mmd = mean_kernel(&x, &x, s) + mean_kernel(&y, &y, s) - 2.0 * mean_kernel(&x, &y, s);
    Ok(mmd.max(0.0))
}

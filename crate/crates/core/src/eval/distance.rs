use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Exact 1-Wasserstein distance between two empirical distributions, i.e. the
/// area between their CDFs.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter(
            "wasserstein distance needs non-empty samples".into(),
        ));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (x - prev);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        prev = x;
    }
    Ok(total)
}

/// Mean absolute node-count difference between `gen[i]` and `target[i]`.
pub fn node_num_diff(gen: &[Hypergraph], target: &[Hypergraph]) -> Result<f64> {
    if gen.len() != target.len() {
        return Err(Error::LengthMismatch {
            what: "paired generated set",
            expected: target.len(),
            got: gen.len(),
        });
    }
    if gen.is_empty() {
        return Ok(0.0);
    }
    let sum: usize = gen
        .iter()
        .zip(target)
        .map(|(g, t)| g.num_nodes().abs_diff(t.num_nodes()))
        .sum();
    Ok(sum as f64 / gen.len() as f64)
}

/// Absolute difference of the two sets' mean node counts.
pub fn node_num_diff_unpaired(gen: &[Hypergraph], target: &[Hypergraph]) -> Result<f64> {
    if gen.is_empty() || target.is_empty() {
        return Err(Error::InvalidParameter(
            "node count comparison needs non-empty sets".into(),
        ));
    }
    let mean =
        |s: &[Hypergraph]| s.iter().map(|h| h.num_nodes() as f64).sum::<f64>() / s.len() as f64;
    Ok((mean(gen) - mean(target)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        assert_eq!(wasserstein_1d(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(
            wasserstein_1d(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(),
            0.0
        );
        assert!(wasserstein_1d(&[], &[1.0]).is_err());
    }

    #[test]
    fn unequal_sizes() {
        // {0, 2} vs {1}: half the mass moves 1 either way.
        assert!((wasserstein_1d(&[0.0, 2.0], &[1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((wasserstein_1d(&[0.0, 0.0, 3.0], &[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn node_counts() {
        let g: Vec<_> = (0..3).map(|_| Hypergraph::empty(30)).collect();
        let t: Vec<_> = (0..3).map(|_| Hypergraph::empty(32)).collect();
        assert_eq!(node_num_diff(&g, &t).unwrap(), 2.0);
        assert_eq!(node_num_diff(&t, &t).unwrap(), 0.0);
        assert!(node_num_diff(&g[..2], &t).is_err());
        assert_eq!(node_num_diff_unpaired(&g[..1], &t).unwrap(), 2.0);
    }
}

//! Clustering accuracy and normalized mutual information.

use std::collections::BTreeMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};

/// Contingency table of two labelings. Rows follow the sorted distinct
/// values of `pred`, columns those of `truth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl Contingency {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "label lengths differ: {} vs {}",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::InvalidArgument("empty labeling".into()));
        }
        let rows = index_of(pred);
        let cols = index_of(truth);
        let mut counts = vec![vec![0usize; cols.len()]; rows.len()];
        for (p, t) in pred.iter().zip(truth) {
            counts[rows[p]][cols[t]] += 1;
        }
        Ok(Self {
            counts,
            n: pred.len(),
        })
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut s = vec![0; self.counts[0].len()];
        for row in &self.counts {
            for (acc, c) in s.iter_mut().zip(row) {
                *acc += c;
            }
        }
        s
    }
}

fn index_of(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut map = BTreeMap::new();
    for &l in labels {
        map.entry(l).or_insert(0);
    }
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    map
}

/// Fraction of samples correctly labeled under the best one-to-one matching
/// of predicted to true clusters, found by the Hungarian algorithm.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    let size = c.counts.len().max(c.counts[0].len());
    let mut weights = Matrix::new(size, size, 0i64);
    for (i, row) in c.counts.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            weights[(i, j)] = v as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / c.n as f64)
}

fn entropy(sums: &[usize], n: f64) -> f64 {
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(pred; truth) / max(H(pred), H(truth))`, natural logarithms. Two
/// single-cluster labelings score 1.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    let n = c.n as f64;
    let a = c.row_sums();
    let b = c.col_sums();
    let mut mi = 0.0;
    for (i, row) in c.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    let h = entropy(&a, n).max(entropy(&b, n));
    if h == 0.0 {
        return Ok(1.0);
    }
    Ok((mi / h).clamp(0.0, 1.0))
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acc_examples() {
        assert_eq!(acc(&[1, 2, 3, 1], &[1, 2, 3, 1]).unwrap(), 1.0);
        assert_eq!(acc(&[1, 1, 2, 2], &[2, 2, 1, 1]).unwrap(), 1.0);
        assert_eq!(acc(&[1, 2, 1, 2], &[1, 1, 2, 2]).unwrap(), 0.5);
        // More predicted clusters than true ones.
        assert_eq!(acc(&[1, 2, 3, 3], &[1, 1, 2, 2]).unwrap(), 0.75);
        assert!(acc(&[1], &[1, 2]).is_err());
        assert!(acc(&[], &[]).is_err());
    }

    #[test]
    fn nmi_examples() {
        assert!((nmi(&[1, 1, 2, 2], &[1, 1, 2, 2]).unwrap() - 1.0).abs() < 1e-15);
        assert!((nmi(&[5, 5, 9, 9], &[1, 1, 2, 2]).unwrap() - 1.0).abs() < 1e-15);
        assert!(nmi(&[1, 2, 1, 2], &[1, 1, 2, 2]).unwrap().abs() < 1e-15);
        assert_eq!(nmi(&[3, 3, 3], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[3, 3, 3, 3], &[1, 1, 2, 2]).unwrap(), 0.0);
        assert!(nmi(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn nmi_hand_value() {
        // Contingency [[2, 0], [1, 1]]; H(pred) = ln 2 is the larger entropy.
        let v = nmi(&[1, 1, 2, 2], &[1, 1, 1, 2]).unwrap();
        let ln = f64::ln;
        let mi = 0.5 * ln(4.0 * 2.0 / (2.0 * 3.0))
            + 0.25 * ln(4.0 * 1.0 / (2.0 * 3.0))
            + 0.25 * ln(4.0 * 1.0 / (2.0 * 1.0));
        let h_pred = ln(2.0);
        assert!((v - mi / h_pred).abs() < 1e-15);
    }

    #[test]
    fn mean_std_values() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}

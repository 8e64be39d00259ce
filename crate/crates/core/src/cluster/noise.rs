//! Corruption models for robustness experiments.

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::random::rng_for;
use crate::tensor::Tensor3;

const SPARSE_STREAM: u64 = 0x5350;
const GAUSSIAN_STREAM: u64 = 0x4741;

/// Replaces `floor(fraction * len)` distinct, uniformly chosen entries with
/// independent `U[0, 1]` values.
pub fn add_sparse_noise(x: &Tensor3, fraction: f64, seed: u64) -> Result<Tensor3> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "sparse fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let len = x.len();
    let count = ((fraction * len as f64).floor() as usize).min(len);
    let mut out = x.clone();
    if count == 0 {
        return Ok(out);
    }
    let mut rng = rng_for(seed, SPARSE_STREAM);
    let mut picked = sample(&mut rng, len, count).into_vec();
    picked.sort_unstable();
    let data = out.as_mut_slice();
    for idx in picked {
        data[idx] = rng.random::<f64>();
    }
    Ok(out)
}

/// Adds i.i.d. `N(0, s^2)` noise with `s = level * ||x||_F / sqrt(len)`.
pub fn add_gaussian_noise(x: &Tensor3, level: f64, seed: u64) -> Result<Tensor3> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gaussian level must be finite and nonnegative, got {level}"
        )));
    }
    let std = level * x.frobenius() / (x.len() as f64).sqrt();
    if std == 0.0 {
        return Ok(x.clone());
    }
    let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = rng_for(seed, GAUSSIAN_STREAM);
    Ok(x.map(|v| v + normal.sample(&mut rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_tensor;

    fn diffs(a: &Tensor3, b: &Tensor3) -> usize {
        a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn sparse_counts() {
        let x = random_tensor((10, 10, 10), 1);
        assert_eq!(add_sparse_noise(&x, 0.0, 3).unwrap(), x);
        assert_eq!(diffs(&x, &add_sparse_noise(&x, 0.1, 3).unwrap()), 100);
        let all = add_sparse_noise(&x, 1.0, 3).unwrap();
        assert_eq!(diffs(&x, &all), 1000);
        assert!(all.as_slice().iter().all(|v| (0.0..1.0).contains(v)));
        assert!(add_sparse_noise(&x, 1.5, 3).is_err());
    }

    #[test]
    fn sparse_is_seeded() {
        let x = random_tensor((5, 6, 2), 2);
        assert_eq!(add_sparse_noise(&x, 0.3, 7).unwrap(), add_sparse_noise(&x, 0.3, 7).unwrap());
        assert_ne!(add_sparse_noise(&x, 0.3, 7).unwrap(), add_sparse_noise(&x, 0.3, 8).unwrap());
    }

    #[test]
    fn gaussian_statistics() {
        let x = Tensor3::from_fn((25, 20, 20), |i, j, k| ((i + 2 * j + 3 * k) % 7) as f64 / 7.0);
        assert_eq!(add_gaussian_noise(&x, 0.0, 1).unwrap(), x);
        let level = 0.2;
        let y = add_gaussian_noise(&x, level, 1).unwrap();
        let n = x.len() as f64;
        let target = level * x.frobenius() / n.sqrt();
        let g: Vec<f64> = y.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
        let mean = g.iter().sum::<f64>() / n;
        let std = (g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - target).abs() <= 0.05 * target);
        assert!(mean.abs() <= 3.0 * target / n.sqrt());
        assert_eq!(y, add_gaussian_noise(&x, level, 1).unwrap());
    }
}

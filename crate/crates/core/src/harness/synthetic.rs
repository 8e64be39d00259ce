//! Union-of-subspaces tensor data with known memberships.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::from_domain_slices;
use crate::cluster::{add_gaussian_noise, add_sparse_noise};
use crate::error::{Error, Result};
use crate::random::{rng_for, Rng};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;

const BASIS_STREAM: u64 = 1;
const COEF_STREAM: u64 = 2;

/// Parameters of [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub k_subspaces: usize,
    pub samples_per_cluster: usize,
    pub n1: usize,
    pub n3: usize,
    pub tubal_rank: usize,
    /// Fraction of entries replaced by uniform noise.
    pub sparse_fraction: f64,
    /// Gaussian noise level relative to the RMS of the clean data.
    pub gaussian_level: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            k_subspaces: 4,
            samples_per_cluster: 20,
            n1: 30,
            n3: 4,
            tubal_rank: 3,
            sparse_fraction: 0.0,
            gaussian_level: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("k_subspaces", self.k_subspaces),
            ("samples_per_cluster", self.samples_per_cluster),
            ("n1", self.n1),
            ("n3", self.n3),
            ("tubal_rank", self.tubal_rank),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.tubal_rank > self.n1 {
            return Err(Error::InvalidArgument(format!(
                "tubal rank {} exceeds n1 = {}",
                self.tubal_rank, self.n1
            )));
        }
        if !(0.0..=1.0).contains(&self.sparse_fraction) {
            return Err(Error::InvalidArgument("sparse_fraction must lie in [0, 1]".into()));
        }
        if !(self.gaussian_level >= 0.0) || !self.gaussian_level.is_finite() {
            return Err(Error::InvalidArgument("gaussian_level must be nonnegative".into()));
        }
        Ok(())
    }

    /// Number of samples `k * m`.
    pub fn n2(&self) -> usize {
        self.k_subspaces * self.samples_per_cluster
    }
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// The noiseless samples of one subspace: `U ◇ C` with `U` orthonormal in
/// every DCT-domain slice.
fn subspace_block(p: &SyntheticParams, t: &OrthoTransform, c: usize) -> Result<Tensor3> {
    let stream = (c as u64) << 8;
    let mut basis_rng = rng_for(p.seed, stream | BASIS_STREAM);
    let mut coef_rng = rng_for(p.seed, stream | COEF_STREAM);
    let slices: Vec<DMatrix<f64>> = (0..p.n3)
        .map(|_| {
            let q = normal_matrix(p.n1, p.tubal_rank, &mut basis_rng).qr().q();
            q * normal_matrix(p.tubal_rank, p.samples_per_cluster, &mut coef_rng)
        })
        .collect();
    from_domain_slices(t, &slices)
}

/// Draws `k` subspaces of tubal rank `r` in `R^{n1 x 1 x n3}`, `m` samples
/// each, stacks them as lateral slices, rescales to `[0, 1]` and applies
/// sparse then Gaussian noise. Labels are `1..=k` in sample order.
pub fn generate_synthetic(p: &SyntheticParams) -> Result<(Tensor3, Vec<usize>)> {
    p.validate()?;
    let t = OrthoTransform::dct(p.n3);
    let blocks = (0..p.k_subspaces)
        .map(|c| subspace_block(p, &t, c))
        .collect::<Result<Vec<_>>>()?;
    let x = Tensor3::concat_lateral(&blocks)?;
    let (lo, hi) = x
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = x.map(|v| (v - lo) / span);
    let x = add_sparse_noise(&x, p.sparse_fraction, p.seed)?;
    let x = add_gaussian_noise(&x, p.gaussian_level, p.seed)?;
    let labels = (0..p.k_subspaces)
        .flat_map(|c| std::iter::repeat_n(c + 1, p.samples_per_cluster))
        .collect();
    Ok((x, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsvd::tubal_rank;

    #[test]
    fn shapes_and_labels() {
        let p = SyntheticParams::default();
        let (x, labels) = generate_synthetic(&p).unwrap();
        assert_eq!(x.dims(), (30, 80, 4));
        assert_eq!(labels.len(), 80);
        assert_eq!(labels[0], 1);
        assert_eq!(labels[79], 4);
        let (lo, hi) = (x.as_slice().iter().cloned().fold(f64::INFINITY, f64::min), x.max_abs());
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn single_subspace_is_low_rank() {
        let p = SyntheticParams {
            k_subspaces: 1,
            ..SyntheticParams::default()
        };
        let (x, _) = generate_synthetic(&p).unwrap();
        // Rescaling adds a constant, which lives in the first DCT slice.
        let r = tubal_rank(&x, &OrthoTransform::dct(p.n3), 1e-10).unwrap();
        assert!(r <= p.tubal_rank + 1, "{r}");
    }

    #[test]
    fn seeded() {
        let p = SyntheticParams {
            sparse_fraction: 0.1,
            gaussian_level: 0.05,
            seed: 3,
            ..SyntheticParams::default()
        };
        assert_eq!(generate_synthetic(&p).unwrap(), generate_synthetic(&p).unwrap());
        let q = SyntheticParams { seed: 4, ..p.clone() };
        assert_ne!(generate_synthetic(&p).unwrap().0, generate_synthetic(&q).unwrap().0);
    }

    #[test]
    fn invalid_params() {
        let p = SyntheticParams {
            tubal_rank: 31,
            ..SyntheticParams::default()
        };
        assert!(generate_synthetic(&p).is_err());
    }
}

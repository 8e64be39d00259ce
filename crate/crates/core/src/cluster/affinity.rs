//! Fusing the frontal slices of a coefficient tensor into one affinity matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Default guard added to the denominator of the diagonal ratio.
pub const DEFAULT_EPS_GUARD: f64 = 1e-10;

/// Symmetric, nonnegative, finite sample-similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    w: DMatrix<f64>,
}

impl AffinityMatrix {
    /// Validates symmetry (1e-12), nonnegativity and finiteness.
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "affinity must be non-empty and square, got {:?}",
                w.shape()
            )));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "affinity entries must be finite and nonnegative".into(),
            ));
        }
        let asym = (&w - w.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "affinity is not symmetric (deviation {asym:e})"
            )));
        }
        Ok(Self { w })
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    /// The affinity as an `n x n x 1` tensor, e.g. for T3B export.
    pub fn to_tensor(&self) -> Tensor3 {
        Tensor3::from_matrix(&self.w).expect("affinity is finite")
    }
}

/// Per-slice diagonal-energy ratios and the normalized weights built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceWeights {
    /// `r_i = sum_j |Z_i[j,j]| / (sum_jk |Z_i[j,k]| + eps_guard)`.
    pub r: Vec<f64>,
    /// `w_i = r_i / sum_j r_j`.
    pub w: Vec<f64>,
    pub eps_guard: f64,
    /// True when every ratio was zero and uniform weights were substituted.
    pub degenerate: bool,
}

impl SliceWeights {
    pub fn uniform(n3: usize) -> Self {
        Self {
            r: vec![1.0; n3],
            w: vec![1.0 / n3 as f64; n3],
            eps_guard: DEFAULT_EPS_GUARD,
            degenerate: false,
        }
    }
}

fn check_square(z: &Tensor3) -> Result<()> {
    let (n1, n2, _) = z.dims();
    if n1 != n2 {
        return Err(Error::Dimension(format!(
            "coefficient slices must be square, got {n1}x{n2}"
        )));
    }
    Ok(())
}

/// `(|Z_i| + |Z_i|') / 2` for slice `i`.
fn symmetrized_abs(z: &Tensor3, i: usize) -> DMatrix<f64> {
    let a = z.slice(i).abs();
    (&a + a.transpose()) * 0.5
}

/// Plain fusion: `(1 / (2 n3)) sum_i (|Z_i| + |Z_i|')`.
pub fn affinity_average(z: &Tensor3) -> Result<AffinityMatrix> {
    check_square(z)?;
    affinity_weighted(z, &SliceWeights::uniform(z.dims().2))
}

/// Diagonal-ratio slice weights. An all-zero tensor falls back to uniform
/// weights with `degenerate` set.
pub fn diag_ratio_weights(z: &Tensor3, eps_guard: f64) -> Result<SliceWeights> {
    check_square(z)?;
    if !(eps_guard > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_guard must be positive, got {eps_guard}"
        )));
    }
    let (n, _, n3) = z.dims();
    let r: Vec<f64> = (0..n3)
        .map(|i| {
            let s = z.slice(i);
            let diag: f64 = (0..n).map(|j| s[(j, j)].abs()).sum();
            let total: f64 = s.iter().map(|v| v.abs()).sum();
            diag / (total + eps_guard)
        })
        .collect();
    let sum: f64 = r.iter().sum();
    if sum == 0.0 {
        return Ok(SliceWeights {
            r,
            w: vec![1.0 / n3 as f64; n3],
            eps_guard,
            degenerate: true,
        });
    }
    let w = r.iter().map(|v| v / sum).collect();
    Ok(SliceWeights {
        r,
        w,
        eps_guard,
        degenerate: false,
    })
}

/// Weighted fusion `sum_i w_i (|Z_i| + |Z_i|') / 2`.
pub fn affinity_weighted(z: &Tensor3, weights: &SliceWeights) -> Result<AffinityMatrix> {
    check_square(z)?;
    let (n, _, n3) = z.dims();
    if weights.w.len() != n3 {
        return Err(Error::Dimension(format!(
            "{} weights for {n3} slices",
            weights.w.len()
        )));
    }
    let mut acc = DMatrix::zeros(n, n);
    for (i, &wi) in weights.w.iter().enumerate() {
        acc += symmetrized_abs(z, i) * wi;
    }
    AffinityMatrix::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_tensor;

    #[test]
    fn identity_slices_average_to_identity() {
        let z = Tensor3::identity_slices(4, 3);
        let a = affinity_average(&z).unwrap();
        assert!((a.matrix() - DMatrix::<f64>::identity(4, 4)).amax() <= 1e-15);
    }

    #[test]
    fn antisymmetric_slice() {
        let a = 0.7;
        let z = Tensor3::from_fn((3, 3, 1), |i, j, _| match i.cmp(&j) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => -a,
            std::cmp::Ordering::Equal => 0.0,
        });
        let w = affinity_average(&z).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { a };
                assert!((w.matrix()[(i, j)] - expect).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn average_is_symmetric() {
        let z = random_tensor((6, 6, 3), 2);
        let w = affinity_average(&z).unwrap();
        assert!((w.matrix() - w.matrix().transpose()).amax() <= 1e-15);
        assert!(affinity_average(&random_tensor((3, 4, 2), 1)).is_err());
    }

    #[test]
    fn identity_vs_all_ones_weights() {
        let n = 5;
        let z = Tensor3::from_fn((n, n, 2), |i, j, k| match k {
            0 => (i == j) as u8 as f64,
            _ => 1.0,
        });
        let sw = diag_ratio_weights(&z, DEFAULT_EPS_GUARD).unwrap();
        assert!((sw.r[0] - 1.0).abs() < 1e-9);
        assert!((sw.r[1] - 1.0 / n as f64).abs() < 1e-9);
        let nf = n as f64;
        assert!((sw.w[0] - nf / (nf + 1.0)).abs() < 1e-9);
        assert!((sw.w[1] - 1.0 / (nf + 1.0)).abs() < 1e-9);
        assert!((sw.w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(sw.w[0] > sw.w[1]);
    }

    #[test]
    fn identical_slices_get_uniform_weights() {
        let s = random_tensor((4, 4, 1), 3);
        let z = Tensor3::from_fn((4, 4, 3), |i, j, _| s.get(i, j, 0));
        let sw = diag_ratio_weights(&z, DEFAULT_EPS_GUARD).unwrap();
        for w in &sw.w {
            assert!((w - 1.0 / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_tensor_falls_back_to_uniform() {
        let sw = diag_ratio_weights(&Tensor3::zeros((3, 3, 4)), DEFAULT_EPS_GUARD).unwrap();
        assert!(sw.degenerate);
        assert_eq!(sw.w, vec![0.25; 4]);
    }

    #[test]
    fn weighted_reductions() {
        let z = random_tensor((5, 5, 3), 9);
        let avg = affinity_average(&z).unwrap();
        let uni = affinity_weighted(&z, &SliceWeights::uniform(3)).unwrap();
        assert!((avg.matrix() - uni.matrix()).amax() <= 1e-12);

        let single = SliceWeights {
            w: vec![0.0, 1.0, 0.0],
            ..SliceWeights::uniform(3)
        };
        let one = affinity_weighted(&z, &single).unwrap();
        assert!((one.matrix() - symmetrized_abs(&z, 1)).amax() <= 1e-15);

        let short = SliceWeights::uniform(2);
        assert!(affinity_weighted(&z, &short).is_err());
    }

    #[test]
    fn block_slice_dominates_off_block_mass() {
        // Slice 0 is block-diagonal, slice 1 is dense noise.
        let n = 6;
        let noise = random_tensor((n, n, 1), 4);
        let z = Tensor3::from_fn((n, n, 2), |i, j, k| {
            if k == 0 {
                if (i < 3) == (j < 3) { 1.0 } else { 0.0 }
            } else {
                noise.get(i, j, 0)
            }
        });
        let sw = SliceWeights {
            w: vec![0.9, 0.1],
            ..SliceWeights::uniform(2)
        };
        let fused = affinity_weighted(&z, &sw).unwrap();
        let off = |m: &DMatrix<f64>| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if (i < 3) != (j < 3) {
                        s += m[(i, j)];
                    }
                }
            }
            s
        };
        let noise_off = off(&symmetrized_abs(&z, 1));
        assert!(off(fused.matrix()) <= 0.1 * noise_off + 1e-12);
    }
}

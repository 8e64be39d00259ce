//! Transformed tensor SVD and the transformed tensor nuclear norm.

use nalgebra::{DMatrix, DVector, SVD};

use crate::algebra::{domain_slices, from_domain_slices, t_product, t_transpose};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;

/// Singular values below this fraction of the largest are zero for rank decisions.
pub const RANK_RTOL: f64 = 1e-12;

/// Thin SVD of one matrix with singular values sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct SliceSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Thin SVD of `m` with sorted singular values; `slice` only labels errors.
pub fn slice_svd(m: DMatrix<f64>, slice: usize) -> Result<SliceSvd> {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    let svd = SVD::try_new(m, true, true, f64::EPSILON, 0).ok_or(Error::SvdFailed(slice))?;
    let u = svd.u.ok_or(Error::SvdFailed(slice))?;
    let v_t = svd.v_t.ok_or(Error::SvdFailed(slice))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let s = DVector::from_iterator(p, order.iter().map(|&i| sv[i]));
    let u = DMatrix::from_fn(rows, p, |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(cols, p, |r, c| v_t[(order[c], r)]);
    Ok(SliceSvd { u, s, v })
}

/// Singular values of `m` in decreasing order.
pub fn singular_values(m: DMatrix<f64>, slice: usize) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m, false, false, f64::EPSILON, 0).ok_or(Error::SvdFailed(slice))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Factors of `b = u ◇ s ◇ v'`.
#[derive(Debug, Clone)]
pub struct TTsvdFactors {
    /// `n1 x r x n3`, orthonormal columns in every transform-domain slice.
    pub u: Tensor3,
    /// `r x r x n3`, diagonal in every transform-domain slice.
    pub s: Tensor3,
    /// `n2 x r x n3`, orthonormal columns in every transform-domain slice.
    pub v: Tensor3,
    pub transform: OrthoTransform,
    pub r: usize,
}

impl TTsvdFactors {
    /// `u ◇ s ◇ v'`.
    pub fn reconstruct(&self) -> Result<Tensor3> {
        let us = t_product(&self.u, &self.s, &self.transform)?;
        t_product(&us, &t_transpose(&self.v, &self.transform)?, &self.transform)
    }

    /// Diagonals of the transform-domain slices of `s`: `values[k][i]`.
    pub fn domain_singular_values(&self) -> Result<Vec<Vec<f64>>> {
        Ok(domain_slices(&self.transform, &self.s)?
            .iter()
            .map(|m| m.diagonal().iter().copied().collect())
            .collect())
    }
}

/// Transformed tensor SVD keeping the leading `r` singular triplets of every
/// transform-domain slice (default `r = min(n1, n2)`).
pub fn t_tsvd(b: &Tensor3, t: &OrthoTransform, r: Option<usize>) -> Result<TTsvdFactors> {
    let (n1, n2, n3) = b.dims();
    let full = n1.min(n2);
    let r = r.unwrap_or(full);
    if r == 0 || r > full {
        return Err(Error::InvalidArgument(format!(
            "t-tsvd rank {r} must lie in 1..={full}"
        )));
    }
    let mut us = Vec::with_capacity(n3);
    let mut ss = Vec::with_capacity(n3);
    let mut vs = Vec::with_capacity(n3);
    for (k, slice) in domain_slices(t, b)?.into_iter().enumerate() {
        let svd = slice_svd(slice, k)?;
        us.push(svd.u.columns(0, r).into_owned());
        vs.push(svd.v.columns(0, r).into_owned());
        ss.push(DMatrix::from_diagonal(&svd.s.rows(0, r).into_owned()));
    }
    Ok(TTsvdFactors {
        u: from_domain_slices(t, &us)?,
        s: from_domain_slices(t, &ss)?,
        v: from_domain_slices(t, &vs)?,
        transform: t.clone(),
        r,
    })
}

/// Sorted singular values of every transform-domain slice of `b`.
pub fn transform_spectrum(b: &Tensor3, t: &OrthoTransform) -> Result<Vec<Vec<f64>>> {
    domain_slices(t, b)?
        .into_iter()
        .enumerate()
        .map(|(k, m)| singular_values(m, k))
        .collect()
}

/// Transformed tensor nuclear norm: `(1/n3) * sum_k ||B_k||_*` over the
/// transform-domain slices `B_k`.
pub fn ttnn(b: &Tensor3, t: &OrthoTransform) -> Result<f64> {
    let n3 = b.dims().2 as f64;
    let spectrum = transform_spectrum(b, t)?;
    Ok(spectrum.iter().flatten().sum::<f64>() / n3)
}

/// Tubal rank: the largest per-slice count of transform-domain singular
/// values exceeding `rtol` times the largest singular value over all slices.
pub fn tubal_rank(b: &Tensor3, t: &OrthoTransform, rtol: f64) -> Result<usize> {
    let spectrum = transform_spectrum(b, t)?;
    Ok(rank_of_spectrum(&spectrum, rtol))
}

pub(crate) fn rank_of_spectrum(spectrum: &[Vec<f64>], rtol: f64) -> usize {
    let top = spectrum
        .iter()
        .flat_map(|s| s.first().copied())
        .fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    spectrum
        .iter()
        .map(|s| s.iter().filter(|&&v| v > rtol * top).count())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::orthogonality_defect;
    use crate::random::random_tensor;
    use crate::transform::learn_transform;

    #[test]
    fn full_reconstruction_and_invariants() {
        let b = random_tensor((6, 4, 3), 21);
        let t = learn_transform(&b).unwrap();
        let f = t_tsvd(&b, &t, None).unwrap();
        assert_eq!(f.r, 4);
        assert!(f.reconstruct().unwrap().relative_error(&b) <= 1e-10);
        assert!(orthogonality_defect(&f.u, &t).unwrap() <= 1e-8);
        assert!(orthogonality_defect(&f.v, &t).unwrap() <= 1e-8);
        for (k, sl) in domain_slices(&t, &f.s).unwrap().iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert!(sl[(i, j)].abs() <= 1e-12, "slice {k} off-diagonal");
                    }
                }
                assert!(sl[(i, i)] >= 0.0);
                if i > 0 {
                    assert!(sl[(i, i)] <= sl[(i - 1, i - 1)] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn f_diagonal_input_under_identity() {
        let b = Tensor3::from_fn((3, 3, 2), |i, j, k| {
            if i == j {
                (3 - i) as f64 + k as f64
            } else {
                0.0
            }
        });
        let t = OrthoTransform::identity(2);
        let f = t_tsvd(&b, &t, None).unwrap();
        assert!(f.s.max_abs_diff(&b) <= 1e-12);
        for k in 0..2 {
            let u = f.u.slice(k);
            let v = f.v.slice(k);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((u[(i, j)].abs() - expect).abs() <= 1e-12);
                    assert!((v[(i, j)].abs() - expect).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_one_slices_reconstruct_exactly() {
        let t = OrthoTransform::dct(3);
        let a = random_tensor((5, 1, 3), 1);
        let c = random_tensor((1, 4, 3), 2);
        let b = t_product(&a, &c, &t).unwrap();
        let f = t_tsvd(&b, &t, Some(1)).unwrap();
        assert!(f.reconstruct().unwrap().relative_error(&b) <= 1e-10);
        assert_eq!(tubal_rank(&b, &t, RANK_RTOL).unwrap(), 1);
    }

    #[test]
    fn truncation_error_is_tail_energy() {
        let b = random_tensor((5, 4, 3), 33);
        let t = learn_transform(&b).unwrap();
        let spectrum = transform_spectrum(&b, &t).unwrap();
        let tail: f64 = spectrum.iter().flat_map(|s| s[2..].iter()).map(|v| v * v).sum();
        let approx = t_tsvd(&b, &t, Some(2)).unwrap().reconstruct().unwrap();
        let err = (&approx - &b).frobenius();
        assert!((err - tail.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn ttnn_examples() {
        let t1 = OrthoTransform::identity(1);
        assert_eq!(ttnn(&Tensor3::zeros((3, 2, 1)), &t1).unwrap(), 0.0);
        let d = Tensor3::from_fn((2, 2, 1), |i, j, _| match (i, j) {
            (0, 0) => 3.0,
            (1, 1) => 2.0,
            _ => 0.0,
        });
        assert!((ttnn(&d, &t1).unwrap() - 5.0).abs() <= 1e-14);
    }

    #[test]
    fn rejects_bad_rank() {
        let b = random_tensor((3, 2, 2), 1);
        let t = OrthoTransform::identity(2);
        assert!(t_tsvd(&b, &t, Some(3)).is_err());
        assert!(t_tsvd(&b, &t, Some(0)).is_err());
    }
}

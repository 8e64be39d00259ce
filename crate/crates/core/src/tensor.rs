//! Dense real third-order tensors.
//!
//! Storage is slice-major: frontal slice `k` occupies one contiguous block of
//! `n1 * n2` values, and each block is column-major. A frontal slice is
//! therefore directly viewable as an `nalgebra` column-major matrix, and the
//! whole buffer is viewable as the `(n1 * n2) x n3` matrix whose column `k` is
//! the vectorized slice `k`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

/// Shape `(n1, n2, n3)` of a third-order tensor.
pub type Dims = (usize, usize, usize);

/// A dense real tensor of shape `n1 x n2 x n3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

/// The four entrywise norms used throughout the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    /// `(sum |b|^{1/2})^2`. Not a norm, but conventionally called one.
    pub l_half: f64,
    pub frobenius: f64,
    pub l_inf: f64,
}

impl Tensor3 {
    /// Builds a tensor from slice-major, column-major-within-slice data.
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        let (n1, n2, n3) = dims;
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::Dimension(format!(
                "all dimensions must be positive, got {n1}x{n2}x{n3}"
            )));
        }
        if data.len() != n1 * n2 * n3 {
            return Err(Error::Dimension(format!(
                "data length {} does not match {n1}x{n2}x{n3}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Dims) -> Self {
        assert!(
            dims.0 > 0 && dims.1 > 0 && dims.2 > 0,
            "tensor dimensions must be positive"
        );
        Self {
            dims,
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    /// Builds a tensor by evaluating `f(i, j, k)` at every index.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        let (n1, n2, n3) = dims;
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    t.data[k * n1 * n2 + j * n1 + i] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Stacks equally shaped matrices as frontal slices.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Dimension("no slices given".into()))?;
        let (n1, n2) = first.shape();
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for (k, s) in slices.iter().enumerate() {
            if s.shape() != (n1, n2) {
                return Err(Error::Dimension(format!(
                    "slice {k} is {:?}, expected {:?}",
                    s.shape(),
                    (n1, n2)
                )));
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::new((n1, n2, slices.len()), data)
    }

    /// Wraps a matrix as an `n1 x n2 x 1` tensor.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_slices(std::slice::from_ref(m))
    }

    /// Builds an `n x n x n3` tensor with every frontal slice equal to the identity.
    pub fn identity_slices(n: usize, n3: usize) -> Self {
        Self::from_fn((n, n, n3), |i, j, _| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        let (n1, n2, _) = self.dims;
        k * n1 * n2 + j * n1 + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    /// Borrowed view of frontal slice `k`.
    pub fn slice(&self, k: usize) -> DMatrixView<'_, f64> {
        let (n1, n2, _) = self.dims;
        let start = k * n1 * n2;
        DMatrixView::from_slice(&self.data[start..start + n1 * n2], n1, n2)
    }

    pub fn slice_mut(&mut self, k: usize) -> DMatrixViewMut<'_, f64> {
        let (n1, n2, _) = self.dims;
        let start = k * n1 * n2;
        DMatrixViewMut::from_slice(&mut self.data[start..start + n1 * n2], n1, n2)
    }

    /// Owned copies of all frontal slices.
    pub fn slices(&self) -> Vec<DMatrix<f64>> {
        (0..self.dims.2).map(|k| self.slice(k).into_owned()).collect()
    }

    /// The `(n1 * n2) x n3` matrix whose column `k` is vectorized slice `k`.
    pub fn tube_matrix(&self) -> DMatrixView<'_, f64> {
        let (n1, n2, n3) = self.dims;
        DMatrixView::from_slice(&self.data, n1 * n2, n3)
    }

    /// Mode-3 unfolding: the `n3 x (n1 * n2)` matrix whose row `k` is the
    /// column-major vectorization of frontal slice `k`.
    pub fn unfold_mode3(&self) -> DMatrix<f64> {
        self.tube_matrix().transpose()
    }

    /// The mode-3 fiber (tube) at `(i, j)`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dims.2).map(|k| self.get(i, j, k)).collect()
    }

    /// Lateral slice `j` as an `n1 x 1 x n3` tensor.
    pub fn lateral(&self, j: usize) -> Tensor3 {
        let (n1, _, n3) = self.dims;
        Tensor3::from_fn((n1, 1, n3), |i, _, k| self.get(i, j, k))
    }

    /// Concatenates tensors along the second mode.
    pub fn concat_lateral(parts: &[Tensor3]) -> Result<Tensor3> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("nothing to concatenate".into()))?;
        let (n1, _, n3) = first.dims;
        if parts.iter().any(|p| p.dims.0 != n1 || p.dims.2 != n3) {
            return Err(Error::Dimension(
                "lateral concatenation needs matching n1 and n3".into(),
            ));
        }
        let n2: usize = parts.iter().map(|p| p.dims.1).sum();
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for k in 0..n3 {
            for p in parts {
                let block = p.dims.0 * p.dims.1;
                data.extend_from_slice(&p.data[k * block..(k + 1) * block]);
            }
        }
        Tensor3::new((n1, n2, n3), data)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two equally shaped tensors.
    pub fn zip_map(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        self.check_same_dims(other)?;
        Ok(Tensor3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Tensor3) {
        assert_eq!(self.dims, other.dims, "axpy dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Tensor3 {
        self.map(|v| alpha * v)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `<self, other>` summed over all entries.
    pub fn inner(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "inner product dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Max-abs entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "comparison dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `||self - other||_F / max(||other||_F, tiny)`.
    pub fn relative_error(&self, reference: &Tensor3) -> f64 {
        let diff = (self - reference).frobenius();
        diff / reference.frobenius().max(f64::MIN_POSITIVE)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norms(&self) -> Norms {
        norms(self)
    }
}

/// `l1`, `l_half`, Frobenius and infinity norms of `b`.
pub fn norms(b: &Tensor3) -> Norms {
    let mut l1 = 0.0;
    let mut root_sum = 0.0;
    let mut sq = 0.0;
    let mut inf: f64 = 0.0;
    for &v in &b.data {
        let a = v.abs();
        l1 += a;
        root_sum += a.sqrt();
        sq += a * a;
        inf = inf.max(a);
    }
    Norms {
        l1,
        l_half: root_sum * root_sum,
        frobenius: sq.sqrt(),
        l_inf: inf,
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a + b).expect("tensor add shape mismatch")
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a - b).expect("tensor sub shape mismatch")
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.scaled(rhs)
    }
}

impl Neg for &Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.scaled(-1.0)
    }
}

impl AddAssign<&Tensor3> for Tensor3 {
    fn add_assign(&mut self, rhs: &Tensor3) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Tensor3> for Tensor3 {
    fn sub_assign(&mut self, rhs: &Tensor3) {
        self.axpy(-1.0, rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_slice_major_column_major() {
        let t = Tensor3::new((2, 2, 2), (0..8).map(f64::from).collect()).unwrap();
        assert_eq!(t.get(1, 0, 0), 1.0);
        assert_eq!(t.get(0, 1, 0), 2.0);
        assert_eq!(t.get(0, 0, 1), 4.0);
        assert_eq!(t.slice(1)[(1, 1)], 7.0);
        assert_eq!(t.tube(1, 1), vec![3.0, 7.0]);
        assert_eq!(t.unfold_mode3().row(1).iter().copied().collect::<Vec<_>>(), vec![4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            Tensor3::new((2, 2, 2), vec![0.0; 7]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Tensor3::new((1, 1, 2), vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(Tensor3::new((0, 1, 1), vec![]).is_err());
    }

    #[test]
    fn norms_of_small_tensors() {
        let z = Tensor3::zeros((2, 3, 2)).norms();
        assert_eq!((z.l1, z.l_half, z.frobenius, z.l_inf), (0.0, 0.0, 0.0, 0.0));

        let four = Tensor3::new((1, 1, 1), vec![4.0]).unwrap().norms();
        assert_eq!((four.l1, four.l_half, four.frobenius, four.l_inf), (4.0, 4.0, 4.0, 4.0));

        let pair = Tensor3::new((2, 1, 1), vec![1.0, -4.0]).unwrap().norms();
        assert_eq!(pair.l_half, 9.0);
        assert_eq!(pair.l1, 5.0);
        assert_eq!(pair.l_inf, 4.0);
        assert!((pair.frobenius - 17f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lateral_concat_roundtrip() {
        let t = Tensor3::from_fn((3, 4, 2), |i, j, k| (i + 10 * j + 100 * k) as f64);
        let parts: Vec<_> = (0..4).map(|j| t.lateral(j)).collect();
        assert_eq!(Tensor3::concat_lateral(&parts).unwrap(), t);
    }
}

//! T-product algebra: slice-wise matrix arithmetic in the transform domain.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;

/// Transform-domain frontal slices of `b`.
pub fn domain_slices(t: &OrthoTransform, b: &Tensor3) -> Result<Vec<DMatrix<f64>>> {
    Ok(t.forward(b)?.slices())
}

/// Stacks transform-domain slices and moves them back to the original domain.
pub fn from_domain_slices(t: &OrthoTransform, slices: &[DMatrix<f64>]) -> Result<Tensor3> {
    t.inverse(&Tensor3::from_slices(slices)?)
}

/// `a ◇ b`: per transform-domain slice `A_k * B_k`, then inverse transform.
pub fn t_product(a: &Tensor3, b: &Tensor3, t: &OrthoTransform) -> Result<Tensor3> {
    let (_, n2, n3) = a.dims();
    let (m1, _, m3) = b.dims();
    if n2 != m1 || n3 != m3 {
        return Err(Error::Dimension(format!(
            "t-product of {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let a_bar = t.forward(a)?;
    let b_bar = t.forward(b)?;
    let prod: Vec<_> = (0..n3).map(|k| a_bar.slice(k) * b_bar.slice(k)).collect();
    from_domain_slices(t, &prod)
}

/// Tensor transpose under `t`: every transform-domain slice is transposed.
pub fn t_transpose(b: &Tensor3, t: &OrthoTransform) -> Result<Tensor3> {
    let slices: Vec<_> = domain_slices(t, b)?
        .into_iter()
        .map(|s| s.transpose())
        .collect();
    from_domain_slices(t, &slices)
}

/// The `n x n x n3` tensor whose transform-domain slices are all `I`.
pub fn t_identity(n: usize, n3: usize, t: &OrthoTransform) -> Result<Tensor3> {
    if n == 0 || n3 == 0 {
        return Err(Error::Dimension("identity tensor needs n, n3 >= 1".into()));
    }
    t.inverse(&Tensor3::identity_slices(n, n3))
}

/// Max-abs deviation of `u' ◇ u` from the identity tensor, measured in the
/// transform domain. Zero for a tensor with orthonormal columns.
pub fn orthogonality_defect(u: &Tensor3, t: &OrthoTransform) -> Result<f64> {
    let r = u.dims().1;
    let mut worst: f64 = 0.0;
    for s in domain_slices(t, u)? {
        let g = s.transpose() * &s;
        worst = worst.max((g - DMatrix::<f64>::identity(r, r)).amax());
    }
    Ok(worst)
}

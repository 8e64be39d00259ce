//! Closed-form proximal operators.
//!
//! | operator             | minimizes (per entry or per slice)                  |
//! |----------------------|-----------------------------------------------------|
//! | [`half_threshold`]   | `alpha * sqrt(|x|) + (x - y)^2 / 2`                 |
//! | [`soft_threshold`]   | `thresh * |x| + (x - y)^2 / 2`                      |
//! | [`frobenius_shrink`] | `beta ||N||_F^2 + mu/2 ||N - (c + p/mu)||_F^2`       |
//! | [`svt_transform`]    | `thresh * sum_k ||J_k||_* + ||J - Y||_F^2 / 2`      |
//!
//! In the last row `J_k` are the transform-domain slices. Because the
//! transformed tensor nuclear norm carries a `1/n3` factor, the prox of
//! `||J||_TTNN + mu/2 ||J - Y||_F^2` is `svt_transform(Y, t, 1 / (n3 mu))`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::algebra::{domain_slices, from_domain_slices};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;
use crate::tsvd::slice_svd;

/// Parameters of the half-thresholding operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfThreshParams {
    alpha: f64,
    tau: f64,
}

impl HalfThreshParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "half-threshold alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            tau: half_threshold_tau(alpha),
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Jump threshold `(3/2) alpha^{2/3}`.
    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Scalar half-thresholding.
    ///
    /// Zero for `|y| <= tau`; otherwise
    /// `sgn(y) (2/3) |y| (1 + cos(2pi/3 - (2/3) arccos(3 sqrt(3) alpha / (4 |y|^{3/2}))))`,
    /// the largest real root of the stationarity cubic, which is the global
    /// minimizer beyond the jump.
    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        let a = y.abs();
        if a <= self.tau {
            return 0.0;
        }
        let arg = (3.0 * 3f64.sqrt() * self.alpha / (4.0 * a.powf(1.5))).clamp(-1.0, 1.0);
        let phi = (2.0 / 3.0) * arg.acos();
        y.signum() * (2.0 / 3.0) * a * (1.0 + (2.0 * PI / 3.0 - phi).cos())
    }
}

/// `(3/2) alpha^{2/3}`.
pub fn half_threshold_tau(alpha: f64) -> f64 {
    1.5 * alpha.powf(2.0 / 3.0)
}

/// Elementwise half-thresholding with parameter `alpha`.
pub fn half_threshold(y: &Tensor3, alpha: f64) -> Result<Tensor3> {
    let params = HalfThreshParams::new(alpha)?;
    Ok(y.map(|v| params.apply(v)))
}

/// Elementwise `sgn(y) max(|y| - thresh, 0)`.
pub fn soft_threshold(y: &Tensor3, thresh: f64) -> Result<Tensor3> {
    check_positive("soft-threshold", thresh)?;
    Ok(y.map(|v| soft(v, thresh)))
}

#[inline]
pub(crate) fn soft(v: f64, thresh: f64) -> f64 {
    v.signum() * (v.abs() - thresh).max(0.0)
}

/// `(p + mu c) / (2 beta + mu)`, the minimizer of
/// `beta ||N||_F^2 + mu/2 ||N - (c + p/mu)||_F^2`.
///
/// `beta = 0` is accepted and yields `c + p/mu`.
pub fn frobenius_shrink(c: &Tensor3, p: &Tensor3, mu: f64, beta: f64) -> Result<Tensor3> {
    check_positive("frobenius shrink mu", mu)?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frobenius shrink beta must be non-negative, got {beta}"
        )));
    }
    let denom = 2.0 * beta + mu;
    c.zip_map(p, |c, p| (p + mu * c) / denom)
}

/// Singular value thresholding in the transform domain: every singular value
/// `sigma` of every transform-domain slice becomes `max(sigma - thresh, 0)`.
pub fn svt_transform(y: &Tensor3, t: &OrthoTransform, thresh: f64) -> Result<Tensor3> {
    check_positive("svt threshold", thresh)?;
    let shrunk = domain_slices(t, y)?
        .into_iter()
        .enumerate()
        .map(|(k, slice)| svt_matrix(slice, thresh, k))
        .collect::<Result<Vec<_>>>()?;
    from_domain_slices(t, &shrunk)
}

/// Matrix singular value thresholding.
pub fn svt_matrix(m: DMatrix<f64>, thresh: f64, slice: usize) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    let svd = slice_svd(m, slice)?;
    let keep = svd.s.iter().take_while(|&&s| s > thresh).count();
    let mut out = DMatrix::zeros(rows, cols);
    for i in 0..keep {
        let scale = svd.s[i] - thresh;
        out += (svd.u.column(i) * scale) * svd.v.column(i).transpose();
    }
    Ok(out)
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

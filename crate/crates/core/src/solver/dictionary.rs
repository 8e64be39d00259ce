//! Dictionary construction: optional denoising of the data followed by the
//! skinny transformed t-SVD that defines the projected problem.

use nalgebra::DMatrix;

use crate::algebra::{domain_slices, from_domain_slices};
use crate::error::{Error, Result};
use crate::prox::{soft_threshold, svt_transform};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;
use crate::tsvd::{rank_of_spectrum, slice_svd, t_tsvd};

use super::config::{DictMode, SolverConfig};

/// Relative cutoff on transform-domain singular values defining the skinny rank.
pub const SKINNY_RTOL: f64 = 1e-10;

/// Factors of the skinny t-SVD `X~ = U ◇ S ◇ V'`, regrouped as
/// `A = U ◇ S` and `B = S ◇ V'`.
#[derive(Debug, Clone)]
pub struct Dictionary {
    /// `n1 x r x n3`.
    pub a: Tensor3,
    /// `r x n2 x n3`.
    pub b: Tensor3,
    /// `n2 x r x n3`, maps the projected coefficients back: `Z = V ◇ Z_bar`.
    pub v: Tensor3,
    /// Tubal rank of `X~`.
    pub r: usize,
}

/// Default robust-PCA weight `1 / sqrt(max(n1, n2) n3)`.
pub fn default_trpca_lambda(dims: (usize, usize, usize)) -> f64 {
    let (n1, n2, n3) = dims;
    1.0 / ((n1.max(n2) * n3) as f64).sqrt()
}

/// Outcome of [`trpca`].
#[derive(Debug, Clone)]
pub struct TrpcaResult {
    pub low_rank: Tensor3,
    pub sparse: Tensor3,
    pub iterations: usize,
    pub converged: bool,
}

/// Tensor robust PCA: `min ||L||_TTNN + lambda ||E||_1  s.t.  X = L + E`,
/// solved by two-block ADMM with the penalty schedule and tolerance of `cfg`.
pub fn trpca(x: &Tensor3, t: &OrthoTransform, lambda: f64, cfg: &SolverConfig) -> Result<TrpcaResult> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "robust PCA lambda must be positive, got {lambda}"
        )));
    }
    let n3 = x.dims().2 as f64;
    let mut l = Tensor3::zeros(x.dims());
    let mut e = Tensor3::zeros(x.dims());
    let mut y = Tensor3::zeros(x.dims());
    let mut mu = cfg.mu0;
    for iter in 1..=cfg.max_iters {
        let mut target = x - &e;
        target.axpy(1.0 / mu, &y);
        let l_next = svt_transform(&target, t, 1.0 / (n3 * mu))?;

        let mut target = x - &l_next;
        target.axpy(1.0 / mu, &y);
        let e_next = soft_threshold(&target, lambda / mu)?;

        let mut resid = x - &l_next;
        resid -= &e_next;
        y.axpy(mu, &resid);

        let change = l_next.max_abs_diff(&l).max(e_next.max_abs_diff(&e));
        l = l_next;
        e = e_next;
        if !l.is_finite() || !e.is_finite() {
            return Err(Error::Diverged {
                variable: "robust PCA iterate",
                iteration: iter,
            });
        }
        if change.max(resid.max_abs()) < cfg.eps {
            return Ok(TrpcaResult {
                low_rank: l,
                sparse: e,
                iterations: iter,
                converged: true,
            });
        }
        mu = (cfg.rho * mu).min(cfg.mu_max);
    }
    Ok(TrpcaResult {
        low_rank: l,
        sparse: e,
        iterations: cfg.max_iters,
        converged: false,
    })
}

/// Produces the dictionary source `X~` according to `cfg.dict_mode`.
pub fn denoise_dictionary(x: &Tensor3, cfg: &SolverConfig, t: &OrthoTransform) -> Result<Tensor3> {
    match cfg.dict_mode {
        DictMode::SelfRepresentation => Ok(x.clone()),
        DictMode::TruncatedTtsvd(r) => {
            let (n1, n2, _) = x.dims();
            if r > n1.min(n2) {
                return Err(Error::InvalidArgument(format!(
                    "dictionary rank {r} exceeds min(n1, n2) = {}",
                    n1.min(n2)
                )));
            }
            t_tsvd(x, t, Some(r))?.reconstruct()
        }
        DictMode::Trpca(lambda) => {
            let lambda = lambda.unwrap_or_else(|| default_trpca_lambda(x.dims()));
            Ok(trpca(x, t, lambda, cfg)?.low_rank)
        }
    }
}

/// Skinny transformed t-SVD of `x_tilde`. The rank `r` is the largest
/// per-slice count of singular values above [`SKINNY_RTOL`] times the largest
/// singular value overall; smaller slices are zero-padded up to `r`.
pub fn build_dictionary(x_tilde: &Tensor3, t: &OrthoTransform) -> Result<Dictionary> {
    if x_tilde.max_abs() == 0.0 {
        return Err(Error::Degenerate("dictionary source is all zero".into()));
    }
    let svds = domain_slices(t, x_tilde)?
        .into_iter()
        .enumerate()
        .map(|(k, m)| slice_svd(m, k))
        .collect::<Result<Vec<_>>>()?;
    let spectrum: Vec<Vec<f64>> = svds.iter().map(|s| s.s.iter().copied().collect()).collect();
    let r = rank_of_spectrum(&spectrum, SKINNY_RTOL);
    let top = spectrum.iter().flat_map(|s| s.first().copied()).fold(0.0, f64::max);
    let cutoff = SKINNY_RTOL * top;

    let mut a = Vec::with_capacity(svds.len());
    let mut b = Vec::with_capacity(svds.len());
    let mut v = Vec::with_capacity(svds.len());
    for svd in &svds {
        let sigma: Vec<f64> = (0..r)
            .map(|i| if svd.s[i] > cutoff { svd.s[i] } else { 0.0 })
            .collect();
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma));
        let u_r = svd.u.columns(0, r);
        let v_r = svd.v.columns(0, r);
        a.push(u_r * &s);
        b.push(&s * v_r.transpose());
        v.push(v_r.into_owned());
    }
    Ok(Dictionary {
        a: from_domain_slices(t, &a)?,
        b: from_domain_slices(t, &b)?,
        v: from_domain_slices(t, &v)?,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::t_product;
    use crate::random::random_tensor;
    use crate::transform::learn_transform;

    // A = U◇S and B = S◇V' share S, so X~ = A◇V' (A◇B would be U◇S²◇V').
    fn recon(d: &Dictionary, t: &OrthoTransform) -> Tensor3 {
        t_product(&d.a, &crate::algebra::t_transpose(&d.v, t).unwrap(), t).unwrap()
    }

    fn low_rank(dims: (usize, usize, usize), r: usize, t: &OrthoTransform, seed: u64) -> Tensor3 {
        let f = random_tensor((dims.0, r, dims.2), seed);
        let g = random_tensor((r, dims.1, dims.2), seed + 1);
        t_product(&f, &g, t).unwrap()
    }

    #[test]
    fn exact_rank_is_detected() {
        let t = OrthoTransform::dct(4);
        let x = low_rank((10, 12, 4), 3, &t, 5);
        let d = build_dictionary(&x, &t).unwrap();
        assert_eq!(d.r, 3);
        assert_eq!(d.a.dims(), (10, 3, 4));
        assert_eq!(d.b.dims(), (3, 12, 4));
        assert_eq!(d.v.dims(), (12, 3, 4));
        assert!(recon(&d, &t).relative_error(&x) <= 1e-8);
    }

    #[test]
    fn full_rank_factorization_reconstructs() {
        let x = random_tensor((6, 9, 3), 2);
        let t = learn_transform(&x).unwrap();
        let d = build_dictionary(&x, &t).unwrap();
        assert_eq!(d.r, 6);
        assert!(recon(&d, &t).relative_error(&x) <= 1e-8);
        assert!(crate::algebra::orthogonality_defect(&d.v, &t).unwrap() <= 1e-10);
    }

    #[test]
    fn identity_slices_give_unit_singular_values() {
        let x = Tensor3::identity_slices(4, 3);
        let t = OrthoTransform::identity(3);
        let d = build_dictionary(&x, &t).unwrap();
        assert_eq!(d.r, 4);
        // S = I, so A = U and B = V'.
        let vt = crate::algebra::t_transpose(&d.v, &t).unwrap();
        assert!(d.b.max_abs_diff(&vt) <= 1e-12);
        assert!(t_product(&d.a, &d.b, &t).unwrap().max_abs_diff(&x) <= 1e-12);
    }

    #[test]
    fn zero_source_is_rejected() {
        let t = OrthoTransform::identity(2);
        assert!(matches!(
            build_dictionary(&Tensor3::zeros((3, 3, 2)), &t),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn denoise_modes() {
        let x = random_tensor((5, 7, 3), 4);
        let t = learn_transform(&x).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(denoise_dictionary(&x, &cfg, &t).unwrap(), x);

        let full = SolverConfig {
            dict_mode: DictMode::TruncatedTtsvd(5),
            ..cfg.clone()
        };
        assert!(denoise_dictionary(&x, &full, &t).unwrap().max_abs_diff(&x) <= 1e-10);

        let too_big = SolverConfig {
            dict_mode: DictMode::TruncatedTtsvd(6),
            ..cfg
        };
        assert!(denoise_dictionary(&x, &too_big, &t).is_err());
    }

    #[test]
    fn trpca_recovers_clean_low_rank() {
        let t = OrthoTransform::dct(4);
        let x = low_rank((20, 20, 4), 2, &t, 17);
        let cfg = SolverConfig {
            dict_mode: DictMode::Trpca(None),
            ..SolverConfig::default()
        };
        let l = denoise_dictionary(&x, &cfg, &t).unwrap();
        assert!(l.relative_error(&x) <= 1e-4, "{}", l.relative_error(&x));
    }
}

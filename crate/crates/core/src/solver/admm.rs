//! ADMM for the projected bilateral model
//!
//! ```text
//! min  ||J||_TTNN + ||T||_TTNN + lambda sum|E|^{1/2} + beta ||N||_F^2
//! s.t. X = A ◇ Z_bar + L_bar ◇ B + E + N,   Z_bar = J,   L_bar = T
//! ```
//!
//! with multipliers `P`, `G`, `W`. One sweep updates `J`, `Z_bar`, `T`,
//! `L_bar`, `N`, `E` in that order, then the multipliers and the penalty.
//! The auxiliary tensor `T` is called `t_aux` to keep it apart from the
//! transform.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::algebra::domain_slices;
use crate::error::{Error, Result};
use crate::prox::{frobenius_shrink, half_threshold, svt_transform};
use crate::tensor::Tensor3;
use crate::transform::OrthoTransform;
use crate::tsvd::ttnn;

use super::config::SolverConfig;
use super::dictionary::{build_dictionary, denoise_dictionary, Dictionary};

/// All primal iterates, multipliers and the penalty of one ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `r x n2 x n3`.
    pub j: Tensor3,
    /// `r x n2 x n3`.
    pub z_bar: Tensor3,
    /// `n1 x r x n3`.
    pub t_aux: Tensor3,
    /// `n1 x r x n3`.
    pub l_bar: Tensor3,
    /// `n1 x n2 x n3`.
    pub n: Tensor3,
    /// `n1 x n2 x n3`.
    pub e: Tensor3,
    pub p: Tensor3,
    pub g: Tensor3,
    pub w: Tensor3,
    pub mu: f64,
    pub iter: usize,
    /// `[||Z_bar - J||_inf, ||L_bar - T||_inf, ||X - A◇Z_bar - L_bar◇B - E - N||_inf]`
    /// after every iteration.
    pub residuals: Vec<[f64; 3]>,
}

impl SolverState {
    /// All-zero iterates and multipliers.
    pub fn zeros(x_dims: (usize, usize, usize), r: usize, mu: f64) -> Self {
        let (n1, n2, n3) = x_dims;
        let coef = (r, n2, n3);
        let feat = (n1, r, n3);
        Self {
            j: Tensor3::zeros(coef),
            z_bar: Tensor3::zeros(coef),
            t_aux: Tensor3::zeros(feat),
            l_bar: Tensor3::zeros(feat),
            n: Tensor3::zeros(x_dims),
            e: Tensor3::zeros(x_dims),
            p: Tensor3::zeros(x_dims),
            g: Tensor3::zeros(coef),
            w: Tensor3::zeros(feat),
            mu,
            iter: 0,
            residuals: Vec::new(),
        }
    }

    /// Checks that every iterate has the shape implied by `x_dims` and `r`.
    pub fn check_dims(&self, x_dims: (usize, usize, usize), r: usize) -> Result<()> {
        let (n1, n2, n3) = x_dims;
        let coef = (r, n2, n3);
        let feat = (n1, r, n3);
        let expected = [
            ("j", &self.j, coef),
            ("z_bar", &self.z_bar, coef),
            ("g", &self.g, coef),
            ("t_aux", &self.t_aux, feat),
            ("l_bar", &self.l_bar, feat),
            ("w", &self.w, feat),
            ("n", &self.n, x_dims),
            ("e", &self.e, x_dims),
            ("p", &self.p, x_dims),
        ];
        for (name, t, dims) in expected {
            if t.dims() != dims {
                return Err(Error::Dimension(format!(
                    "iterate {name} is {:?}, expected {dims:?}",
                    t.dims()
                )));
            }
        }
        Ok(())
    }
}

/// One of the six primal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    J,
    ZBar,
    TAux,
    LBar,
    N,
    E,
}

impl Block {
    pub const SWEEP: [Block; 6] = [Block::J, Block::ZBar, Block::TAux, Block::LBar, Block::N, Block::E];

    pub fn name(self) -> &'static str {
        match self {
            Block::J => "J",
            Block::ZBar => "Z_bar",
            Block::TAux => "T_aux",
            Block::LBar => "L_bar",
            Block::N => "N",
            Block::E => "E",
        }
    }

    pub fn get(self, s: &SolverState) -> &Tensor3 {
        match self {
            Block::J => &s.j,
            Block::ZBar => &s.z_bar,
            Block::TAux => &s.t_aux,
            Block::LBar => &s.l_bar,
            Block::N => &s.n,
            Block::E => &s.e,
        }
    }

    pub fn get_mut(self, s: &mut SolverState) -> &mut Tensor3 {
        match self {
            Block::J => &mut s.j,
            Block::ZBar => &mut s.z_bar,
            Block::TAux => &mut s.t_aux,
            Block::LBar => &mut s.l_bar,
            Block::N => &mut s.n,
            Block::E => &mut s.e,
        }
    }
}

/// The data, dictionary and weights that stay fixed during a run, with the
/// per-slice Cholesky factors of `I + A_k' A_k` and `I + B_k B_k'` cached.
#[derive(Debug, Clone)]
pub struct Problem {
    x: Tensor3,
    dict: Dictionary,
    transform: OrthoTransform,
    lambda: f64,
    beta: f64,
    a_bar: Vec<DMatrix<f64>>,
    b_bar: Vec<DMatrix<f64>>,
    chol_a: Vec<Cholesky<f64, Dyn>>,
    chol_b: Vec<Cholesky<f64, Dyn>>,
}

impl Problem {
    pub fn new(x: Tensor3, dict: Dictionary, transform: OrthoTransform, lambda: f64, beta: f64) -> Result<Self> {
        let (n1, n2, n3) = x.dims();
        let r = dict.r;
        if dict.a.dims() != (n1, r, n3) || dict.b.dims() != (r, n2, n3) || dict.v.dims() != (n2, r, n3) {
            return Err(Error::Dimension(format!(
                "dictionary factors {:?}/{:?}/{:?} do not fit data {:?} at rank {r}",
                dict.a.dims(),
                dict.b.dims(),
                dict.v.dims(),
                x.dims()
            )));
        }
        if transform.n3() != n3 {
            return Err(Error::Dimension("transform size does not match n3".into()));
        }
        let a_bar = domain_slices(&transform, &dict.a)?;
        let b_bar = domain_slices(&transform, &dict.b)?;
        let eye = DMatrix::<f64>::identity(r, r);
        let chol_a = a_bar
            .iter()
            .enumerate()
            .map(|(k, a)| Cholesky::new(&eye + a.transpose() * a).ok_or(Error::SolveFailed(k)))
            .collect::<Result<Vec<_>>>()?;
        let chol_b = b_bar
            .iter()
            .enumerate()
            .map(|(k, b)| Cholesky::new(&eye + b * b.transpose()).ok_or(Error::SolveFailed(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x,
            dict,
            transform,
            lambda,
            beta,
            a_bar,
            b_bar,
            chol_a,
            chol_b,
        })
    }

    pub fn x(&self) -> &Tensor3 {
        &self.x
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn transform(&self) -> &OrthoTransform {
        &self.transform
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn n3(&self) -> f64 {
        self.x.dims().2 as f64
    }

    /// `A ◇ z_bar`.
    pub fn a_times(&self, z_bar: &Tensor3) -> Result<Tensor3> {
        let z = domain_slices(&self.transform, z_bar)?;
        let prod: Vec<_> = self.a_bar.iter().zip(&z).map(|(a, z)| a * z).collect();
        self.transform.inverse(&Tensor3::from_slices(&prod)?)
    }

    /// `l_bar ◇ B`.
    pub fn times_b(&self, l_bar: &Tensor3) -> Result<Tensor3> {
        let l = domain_slices(&self.transform, l_bar)?;
        let prod: Vec<_> = l.iter().zip(&self.b_bar).map(|(l, b)| l * b).collect();
        self.transform.inverse(&Tensor3::from_slices(&prod)?)
    }

    /// `X - A◇Z_bar - L_bar◇B - E - N` at the given iterates.
    pub fn primal_residual(&self, s: &SolverState) -> Result<Tensor3> {
        let mut r = &self.x - &self.a_times(&s.z_bar)?;
        r -= &self.times_b(&s.l_bar)?;
        r -= &s.e;
        r -= &s.n;
        Ok(r)
    }

    /// `J = prox of ||.||_TTNN at Z_bar + G/mu`, i.e. transform-domain SVT at
    /// threshold `1 / (n3 mu)`.
    pub fn update_j(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut y = s.z_bar.clone();
        y.axpy(1.0 / mu, &s.g);
        svt_transform(&y, &self.transform, 1.0 / (self.n3() * mu))
    }

    /// Solves `(I + A_k' A_k) Z_k = A_k' (C1_k + P_k/mu) + J_k - G_k/mu` per
    /// transform-domain slice, with `C1 = X - L_bar◇B - E - N`.
    pub fn update_z_bar(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut c1 = &self.x - &self.times_b(&s.l_bar)?;
        c1 -= &s.e;
        c1 -= &s.n;
        c1.axpy(1.0 / mu, &s.p);
        let mut jg = s.j.clone();
        jg.axpy(-1.0 / mu, &s.g);

        let c = domain_slices(&self.transform, &c1)?;
        let jg = domain_slices(&self.transform, &jg)?;
        let out: Vec<_> = (0..self.a_bar.len())
            .map(|k| {
                let rhs = self.a_bar[k].transpose() * &c[k] + &jg[k];
                self.chol_a[k].solve(&rhs)
            })
            .collect();
        self.transform.inverse(&Tensor3::from_slices(&out)?)
    }

    /// SVT of `L_bar + W/mu` at threshold `1 / (n3 mu)`.
    pub fn update_t_aux(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut y = s.l_bar.clone();
        y.axpy(1.0 / mu, &s.w);
        svt_transform(&y, &self.transform, 1.0 / (self.n3() * mu))
    }

    /// Solves `L_k (I + B_k B_k') = (C2_k + P_k/mu) B_k' + T_k - W_k/mu` per
    /// transform-domain slice, with `C2 = X - A◇Z_bar - E - N`.
    pub fn update_l_bar(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut c2 = &self.x - &self.a_times(&s.z_bar)?;
        c2 -= &s.e;
        c2 -= &s.n;
        c2.axpy(1.0 / mu, &s.p);
        let mut tw = s.t_aux.clone();
        tw.axpy(-1.0 / mu, &s.w);

        let c = domain_slices(&self.transform, &c2)?;
        let tw = domain_slices(&self.transform, &tw)?;
        let out: Vec<_> = (0..self.b_bar.len())
            .map(|k| {
                let rhs = &c[k] * self.b_bar[k].transpose() + &tw[k];
                // L M = R with M symmetric  <=>  M L' = R'.
                self.chol_b[k].solve(&rhs.transpose()).transpose()
            })
            .collect();
        self.transform.inverse(&Tensor3::from_slices(&out)?)
    }

    /// `(P + mu C3) / (2 beta + mu)` with `C3 = X - A◇Z_bar - L_bar◇B - E`.
    pub fn update_n(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut c3 = &self.x - &self.a_times(&s.z_bar)?;
        c3 -= &self.times_b(&s.l_bar)?;
        c3 -= &s.e;
        frobenius_shrink(&c3, &s.p, mu, self.beta)
    }

    /// Half-thresholding of `C4 + P/mu` at `lambda / mu`, with
    /// `C4 = X - A◇Z_bar - L_bar◇B - N`.
    pub fn update_e(&self, s: &SolverState, mu: f64) -> Result<Tensor3> {
        let mut y = &self.x - &self.a_times(&s.z_bar)?;
        y -= &self.times_b(&s.l_bar)?;
        y -= &s.n;
        y.axpy(1.0 / mu, &s.p);
        half_threshold(&y, self.lambda / mu)
    }

    /// Computes the update of `block` from the other iterates in `s`.
    pub fn update_block(&self, block: Block, s: &SolverState, mu: f64) -> Result<Tensor3> {
        match block {
            Block::J => self.update_j(s, mu),
            Block::ZBar => self.update_z_bar(s, mu),
            Block::TAux => self.update_t_aux(s, mu),
            Block::LBar => self.update_l_bar(s, mu),
            Block::N => self.update_n(s, mu),
            Block::E => self.update_e(s, mu),
        }
    }

    /// Dual ascent on `P`, `G`, `W` and the penalty increase
    /// `mu_next = min(rho mu, mu_max)`.
    pub fn update_multipliers(
        &self,
        s: &SolverState,
        mu: f64,
        rho: f64,
        mu_max: f64,
    ) -> Result<(Tensor3, Tensor3, Tensor3, f64)> {
        let mut p = s.p.clone();
        p.axpy(mu, &self.primal_residual(s)?);
        let mut g = s.g.clone();
        g.axpy(mu, &(&s.z_bar - &s.j));
        let mut w = s.w.clone();
        w.axpy(mu, &(&s.l_bar - &s.t_aux));
        Ok((p, g, w, (rho * mu).min(mu_max)))
    }

    /// The three infinity-norm residuals and whether all are below `eps`.
    pub fn check_convergence(&self, s: &SolverState, eps: f64) -> Result<(bool, [f64; 3])> {
        let res = [
            s.z_bar.max_abs_diff(&s.j),
            s.l_bar.max_abs_diff(&s.t_aux),
            self.primal_residual(s)?.max_abs(),
        ];
        Ok((res.iter().all(|&v| v < eps), res))
    }

    /// `||Z_bar||_TTNN + ||L_bar||_TTNN + lambda sum|E|^{1/2} + beta ||N||_F^2`.
    pub fn objective(&self, s: &SolverState) -> Result<f64> {
        let t = &self.transform;
        Ok(ttnn(&s.z_bar, t)? + ttnn(&s.l_bar, t)? + self.lambda * half_norm_sum(&s.e)
            + self.beta * s.n.frobenius().powi(2))
    }

    /// Augmented Lagrangian at the iterates and multipliers of `s` with penalty `mu`.
    pub fn augmented_lagrangian(&self, s: &SolverState, mu: f64) -> Result<f64> {
        let t = &self.transform;
        let resid = self.primal_residual(s)?;
        let dz = &s.z_bar - &s.j;
        let dl = &s.l_bar - &s.t_aux;
        Ok(ttnn(&s.j, t)? + ttnn(&s.t_aux, t)?
            + self.lambda * half_norm_sum(&s.e)
            + self.beta * s.n.frobenius().powi(2)
            + s.p.inner(&resid)
            + 0.5 * mu * resid.frobenius().powi(2)
            + s.g.inner(&dz)
            + 0.5 * mu * dz.frobenius().powi(2)
            + s.w.inner(&dl)
            + 0.5 * mu * dl.frobenius().powi(2))
    }

    /// Recovers the full coefficient tensor `Z = V ◇ Z_bar`.
    pub fn recover_z(&self, z_bar: &Tensor3) -> Result<Tensor3> {
        crate::algebra::t_product(&self.dict.v, z_bar, &self.transform)
    }
}

/// `sum |e|^{1/2}`: the separable penalty minimized by half-thresholding.
pub fn half_norm_sum(e: &Tensor3) -> f64 {
    e.as_slice().iter().map(|v| v.abs().sqrt()).sum()
}

/// Outcome of [`solve`].
#[derive(Debug, Clone)]
pub struct SolverReport {
    /// `n2 x n2 x n3` coefficient tensor.
    pub z: Tensor3,
    pub e: Tensor3,
    pub n: Tensor3,
    pub iterations: usize,
    pub converged: bool,
    pub final_residuals: [f64; 3],
    /// Objective after every iteration.
    pub objective_history: Vec<f64>,
    /// Residuals after every iteration.
    pub residual_history: Vec<[f64; 3]>,
    /// Penalty used in every iteration.
    pub mu_history: Vec<f64>,
    /// Augmented Lagrangian after each primal sweep, before dual ascent.
    pub lagrangian_history: Vec<f64>,
    /// Augmented Lagrangian at the start of each sweep, with the same
    /// penalty and multipliers as the matching `lagrangian_history` entry.
    pub lagrangian_pre_sweep: Vec<f64>,
    pub transform: OrthoTransform,
    /// Dictionary rank.
    pub rank: usize,
    pub runtime_seconds: f64,
}

/// Runs the whole solver on `x`: transform, dictionary, ADMM, recovery.
pub fn solve(x: &Tensor3, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let t = OrthoTransform::for_data(cfg.transform_kind, x)?;
    solve_with_transform(x, cfg, t)
}

/// As [`solve`] with a caller-supplied transform.
pub fn solve_with_transform(x: &Tensor3, cfg: &SolverConfig, t: OrthoTransform) -> Result<SolverReport> {
    cfg.validate()?;
    if x.max_abs() == 0.0 {
        return Err(Error::Degenerate("input tensor is all zero".into()));
    }
    let start = Instant::now();
    let x_tilde = denoise_dictionary(x, cfg, &t)?;
    let dict = build_dictionary(&x_tilde, &t)?;
    let problem = Problem::new(x.clone(), dict, t, cfg.lambda, cfg.beta)?;
    let mut state = SolverState::zeros(x.dims(), problem.dict.r, cfg.mu0);
    let mut report = run_admm(&problem, &mut state, cfg)?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Iterates from `state` until convergence or `cfg.max_iters` sweeps.
pub fn run_admm(problem: &Problem, state: &mut SolverState, cfg: &SolverConfig) -> Result<SolverReport> {
    let x_dims = problem.x.dims();
    let r = problem.dict.r;
    let mut objective_history = Vec::new();
    let mut mu_history = Vec::new();
    let mut lagrangian_history = Vec::new();
    let mut lagrangian_pre_sweep = Vec::new();
    // A run that performs no sweep reports the starting residuals, unconverged.
    let mut converged = false;
    let (_, mut last) = problem.check_convergence(state, cfg.eps)?;

    while state.iter < cfg.max_iters {
        let mu = state.mu;
        let iteration = state.iter + 1;
        lagrangian_pre_sweep.push(problem.augmented_lagrangian(state, mu)?);
        for block in Block::SWEEP {
            let next = problem.update_block(block, state, mu)?;
            if !next.is_finite() {
                return Err(Error::Diverged {
                    variable: block.name(),
                    iteration,
                });
            }
            *block.get_mut(state) = next;
        }
        lagrangian_history.push(problem.augmented_lagrangian(state, mu)?);

        let (p, g, w, mu_next) = problem.update_multipliers(state, mu, cfg.rho, cfg.mu_max)?;
        if !(p.is_finite() && g.is_finite() && w.is_finite()) {
            return Err(Error::Diverged {
                variable: "multipliers",
                iteration,
            });
        }
        state.p = p;
        state.g = g;
        state.w = w;
        state.mu = mu_next;
        state.iter = iteration;
        debug_assert!(state.check_dims(x_dims, r).is_ok());

        let (done, res) = problem.check_convergence(state, cfg.eps)?;
        state.residuals.push(res);
        mu_history.push(mu);
        objective_history.push(problem.objective(state)?);
        last = res;
        if done {
            converged = true;
            break;
        }
    }
    state.check_dims(x_dims, r)?;

    Ok(SolverReport {
        z: problem.recover_z(&state.z_bar)?,
        e: state.e.clone(),
        n: state.n.clone(),
        iterations: state.iter,
        converged,
        final_residuals: last,
        objective_history,
        residual_history: state.residuals.clone(),
        mu_history,
        lagrangian_history,
        lagrangian_pre_sweep,
        transform: problem.transform.clone(),
        rank: r,
        runtime_seconds: 0.0,
    })
}

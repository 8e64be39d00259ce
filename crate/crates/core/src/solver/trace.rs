//! Per-iteration solver trace as CSV.
//!
//! ```text
//! # tbtlrr-trace v1
//! # lambda=1e0 beta=1e1 mu0=1e-7 mu_max=1e7 rho=1.5e0 eps=1e-7 max_iters=500 dict=self transform=learned seed=0
//! # rank=12 iterations=87 converged=true
//! iter,mu,res_z_j,res_l_t,res_primal,objective
//! 1,1e-7,...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::io::write_atomic;

use super::admm::SolverReport;
use super::config::SolverConfig;

pub const TRACE_VERSION: u32 = 1;

pub fn format_trace(cfg: &SolverConfig, report: &SolverReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tbtlrr-trace v{TRACE_VERSION}");
    let _ = writeln!(
        out,
        "# lambda={:e} beta={:e} mu0={:e} mu_max={:e} rho={:e} eps={:e} max_iters={} dict={} transform={} seed={}",
        cfg.lambda,
        cfg.beta,
        cfg.mu0,
        cfg.mu_max,
        cfg.rho,
        cfg.eps,
        cfg.max_iters,
        cfg.dict_mode,
        cfg.transform_kind,
        cfg.seed
    );
    let _ = writeln!(
        out,
        "# rank={} iterations={} converged={}",
        report.rank, report.iterations, report.converged
    );
    out.push_str("iter,mu,res_z_j,res_l_t,res_primal,objective\n");
    for (i, ((res, mu), obj)) in report
        .residual_history
        .iter()
        .zip(&report.mu_history)
        .zip(&report.objective_history)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            i + 1,
            mu,
            res[0],
            res[1],
            res[2],
            obj
        );
    }
    out
}

pub fn write_trace(path: impl AsRef<Path>, cfg: &SolverConfig, report: &SolverReport) -> Result<()> {
    write_atomic(path.as_ref(), format_trace(cfg, report).as_bytes())
}

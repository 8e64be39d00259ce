//! Parameter grids and noise sweeps built from repeated pipeline runs.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::io::write_atomic;

use super::experiment::{load_dataset, ExperimentSpec, NoiseKind, NoiseSchedule};
use super::pipeline::{run_on_dataset, ResultRow, Variant};

pub const GRID_FILE: &str = "grid.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Decade-spaced values `1e-5, 1e-4, ..., 1e3`.
pub fn default_grid() -> Vec<f64> {
    (-5..=3).map(|e| 10f64.powi(e)).collect()
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub lambda: f64,
    pub beta: f64,
    /// Both variants on success, the error message on failure.
    pub outcome: std::result::Result<Vec<ResultRow>, String>,
}

impl GridPoint {
    /// The row used for ranking.
    pub fn ranked_row(&self) -> Option<&ResultRow> {
        self.outcome
            .as_ref()
            .ok()
            .and_then(|rows| rows.iter().find(|r| r.variant == Variant::Weighted))
    }
}

/// Grid points sorted best first.
#[derive(Debug, Clone)]
pub struct GridTable {
    pub points: Vec<GridPoint>,
    pub path: PathBuf,
}

impl GridTable {
    /// Best successful point.
    pub fn best(&self) -> Option<&GridPoint> {
        self.points.first().filter(|p| p.outcome.is_ok())
    }
}

fn error_chain(e: &dyn std::error::Error) -> String {
    let mut msg = e.to_string();
    let mut cause = e.source();
    while let Some(c) = cause {
        msg.push_str(": ");
        msg.push_str(&c.to_string());
        cause = c.source();
    }
    msg
}

fn point_dir(lambda: f64, beta: f64) -> String {
    format!("lambda_{lambda:e}_beta_{beta:e}")
}

/// Runs every `(lambda, beta)` pair on the same data and ranks the points by
/// weighted-affinity `acc_mean`, then `nmi_mean`. Ties keep grid order; failed
/// points are kept, ranked last.
pub fn grid_search(spec: &ExperimentSpec, lambdas: &[f64], betas: &[f64]) -> Result<GridTable> {
    if lambdas.is_empty() || betas.is_empty() {
        return Err(Error::InvalidArgument("grids must be non-empty".into()));
    }
    let data = load_dataset(spec)?;
    let root = spec.out_dir.join("grid");
    let mut points = Vec::with_capacity(lambdas.len() * betas.len());
    for &lambda in lambdas {
        for &beta in betas {
            let mut point_spec = spec.clone();
            point_spec.solver.lambda = lambda;
            point_spec.solver.beta = beta;
            let dir = root.join(point_dir(lambda, beta));
            let outcome = point_spec
                .validate()
                .and_then(|_| run_on_dataset(&point_spec, &data, &dir))
                .map(|o| o.rows)
                .map_err(|e| error_chain(&e));
            points.push(GridPoint {
                lambda,
                beta,
                outcome,
            });
        }
    }
    points.sort_by(|a, b| match (a.ranked_row(), b.ranked_row()) {
        (Some(x), Some(y)) => y
            .acc_mean
            .total_cmp(&x.acc_mean)
            .then(y.nmi_mean.total_cmp(&x.nmi_mean)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    let path = spec.out_dir.join(GRID_FILE);
    write_atomic(&path, format_grid(&points).as_bytes())?;
    Ok(GridTable { points, path })
}

fn format_grid(points: &[GridPoint]) -> String {
    let mut out = String::from("# tbtlrr-grid v1\n");
    out.push_str("rank,lambda,beta,status,acc_mean,acc_std,nmi_mean,nmi_std,iterations,runtime_seconds\n");
    for (i, p) in points.iter().enumerate() {
        let rank = i + 1;
        match (&p.outcome, p.ranked_row()) {
            (Ok(_), Some(r)) => {
                let _ = writeln!(
                    out,
                    "{rank},{:e},{:e},ok,{},{},{},{},{},{:.6}",
                    p.lambda, p.beta, r.acc_mean, r.acc_std, r.nmi_mean, r.nmi_std, r.iterations, r.runtime_seconds
                );
            }
            (outcome, _) => {
                let msg = outcome.as_ref().err().map_or("no weighted row", String::as_str);
                let _ = writeln!(
                    out,
                    "{rank},{:e},{:e},\"error: {}\",,,,,,",
                    p.lambda,
                    p.beta,
                    msg.replace('"', "'")
                );
            }
        }
    }
    out
}

/// One sweep level with both variants.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub level: f64,
    pub average: ResultRow,
    pub weighted: ResultRow,
}

/// Runs the pipeline once per noise level of `kind`, injected on top of the
/// data of `spec`.
pub fn noise_sweep(spec: &ExperimentSpec, kind: NoiseKind, levels: &[f64]) -> Result<Vec<SweepRow>> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no noise levels given".into()));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut level_spec = spec.clone();
        level_spec.noise = NoiseSchedule {
            kind,
            levels: vec![level],
        };
        let data = load_dataset(&level_spec)?;
        let dir = spec.out_dir.join("sweep").join(format!("{kind}_{level:e}"));
        let out = run_on_dataset(&level_spec, &data, &dir)?;
        rows.push(SweepRow {
            level,
            average: out.row(Variant::Average).clone(),
            weighted: out.row(Variant::Weighted).clone(),
        });
    }
    fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    write_atomic(
        &spec.out_dir.join(SWEEP_FILE),
        format_sweep(kind, &rows).as_bytes(),
    )?;
    Ok(rows)
}

fn format_sweep(kind: NoiseKind, rows: &[SweepRow]) -> String {
    let mut out = String::from("# tbtlrr-sweep v1\n");
    out.push_str(
        "noise_type,level,acc_mean_average,acc_std_average,nmi_mean_average,nmi_std_average,\
         acc_mean_weighted,acc_std_weighted,nmi_mean_weighted,nmi_std_weighted,iterations\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{kind},{:e},{},{},{},{},{},{},{},{},{}",
            r.level,
            r.average.acc_mean,
            r.average.acc_std,
            r.average.nmi_mean,
            r.average.nmi_std,
            r.weighted.acc_mean,
            r.weighted.acc_std,
            r.weighted.nmi_mean,
            r.weighted.nmi_std,
            r.weighted.iterations
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decade_grid() {
        let g = default_grid();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[8], 1e3);
    }
}

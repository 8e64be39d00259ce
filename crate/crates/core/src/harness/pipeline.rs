//! One end-to-end run: solve, fuse, cluster, score, report.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::cluster::{
    affinity_average, affinity_weighted, diag_ratio_weights, spectral_clustering, AffinityMatrix, ClusterResult,
    SliceWeights, DEFAULT_EPS_GUARD,
};
use crate::error::{Error, Result};
use crate::io::{write_atomic, write_labels, write_t3b};
use crate::solver::{solve, write_trace};

use super::experiment::{load_dataset, Dataset, ExperimentSpec};

pub const RESULTS_VERSION: u32 = 1;
pub const RESULTS_COLUMNS: &str =
    "variant,lambda,beta,noise_level,acc_mean,acc_std,nmi_mean,nmi_std,iterations,runtime_seconds";
pub const RESULTS_FILE: &str = "results.csv";
pub const TRACE_FILE: &str = "trace.csv";

/// Affinity fusion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Average,
    Weighted,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Average, Variant::Weighted];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Average => "average",
            Variant::Weighted => "weighted",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Variant::Average),
            "weighted" => Ok(Variant::Weighted),
            other => Err(Error::Format(format!("unknown variant `{other}`"))),
        }
    }
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub variant: Variant,
    pub lambda: f64,
    pub beta: f64,
    pub noise_level: f64,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub iterations: usize,
    pub runtime_seconds: f64,
}

impl ResultRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{},{},{},{},{:.6}",
            self.variant,
            self.lambda,
            self.beta,
            self.noise_level,
            self.acc_mean,
            self.acc_std,
            self.nmi_mean,
            self.nmi_std,
            self.iterations,
            self.runtime_seconds
        )
    }

    fn parse_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Format(format!("results row has {} fields: `{line}`", f.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse()
                .map_err(|_| Error::Format(format!("bad number `{}` in results row", f[i])))
        };
        Ok(Self {
            variant: f[0].parse()?,
            lambda: num(1)?,
            beta: num(2)?,
            noise_level: num(3)?,
            acc_mean: num(4)?,
            acc_std: num(5)?,
            nmi_mean: num(6)?,
            nmi_std: num(7)?,
            iterations: f[8]
                .parse()
                .map_err(|_| Error::Format(format!("bad iteration count `{}`", f[8])))?,
            runtime_seconds: num(9)?,
        })
    }
}

/// Results CSV text: version comment, source comment, column header, rows.
pub fn format_results(source: &str, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tbtlrr-results v{RESULTS_VERSION}");
    let _ = writeln!(out, "# {source}");
    out.push_str(RESULTS_COLUMNS);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Parses the rows of a results CSV, skipping comments and the header.
pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h == RESULTS_COLUMNS => {}
        other => {
            return Err(Error::Format(format!(
                "expected results header, found {other:?}"
            )))
        }
    }
    lines.map(ResultRow::parse_line).collect()
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub rows: Vec<ResultRow>,
    pub average: ClusterResult,
    pub weighted: ClusterResult,
    pub weights: SliceWeights,
    pub iterations: usize,
    pub converged: bool,
    pub final_residuals: [f64; 3],
    pub results_path: PathBuf,
    pub trace_path: PathBuf,
}

impl PipelineOutcome {
    pub fn row(&self, variant: Variant) -> &ResultRow {
        self.rows
            .iter()
            .find(|r| r.variant == variant)
            .expect("both variants are always reported")
    }

    pub fn cluster(&self, variant: Variant) -> &ClusterResult {
        match variant {
            Variant::Average => &self.average,
            Variant::Weighted => &self.weighted,
        }
    }
}

/// Loads the data described by `spec` and runs it end to end.
pub fn run_pipeline(spec: &ExperimentSpec) -> Result<PipelineOutcome> {
    let data = load_dataset(spec)?;
    run_on_dataset(spec, &data, &spec.out_dir)
}

/// Runs already loaded data, writing every output file under `out_dir`.
pub fn run_on_dataset(spec: &ExperimentSpec, data: &Dataset, out_dir: &Path) -> Result<PipelineOutcome> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let report = solve(&data.x, &spec.solver)?;
    let trace_path = out_dir.join(TRACE_FILE);
    write_trace(&trace_path, &spec.solver, &report)?;

    let weights = diag_ratio_weights(&report.z, DEFAULT_EPS_GUARD)?;
    let fused: [(Variant, AffinityMatrix); 2] = [
        (Variant::Average, affinity_average(&report.z)?),
        (Variant::Weighted, affinity_weighted(&report.z, &weights)?),
    ];

    let mut rows = Vec::with_capacity(2);
    let mut results = Vec::with_capacity(2);
    for (variant, w) in &fused {
        let start = Instant::now();
        let clusters = spectral_clustering(w, data.k, spec.restarts, spec.seed)?;
        let scored = clusters.evaluate(&data.truth)?;
        let elapsed = start.elapsed().as_secs_f64();
        write_labels(out_dir.join(format!("labels_{variant}.csv")), &scored.labels)?;
        if spec.dump_tensors {
            write_t3b(out_dir.join(format!("affinity_{variant}.t3b")), &w.to_tensor())?;
        }
        rows.push(ResultRow {
            variant: *variant,
            lambda: spec.solver.lambda,
            beta: spec.solver.beta,
            noise_level: spec.noise_level(),
            acc_mean: scored.acc_mean,
            acc_std: scored.acc_std,
            nmi_mean: scored.nmi_mean,
            nmi_std: scored.nmi_std,
            iterations: report.iterations,
            runtime_seconds: report.runtime_seconds + elapsed,
        });
        results.push(scored);
    }
    write_labels(out_dir.join("labels_true.csv"), &data.truth)?;
    if spec.dump_tensors {
        write_t3b(out_dir.join("z.t3b"), &report.z)?;
        write_t3b(out_dir.join("e.t3b"), &report.e)?;
        write_t3b(out_dir.join("n.t3b"), &report.n)?;
    }
    let results_path = out_dir.join(RESULTS_FILE);
    write_atomic(
        &results_path,
        format_results(&spec.describe_source(), &rows).as_bytes(),
    )?;

    let weighted = results.pop().expect("two variants");
    let average = results.pop().expect("two variants");
    Ok(PipelineOutcome {
        rows,
        average,
        weighted,
        weights,
        iterations: report.iterations,
        converged: report.converged,
        final_residuals: report.final_residuals,
        results_path,
        trace_path,
    })
}

/// Results CSV text with the wall-clock column blanked, for comparing runs.
pub fn mask_runtime(text: &str) -> String {
    text.lines()
        .map(|l| {
            if l.starts_with('#') || l == RESULTS_COLUMNS {
                l.to_string()
            } else {
                match l.rfind(',') {
                    Some(i) => format!("{},-", &l[..i]),
                    None => l.to_string(),
                }
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: Variant) -> ResultRow {
        ResultRow {
            variant,
            lambda: 1.0,
            beta: 10.0,
            noise_level: 0.1,
            acc_mean: 0.9875,
            acc_std: 0.0125,
            nmi_mean: 1.0,
            nmi_std: 0.0,
            iterations: 61,
            runtime_seconds: 0.25,
        }
    }

    #[test]
    fn results_roundtrip() {
        let rows = vec![row(Variant::Average), row(Variant::Weighted)];
        let text = format_results("synthetic", &rows);
        assert!(text.starts_with("# tbtlrr-results v1\n# synthetic\n"));
        assert_eq!(parse_results(&text).unwrap(), rows);
        assert!(parse_results("a,b\n").is_err());
    }

    #[test]
    fn masking_ignores_only_runtime() {
        let mut a = row(Variant::Weighted);
        let text_a = format_results("s", &[a.clone()]);
        a.runtime_seconds = 9.0;
        let text_b = format_results("s", &[a.clone()]);
        assert_ne!(text_a, text_b);
        assert_eq!(mask_runtime(&text_a), mask_runtime(&text_b));
        a.acc_mean = 0.5;
        assert_ne!(mask_runtime(&text_a), mask_runtime(&format_results("s", &[a])));
    }
}

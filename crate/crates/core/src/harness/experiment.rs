//! Experiment description and data loading.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cluster::{add_gaussian_noise, add_sparse_noise, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::io::{read_labels, read_t3b};
use crate::solver::SolverConfig;
use crate::tensor::Tensor3;

use super::synthetic::{generate_synthetic, SyntheticParams};

/// Where the data tensor comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// A T3B tensor with a label CSV.
    File { input: PathBuf, labels: PathBuf },
    Synthetic(SyntheticParams),
}

/// Corruption applied by the harness before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Sparse,
    Gaussian,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Sparse => "sparse",
            NoiseKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sparse" => Ok(NoiseKind::Sparse),
            "gaussian" => Ok(NoiseKind::Gaussian),
            other => Err(Error::Config(format!("unknown noise type `{other}`"))),
        }
    }
}

impl NoiseKind {
    pub fn apply(self, x: &Tensor3, level: f64, seed: u64) -> Result<Tensor3> {
        match self {
            NoiseKind::Sparse => add_sparse_noise(x, level, seed),
            NoiseKind::Gaussian => add_gaussian_noise(x, level, seed),
        }
    }
}

/// Noise type with the levels to visit. A single run uses at most one level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub kind: NoiseKind,
    pub levels: Vec<f64>,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            kind: NoiseKind::Sparse,
            levels: Vec::new(),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub solver: SolverConfig,
    /// Number of clusters; defaults to the number of distinct labels.
    pub k: Option<usize>,
    pub restarts: usize,
    /// Seed of the k-means restarts and harness-injected noise.
    pub seed: u64,
    pub noise: NoiseSchedule,
    pub out_dir: PathBuf,
    /// Also write `z.t3b`, `e.t3b`, `n.t3b` and `affinity.t3b`.
    pub dump_tensors: bool,
}

impl ExperimentSpec {
    /// The default synthetic experiment writing into `out_dir`.
    pub fn synthetic(params: SyntheticParams, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source: DataSource::Synthetic(params),
            solver: SolverConfig::default(),
            k: None,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            noise: NoiseSchedule::default(),
            out_dir: out_dir.into(),
            dump_tensors: false,
        }
    }

    pub fn from_files(input: impl Into<PathBuf>, labels: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source: DataSource::File {
                input: input.into(),
                labels: labels.into(),
            },
            ..Self::synthetic(SyntheticParams::default(), out_dir)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if let DataSource::Synthetic(p) = &self.source {
            p.validate()?;
            if let Some(k) = self.k {
                if k != p.k_subspaces {
                    return Err(Error::Config(format!(
                        "k = {k} does not match the {} generated subspaces",
                        p.k_subspaces
                    )));
                }
            }
        }
        if self.noise.levels.len() > 1 {
            return Err(Error::Config(
                "a single run takes at most one noise level; use a sweep for more".into(),
            ));
        }
        for &l in &self.noise.levels {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Config(format!("noise level {l} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// The harness noise level of a single run (0 when none is scheduled).
    pub fn noise_level(&self) -> f64 {
        self.noise.levels.first().copied().unwrap_or(0.0)
    }

    /// One-line description of the data source for report headers.
    pub fn describe_source(&self) -> String {
        match &self.source {
            DataSource::File { input, labels } => {
                format!("file input={} labels={}", input.display(), labels.display())
            }
            DataSource::Synthetic(p) => format!(
                "synthetic k={} m={} n1={} n3={} r={} sparse={:e} gaussian={:e} seed={}",
                p.k_subspaces,
                p.samples_per_cluster,
                p.n1,
                p.n3,
                p.tubal_rank,
                p.sparse_fraction,
                p.gaussian_level,
                p.seed
            ),
        }
    }
}

/// Loaded (and possibly corrupted) data with its ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Tensor3,
    pub truth: Vec<usize>,
    pub k: usize,
}

/// Loads or generates the data, checks the labels and applies the scheduled
/// noise level.
pub fn load_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    spec.validate()?;
    let (x, truth) = match &spec.source {
        DataSource::Synthetic(p) => generate_synthetic(p)?,
        DataSource::File { input, labels } => (read_t3b(input)?, read_labels(labels)?),
    };
    let n2 = x.dims().1;
    if truth.len() != n2 {
        return Err(Error::Dimension(format!(
            "{} labels for {n2} samples",
            truth.len()
        )));
    }
    let distinct = truth.iter().collect::<BTreeSet<_>>().len();
    let k = spec.k.unwrap_or(distinct);
    if k != distinct {
        return Err(Error::Config(format!(
            "k = {k} does not match the {distinct} distinct labels"
        )));
    }
    if k < 2 || k > n2 {
        return Err(Error::Config(format!("k = {k} must lie in [2, {n2}]")));
    }
    let x = match spec.noise.levels.first() {
        Some(&level) if level > 0.0 => spec.noise.kind.apply(&x, level, spec.seed)?,
        _ => x,
    };
    Ok(Dataset { x, truth, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_kind_parsing() {
        assert_eq!("Sparse".parse::<NoiseKind>().unwrap(), NoiseKind::Sparse);
        assert_eq!(NoiseKind::Gaussian.to_string(), "gaussian");
        assert!("salt".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn validation() {
        let mut spec = ExperimentSpec::synthetic(SyntheticParams::default(), "out");
        spec.validate().unwrap();
        spec.k = Some(3);
        assert!(spec.validate().is_err());
        spec.k = None;
        spec.noise.levels = vec![0.1, 0.2];
        assert!(spec.validate().is_err());
        spec.noise.levels = vec![1.5];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn synthetic_dataset_with_injected_noise() {
        let mut spec = ExperimentSpec::synthetic(SyntheticParams::default(), "out");
        let clean = load_dataset(&spec).unwrap();
        assert_eq!(clean.k, 4);
        spec.noise.levels = vec![0.1];
        let noisy = load_dataset(&spec).unwrap();
        let diff = clean
            .x
            .as_slice()
            .iter()
            .zip(noisy.x.as_slice())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, clean.x.len() / 10);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let spec = ExperimentSpec::from_files("/nonexistent/x.t3b", "/nonexistent/y.csv", "out");
        assert!(matches!(load_dataset(&spec), Err(Error::Io { .. })));
    }
}

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::transform::TransformKind;

/// How the dictionary `X~` is derived from the observed data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DictMode {
    /// `X~ = X`.
    SelfRepresentation,
    /// Rank-`r` transformed t-SVD reconstruction of `X`.
    TruncatedTtsvd(usize),
    /// Low-rank part of a tensor robust PCA of `X`. `None` selects
    /// `1 / sqrt(max(n1, n2) n3)`.
    Trpca(Option<f64>),
}

impl fmt::Display for DictMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictMode::SelfRepresentation => f.write_str("self"),
            DictMode::TruncatedTtsvd(r) => write!(f, "ttsvd:{r}"),
            DictMode::Trpca(None) => f.write_str("trpca"),
            DictMode::Trpca(Some(l)) => write!(f, "trpca:{l:e}"),
        }
    }
}

impl FromStr for DictMode {
    type Err = Error;

    /// Accepts `self`, `ttsvd:R`, `trpca` and `trpca:L`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.trim())),
            None => (s, None),
        };
        let bad = || Error::Config(format!("bad dictionary mode `{s}`"));
        match (head.to_ascii_lowercase().as_str(), arg) {
            ("self", None) => Ok(DictMode::SelfRepresentation),
            ("ttsvd", Some(r)) => {
                let r: usize = r.parse().map_err(|_| bad())?;
                if r == 0 {
                    return Err(bad());
                }
                Ok(DictMode::TruncatedTtsvd(r))
            }
            ("trpca", None) => Ok(DictMode::Trpca(None)),
            ("trpca", Some(l)) => {
                let l: f64 = l.parse().map_err(|_| bad())?;
                if !(l > 0.0) || !l.is_finite() {
                    return Err(bad());
                }
                Ok(DictMode::Trpca(Some(l)))
            }
            _ => Err(bad()),
        }
    }
}

/// Parameters of the ADMM solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight of the sparse (half-norm) noise term.
    pub lambda: f64,
    /// Weight of the Gaussian (squared Frobenius) noise term.
    pub beta: f64,
    pub mu0: f64,
    pub mu_max: f64,
    /// Penalty growth factor, `> 1`.
    pub rho: f64,
    /// Stopping tolerance on the three residuals.
    pub eps: f64,
    pub max_iters: usize,
    pub dict_mode: DictMode,
    pub transform_kind: TransformKind,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            beta: 10.0,
            mu0: 1e-7,
            mu_max: 1e7,
            rho: 1.5,
            eps: 1e-7,
            max_iters: 500,
            dict_mode: DictMode::SelfRepresentation,
            transform_kind: TransformKind::Learned,
            seed: 0,
        }
    }
}

const KEYS: [&str; 10] = [
    "lambda",
    "beta",
    "mu0",
    "mu_max",
    "rho",
    "eps",
    "max_iters",
    "dict_mode",
    "transform_kind",
    "seed",
];

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("mu0", self.mu0),
            ("mu_max", self.mu_max),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            // eps may be +inf: that only disables the stopping rule.
            if !(v > 0.0) || (v.is_infinite() && name != "eps") {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mu0 > self.mu_max {
            return Err(Error::Config(format!(
                "mu0 ({:e}) exceeds mu_max ({:e})",
                self.mu0, self.mu_max
            )));
        }
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must exceed 1, got {}", self.rho)));
        }
        Ok(())
    }

    /// Parses a flat `key = value` file (TOML syntax, `#` comments). Keys not
    /// present keep their defaults; unknown keys are rejected.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut cfg = SolverConfig::default();
        for (key, value) in &table {
            let num = || -> Result<f64> {
                value
                    .as_float()
                    .or_else(|| value.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::Config(format!("`{key}` must be a number")))
            };
            let int = || -> Result<u64> {
                value
                    .as_integer()
                    .filter(|&i| i >= 0)
                    .map(|i| i as u64)
                    .ok_or_else(|| Error::Config(format!("`{key}` must be a non-negative integer")))
            };
            let text = || -> Result<&str> {
                value
                    .as_str()
                    .ok_or_else(|| Error::Config(format!("`{key}` must be a string")))
            };
            match key.as_str() {
                "lambda" => cfg.lambda = num()?,
                "beta" => cfg.beta = num()?,
                "mu0" => cfg.mu0 = num()?,
                "mu_max" => cfg.mu_max = num()?,
                "rho" => cfg.rho = num()?,
                "eps" => cfg.eps = num()?,
                "max_iters" => cfg.max_iters = int()? as usize,
                "dict_mode" => cfg.dict_mode = text()?.parse()?,
                "transform_kind" => cfg.transform_kind = text()?.parse()?,
                "seed" => cfg.seed = int()?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown key `{other}` (expected one of {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    /// The config as `key = value` lines readable by [`Self::from_kv_str`].
    pub fn to_kv_string(&self) -> String {
        format!(
            "lambda = {:e}\nbeta = {:e}\nmu0 = {:e}\nmu_max = {:e}\nrho = {:e}\neps = {:e}\n\
             max_iters = {}\ndict_mode = \"{}\"\ntransform_kind = \"{}\"\nseed = {}\n",
            self.lambda,
            self.beta,
            self.mu0,
            self.mu_max,
            self.rho,
            self.eps,
            self.max_iters,
            self.dict_mode,
            self.transform_kind,
            self.seed
        )
    }
}

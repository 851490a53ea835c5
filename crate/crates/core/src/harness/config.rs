//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, keys are dotted
//! (`model.ar`, `noise.kind`). Lists are comma separated.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::arma::{check_stability, ArmaParams, DEFAULT_ROOT_MARGIN};
use crate::error::{Error, Result};
use crate::estimator::FitConfig;
use crate::noise::NoiseSpec;
use crate::param_space::ParameterClass;
use crate::theory::{ConstantSet, DEFAULT_RATE_CONSTANT};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::config(format!("line {}: invalid key `{key}`", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::config(format!("`{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    /// Comma-separated list; an empty value is the empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| Error::config(format!("`{key}`: cannot parse `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::config(format!("`{key}`: expected a boolean, got `{v}`"))),
        }
    }

    /// Fails on any key outside `allowed`; entries ending in `.` allow a
    /// whole prefix.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for key in self.keys() {
            let ok = allowed
                .iter()
                .any(|a| if a.ends_with('.') { key.starts_with(a) } else { key == *a });
            if !ok {
                return Err(Error::config(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}

/// `noise.kind` in {uniform, rademacher, truncated_gaussian} with `noise.c`
/// (default 1) and, for the Gaussian, `noise.sigma` (default 1).
pub fn noise_from_kv(kv: &KvConfig) -> Result<NoiseSpec> {
    let c = kv.get_or("noise.c", 1.0)?;
    let spec = match kv.raw("noise.kind").unwrap_or("uniform") {
        "uniform" => NoiseSpec::Uniform { c },
        "rademacher" => NoiseSpec::Rademacher { c },
        "truncated_gaussian" => NoiseSpec::TruncatedGaussian {
            sigma: kv.get_or("noise.sigma", 1.0)?,
            c,
        },
        other => return Err(Error::config(format!("unknown noise.kind `{other}`"))),
    };
    spec.validate().map_err(|e| Error::config(e.to_string()))?;
    Ok(spec)
}

/// `model.ar` and `model.ma` coefficient lists, checked for stability and
/// invertibility.
pub fn arma_from_kv(kv: &KvConfig) -> Result<ArmaParams> {
    let ar: Vec<f64> = kv.list("model.ar")?.unwrap_or_default();
    let ma: Vec<f64> = kv.list("model.ma")?.unwrap_or_default();
    for (key, len) in [("model.p", ar.len()), ("model.q", ma.len())] {
        if let Some(n) = kv.get::<usize>(key)? {
            if n != len {
                return Err(Error::config(format!("{key} = {n} but {len} coefficients given")));
            }
        }
    }
    if ar.is_empty() && ma.is_empty() {
        return Err(Error::config("model.ar and model.ma are both empty"));
    }
    let params = ArmaParams::new(ar, ma);
    let roots = check_stability(&params, DEFAULT_ROOT_MARGIN);
    if !roots.stable || !roots.invertible {
        return Err(Error::config(format!(
            "true parameter fails the root check (AR min |root| {:.4}, MA min |root| {:.4})",
            roots.ar_root_min_modulus, roots.ma_root_min_modulus
        )));
    }
    Ok(params)
}

pub fn fit_config_from_kv(kv: &KvConfig) -> Result<FitConfig> {
    let d = FitConfig::default();
    let cfg = FitConfig {
        n_starts: kv.get_or("fit.n_starts", d.n_starts)?,
        start_net_epsilon: kv.get("fit.start_net_epsilon")?,
        max_iterations: kv.get_or("fit.max_iterations", d.max_iterations)?,
        gradient_tolerance: kv.get_or("fit.gradient_tolerance", d.gradient_tolerance)?,
        levenberg_damping_init: kv.get_or("fit.damping", d.levenberg_damping_init)?,
        truth_start: None,
    };
    cfg.validate().map_err(|e| Error::config(e.to_string()))?;
    Ok(cfg)
}

pub fn class_from_kv(kv: &KvConfig, dimension: usize) -> Result<ParameterClass> {
    let radius = kv.require("class.radius")?;
    ParameterClass::new(dimension, radius).map_err(|e| Error::config(e.to_string()))
}

/// `constants.*` keys for the burn-in report.
pub fn constants_from_kv(kv: &KvConfig) -> Result<ConstantSet> {
    let k = ConstantSet {
        d_theta: kv.require("constants.d_theta")?,
        sigma_w: kv.require("constants.sigma_w")?,
        b_theta: kv.require("constants.b_theta")?,
        l1: kv.require("constants.l1")?,
        l2: kv.require("constants.l2")?,
        l3: kv.require("constants.l3")?,
        a: kv.require("constants.a")?,
        lambda0: kv.require("constants.lambda0")?,
        b1: kv.require("constants.b1")?,
        b2: kv.require("constants.b2")?,
        gamma: kv.get_or("constants.gamma", 0.25)?,
    };
    k.validate().map_err(|e| Error::config(e.to_string()))?;
    Ok(k)
}

/// Settings of the rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub truth: ArmaParams,
    pub noise: NoiseSpec,
    pub class: ParameterClass,
    pub grid: Vec<usize>,
    /// Fitted replicates per horizon.
    pub n_mc: usize,
    /// Held-out trajectories per replicate for the prediction error.
    pub n_eval: usize,
    pub master_seed: u64,
    pub gamma: f64,
    pub bound_c: f64,
    /// Gradient bound for the bound column; estimated when absent.
    pub bound_l1: Option<f64>,
    pub l1_samples: usize,
    pub l1_net_epsilon: f64,
    pub fit: FitConfig,
    /// Uses `θ̂ = θ⋆` instead of fitting.
    pub diagnostic_truth: bool,
}

pub const EXPERIMENT_KEYS: &[&str] = &[
    "model.", "noise.", "class.radius", "experiment.", "bound.", "fit.", "output",
];

impl ExperimentConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.reject_unknown(EXPERIMENT_KEYS)?;
        let truth = arma_from_kv(kv)?;
        let dim = truth.p() + truth.q();
        let cfg = Self {
            noise: noise_from_kv(kv)?,
            class: class_from_kv(kv, dim)?,
            grid: kv.list("experiment.grid")?.ok_or_else(|| Error::config("missing experiment.grid"))?,
            n_mc: kv.get_or("experiment.n_mc", 100)?,
            n_eval: kv.get_or("experiment.n_eval", 4)?,
            master_seed: kv.get_or("experiment.seed", 0)?,
            gamma: kv.get_or("experiment.gamma", 0.25)?,
            bound_c: kv.get_or("bound.c", DEFAULT_RATE_CONSTANT)?,
            bound_l1: kv.get("bound.l1")?,
            l1_samples: kv.get_or("bound.l1_samples", 4)?,
            l1_net_epsilon: kv.get_or("bound.net_epsilon", 0.1)?,
            fit: fit_config_from_kv(kv)?,
            diagnostic_truth: kv.flag("experiment.diagnostic_truth")?,
            truth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(m));
        if self.grid.len() < 2 {
            return bad("experiment.grid needs at least two horizons".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("experiment.grid must be strictly ascending".into());
        }
        let dim = self.truth.p() + self.truth.q();
        if self.grid[0] < dim + 1 {
            return bad(format!("smallest horizon must be at least {}", dim + 1));
        }
        if self.grid[self.grid.len() - 1] > u32::MAX as usize {
            return bad("horizon too large".into());
        }
        if self.n_mc < 2 || self.n_eval == 0 || self.l1_samples == 0 {
            return bad("experiment.n_mc ≥ 2, experiment.n_eval ≥ 1, bound.l1_samples ≥ 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return bad(format!("experiment.gamma must lie in (0, 1/2), got {}", self.gamma));
        }
        if !(self.bound_c > 0.0) || !(self.l1_net_epsilon > 0.0) {
            return bad("bound.c and bound.net_epsilon must be positive".into());
        }
        if let Some(l1) = self.bound_l1 {
            if !(l1 > 0.0 && l1.is_finite()) {
                return bad("bound.l1 must be positive".into());
            }
        }
        if !self.class.contains(&self.truth.theta()) {
            return bad("true parameter lies outside the parameter ball".into());
        }
        self.noise.validate().map_err(|e| Error::config(e.to_string()))?;
        self.fit.validate().map_err(|e| Error::config(e.to_string()))
    }
}

//! Run configuration: one JSON file plus flag overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use katlas::groundstate::ShootingConfig;
use katlas::nonlinearity::PowerNonlinearity;

use crate::CmdError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| {
                let x = i as f64 / (self.count as f64 - 1.0);
                if self.log {
                    (self.min.ln() + x * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + x * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub bisection_rel_tol: Option<f64>,
    pub tail_cutoff: Option<f64>,
    pub r_max_factor: Option<f64>,
    pub r_max_doublings: Option<u32>,
    pub integrator_rel_tol: Option<f64>,
    pub max_bisection_iters: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    nonlinearity: PowerNonlinearity,
    #[serde(rename = "N")]
    n: u32,
    a: f64,
    #[serde(default)]
    b: Option<f64>,
    #[serde(default)]
    b_sweep: Option<SweepSpec>,
    #[serde(default)]
    k_max: Option<usize>,
    #[serde(default)]
    lambdas: Option<Vec<f64>>,
    #[serde(default)]
    tolerances: Option<ToleranceSpec>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    cache: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nonlinearity: PowerNonlinearity,
    pub n: u32,
    pub a: f64,
    pub b: Option<f64>,
    pub b_sweep: Option<SweepSpec>,
    pub k_max: usize,
    pub lambdas: Vec<f64>,
    pub shooting: ShootingConfig,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<u32>,
    pub k_max: Option<usize>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let raw: RawConfig = serde_json::from_str(&text)
            .map_err(|e| CmdError::Usage(format!("config parse error: {e}")))?;

        let tol = raw.tolerances.unwrap_or_default();
        let defaults = ShootingConfig::default();
        let shooting = ShootingConfig {
            bisection_rel_tol: tol.bisection_rel_tol.unwrap_or(defaults.bisection_rel_tol),
            tail_cutoff: tol.tail_cutoff.unwrap_or(defaults.tail_cutoff),
            r_max_factor: tol.r_max_factor.unwrap_or(defaults.r_max_factor),
            r_max_doublings: tol.r_max_doublings.unwrap_or(defaults.r_max_doublings),
            integrator_rel_tol: tol
                .integrator_rel_tol
                .unwrap_or(defaults.integrator_rel_tol),
            max_bisection_iters: tol
                .max_bisection_iters
                .unwrap_or(defaults.max_bisection_iters),
        };

        let config = Self {
            nonlinearity: raw.nonlinearity,
            n: overrides.n.unwrap_or(raw.n),
            a: overrides.a.unwrap_or(raw.a),
            b: overrides.b.or(raw.b),
            b_sweep: raw.b_sweep,
            k_max: overrides.k_max.or(raw.k_max).unwrap_or(1),
            lambdas: raw.lambdas.unwrap_or_else(|| vec![0.5, 1.0, 2.0]),
            shooting,
            out: overrides
                .out
                .clone()
                .or(raw.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            cache: overrides.cache.clone().or(raw.cache),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CmdError> {
        if self.n < 1 {
            return Err(CmdError::Usage("N must be >= 1".into()));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(CmdError::Usage(format!("a must be >= 0, got {}", self.a)));
        }
        if let Some(b) = self.b {
            if !(b.is_finite() && b > 0.0) {
                return Err(CmdError::Usage(format!("b must be > 0, got {b}")));
            }
        }
        if let Some(sweep) = &self.b_sweep {
            if !(sweep.min > 0.0 && sweep.max >= sweep.min && sweep.count >= 1) {
                return Err(CmdError::Usage(
                    "sweep bounds must be positive and ordered".into(),
                ));
            }
        }
        if self.k_max < 1 {
            return Err(CmdError::Usage("k_max must be >= 1".into()));
        }
        if self.lambdas.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(CmdError::Usage("lambdas must be positive".into()));
        }
        Ok(())
    }

    /// Fixed b, or a usage error pointing at the sweep.
    pub fn fixed_b(&self) -> Result<f64, CmdError> {
        self.b
            .ok_or_else(|| CmdError::Usage("this command needs a fixed \"b\" (not a sweep)".into()))
    }
}

//! The TOML run configuration shared by every subcommand.
//!
//! ```toml
//! alpha = 1.0
//! t0 = 0.0
//! t_end = 3.0
//! seed = 7
//! m = 10000
//! n_nodes = 32
//! truncation_eps = 1e-6
//!
//! [delay]
//! kind = "discrete"                  # or uniform / exponential / tabulated
//! atoms = [[1.0, 0.5], [3.0, 0.5]]   # (delay, probability)
//!
//! [history]
//! kind = "constant"                  # or polynomial / piecewise_table
//! value = 1.0
//!
//! [solver]
//! h = 0.001
//! grid_step = 0.01
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dde_solver::SolverConfig;
use crate::delay_model::{self, DelaySpec, Family, DEFAULT_TRUNCATION_EPS};
use crate::eval::uniform_grid;
use crate::history::{HistoryKind, HistorySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayConfig {
    Discrete { atoms: Vec<(f64, f64)> },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Tabulated { table: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub h: f64,
    pub grid_step: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            h: 1e-3,
            grid_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SllnSection {
    pub ms: Vec<usize>,
    pub batches: usize,
}

impl Default for SllnSection {
    fn default() -> Self {
        Self {
            ms: vec![100, 1000, 10000],
            batches: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write every ensemble sample's grid values.
    #[serde(default)]
    pub keep_samples: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            keep_samples: false,
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_m() -> usize {
    1000
}

fn default_nodes() -> usize {
    32
}

fn default_eps() -> f64 {
    DEFAULT_TRUNCATION_EPS
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default = "default_eps")]
    pub truncation_eps: f64,
    /// Divergence threshold for `compare`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub delay: DelayConfig,
    pub history: HistoryKind,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub slln: SllnSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Everything a subcommand needs, validated.
#[derive(Debug, Clone)]
pub struct Problem {
    pub alpha: f64,
    pub spec: DelaySpec,
    pub hist: HistorySpec,
    pub t_end: f64,
    pub solver: SolverConfig,
    pub grid: Vec<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    pub fn to_toml(&self) -> Result<String, String> {
        toml::to_string(self).map_err(|e| format!("config serialization error: {e}"))
    }

    pub fn delay_spec(&self) -> DelaySpec {
        let eps = self.truncation_eps;
        match &self.delay {
            DelayConfig::Discrete { atoms } => DelaySpec::discrete(atoms.iter().copied()),
            DelayConfig::Uniform { a, b } => DelaySpec::Continuous {
                family: Family::Uniform { a: *a, b: *b },
                truncation_eps: eps,
            },
            DelayConfig::Exponential { rate } => DelaySpec::exponential(*rate, eps),
            DelayConfig::Tabulated { table } => DelaySpec::tabulated(table.clone(), eps),
        }
    }

    /// Revalidates every invariant and assembles the problem.
    pub fn problem(&self) -> Result<Problem, String> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite"))
            }
        };
        finite(self.alpha, "alpha")?;
        finite(self.t0, "t0")?;
        finite(self.t_end, "t_end")?;
        if !(self.t_end > self.t0) {
            return Err(format!(
                "t_end = {} must exceed t0 = {}",
                self.t_end, self.t0
            ));
        }
        if !(self.solver.h > 0.0 && self.solver.h.is_finite()) {
            return Err(format!("solver.h = {} must be > 0", self.solver.h));
        }
        if !(self.solver.grid_step > 0.0 && self.solver.grid_step.is_finite()) {
            return Err(format!(
                "solver.grid_step = {} must be > 0",
                self.solver.grid_step
            ));
        }
        if self.m == 0 {
            return Err("m must be >= 1".into());
        }
        if self.n_nodes == 0 {
            return Err("n_nodes must be >= 1".into());
        }
        if !(self.tol >= 0.0) {
            return Err(format!("tol = {} must be >= 0", self.tol));
        }
        if self.slln.batches == 0 || self.slln.ms.is_empty() || self.slln.ms.contains(&0) {
            return Err("slln needs batches >= 1 and sample sizes >= 1".into());
        }
        let spec = self.delay_spec();
        delay_model::validate(&spec).map_err(|e| e.to_string())?;
        let hist = HistorySpec::new(self.t0, self.history.clone());
        hist.validate().map_err(|e| e.to_string())?;
        let n_grid = (self.t_end - self.t0) / self.solver.grid_step;
        if n_grid > 1e8 {
            return Err("grid_step too small for the horizon".into());
        }
        Ok(Problem {
            alpha: self.alpha,
            spec,
            hist,
            t_end: self.t_end,
            solver: SolverConfig::new(self.solver.h),
            grid: uniform_grid(self.t0, self.t_end, self.solver.grid_step),
        })
    }
}

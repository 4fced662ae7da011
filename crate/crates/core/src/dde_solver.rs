//! Fixed-step RK4 for linear scalar multi-delay equations, with cubic
//! Hermite dense output.
//!
//! Lagged states are read from the history for arguments `<= t0` and from
//! the dense output of already completed cells otherwise. Every positive
//! delay must be at least `4h` so that no stage reaches into the cell being
//! computed. A zero-delay atom enters each stage as `alpha * w * y_stage`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{DomainError, Evaluate};
use crate::history::{HistoryError, HistorySpec};
use crate::polyexact::{problem_breakpoints, ExactError, WeightedDelays};

pub const DEFAULT_MAX_STEPS: usize = 20_000_000;
/// Uniform mesh points closer than `SNAP * h` to a mandatory point are dropped.
const SNAP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("PositiveDelayTooSmall: delay {delay} < 4h = {}; reduce the step", 4.0 * h)]
    PositiveDelayTooSmall { delay: f64, h: f64 },
    #[error(transparent)]
    HistoryGap(#[from] HistoryError),
    #[error(transparent)]
    Breakpoints(#[from] ExactError),
    #[error("TooManySteps: mesh needs {steps} steps, limit is {max}")]
    TooManySteps { steps: usize, max: usize },
    #[error("t = {t} is beyond the completed trajectory (ends at {last})")]
    BeyondCompleted { t: f64, last: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub h: f64,
    /// Times the mesh must hit exactly, typically the problem's breakpoints.
    pub mandatory_points: Vec<f64>,
    pub max_steps: usize,
}

impl SolverConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            mandatory_points: Vec::new(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_points(mut self, points: Vec<f64>) -> Self {
        self.mandatory_points = points;
        self
    }

    /// Step `h` with the problem's propagated breakpoints as mandatory points.
    pub fn aligned(
        h: f64,
        prob: &WeightedDelays,
        hist: &HistorySpec,
        t_end: f64,
    ) -> Result<Self, SolverError> {
        let points = problem_breakpoints(prob, hist, t_end)?;
        Ok(Self::new(h).with_points(points))
    }

    /// Same step and limits, mandatory points replaced by the breakpoints of
    /// `prob` merged with the configured ones.
    pub fn aligned_to(
        &self,
        prob: &WeightedDelays,
        hist: &HistorySpec,
        t_end: f64,
    ) -> Result<Self, SolverError> {
        let mut points = problem_breakpoints(prob, hist, t_end)?;
        points.extend(self.mandatory_points.iter().copied());
        Ok(Self {
            h: self.h,
            mandatory_points: points,
            max_steps: self.max_steps,
        })
    }
}

/// The time mesh: uniform `t0 + k h` plus every mandatory point.
fn build_mesh(cfg: &SolverConfig, t0: f64, t_end: f64) -> Result<Vec<f64>, SolverError> {
    let h = cfg.h;
    let mut fixed: Vec<f64> = Vec::with_capacity(cfg.mandatory_points.len() + 1);
    for &p in &cfg.mandatory_points {
        if !(p >= t0 && p <= t_end) {
            return Err(SolverError::InvalidConfig(format!(
                "mandatory point {p} outside [{t0}, {t_end}]"
            )));
        }
        if p > t0 {
            fixed.push(p);
        }
    }
    fixed.push(t_end);
    fixed.sort_by(f64::total_cmp);
    fixed.dedup();

    let n_uniform = ((t_end - t0) / h).floor();
    let steps = n_uniform as usize + fixed.len();
    if !n_uniform.is_finite() || steps > cfg.max_steps {
        return Err(SolverError::TooManySteps {
            steps,
            max: cfg.max_steps,
        });
    }
    let mut mesh = Vec::with_capacity(steps + 1);
    mesh.push(t0);
    let mut next_fixed = 0;
    let mut k = 1usize;
    loop {
        let u = t0 + k as f64 * h;
        while next_fixed < fixed.len() && fixed[next_fixed] <= u + SNAP * h {
            let f = fixed[next_fixed];
            if f > *mesh.last().unwrap() {
                mesh.push(f);
            }
            next_fixed += 1;
        }
        if u >= t_end {
            break;
        }
        if u > *mesh.last().unwrap() + SNAP * h {
            mesh.push(u);
        }
        k += 1;
    }
    Ok(mesh)
}

/// Numerical solution on a mesh with stored values and right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    hist: HistorySpec,
}

impl Trajectory {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn history(&self) -> &HistorySpec {
        &self.hist
    }

    pub fn t0(&self) -> f64 {
        self.grid[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// History for `t <= t0`, cubic Hermite inside completed cells.
    pub fn eval_dense(&self, t: f64) -> Result<f64, SolverError> {
        dense(&self.grid, &self.values, &self.derivs, &self.hist, t)
    }
}

impl Evaluate for Trajectory {
    fn domain(&self) -> (f64, f64) {
        (self.t0(), self.last_time())
    }

    fn value_at(&self, t: f64) -> Result<f64, DomainError> {
        let (start, end) = self.domain();
        if !(t >= start && t <= end) {
            return Err(DomainError { t, start, end });
        }
        self.eval_dense(t)
            .map_err(|_| DomainError { t, start, end })
    }
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s1 = 1.0 - s;
    let h00 = (1.0 + 2.0 * s) * s1 * s1;
    let h10 = s * s1 * s1;
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

fn dense(
    grid: &[f64],
    values: &[f64],
    derivs: &[f64],
    hist: &HistorySpec,
    t: f64,
) -> Result<f64, SolverError> {
    let t0 = grid[0];
    if t <= t0 {
        return Ok(hist.eval(t)?);
    }
    let last = *grid.last().unwrap();
    if t > last {
        return Err(SolverError::BeyondCompleted { t, last });
    }
    let i = grid.partition_point(|&g| g < t);
    if grid[i] == t {
        return Ok(values[i]);
    }
    Ok(hermite(
        grid[i - 1],
        grid[i],
        values[i - 1],
        values[i],
        derivs[i - 1],
        derivs[i],
        t,
    ))
}

/// Solves the multi-delay problem on `[t0, t_end]` with classical RK4.
pub fn solve_numeric(
    prob: &WeightedDelays,
    hist: &HistorySpec,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    let h = cfg.h;
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "step h = {h} must be > 0"
        )));
    }
    hist.validate()?;
    let t0 = hist.t0;
    if !(t_end > t0) {
        return Err(SolverError::InvalidConfig(format!(
            "t_end = {t_end} must exceed t0 = {t0}"
        )));
    }
    if let Some(d) = prob.min_positive_delay() {
        if d < 4.0 * h {
            return Err(SolverError::PositiveDelayTooSmall { delay: d, h });
        }
    }
    hist.check_covers(prob.max_delay())?;
    let mesh = build_mesh(cfg, t0, t_end)?;

    let alpha = prob.alpha();
    let instant: f64 = prob
        .atoms()
        .iter()
        .filter(|a| a.0 == 0.0)
        .map(|a| a.1)
        .sum();
    let lagged: Vec<(f64, f64)> = prob.atoms().iter().copied().filter(|a| a.0 > 0.0).collect();

    let mut grid = Vec::with_capacity(mesh.len());
    let mut values = Vec::with_capacity(mesh.len());
    let mut derivs = Vec::with_capacity(mesh.len());

    // sum_j w_j u(t - d_j) over positive delays, from history or completed cells
    let lag_sum =
        |grid: &[f64], values: &[f64], derivs: &[f64], t: f64| -> Result<f64, SolverError> {
            let mut s = 0.0;
            for &(d, w) in &lagged {
                s += w * dense(grid, values, derivs, hist, t - d)?;
            }
            Ok(s)
        };

    let u0 = hist.eval(t0)?;
    grid.push(t0);
    values.push(u0);
    let lag0 = lag_sum(&grid, &values, &derivs, t0)?;
    derivs.push(alpha * (instant * u0 + lag0));

    for w in mesh.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let dt = t_next - t;
        let y = *values.last().unwrap();
        let k1 = *derivs.last().unwrap();
        let lag_mid = lag_sum(&grid, &values, &derivs, t + 0.5 * dt)?;
        let lag_end = lag_sum(&grid, &values, &derivs, t_next)?;
        let k2 = alpha * (instant * (y + 0.5 * dt * k1) + lag_mid);
        let k3 = alpha * (instant * (y + 0.5 * dt * k2) + lag_mid);
        let k4 = alpha * (instant * (y + dt * k3) + lag_end);
        let y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        grid.push(t_next);
        values.push(y_next);
        derivs.push(alpha * (instant * y_next + lag_end));
    }

    Ok(Trajectory {
        grid,
        values,
        derivs,
        hist: hist.clone(),
    })
}

//! Side-by-side metrics for `v_R` and `v_D` on a grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delay_model::{self, DelayError, DelaySpec};
use crate::eval::{DomainError, Evaluate};
use crate::history::HistorySpec;

/// Largest difference tolerated inside the agreement window.
pub const AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("comparison grid is empty")]
    EmptyGrid,
    #[error("tolerance {0} must be >= 0")]
    InvalidTol(f64),
    #[error("agreement check refused: it holds only for a constant history")]
    NonConstantHistory,
    #[error("agreement check needs a discrete delay law")]
    NotDiscrete,
    #[error(transparent)]
    Spec(#[from] DelayError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub grid: Vec<f64>,
    #[serde(rename = "vR")]
    pub v_r: Vec<f64>,
    #[serde(rename = "vD")]
    pub v_d: Vec<f64>,
    pub sup_diff: f64,
    /// Trapezoid-rule L2 norm of `v_R - v_D` over the grid.
    pub l2_diff: f64,
    /// First grid time where `|v_R - v_D| > tol`, resolution-limited.
    pub first_divergence: Option<f64>,
    pub tol: f64,
    /// `t0 + 2 * min delay`, for discrete laws.
    pub agreement_window_end: Option<f64>,
}

impl ComparisonReport {
    pub fn abs_diff(&self) -> Vec<f64> {
        self.v_r
            .iter()
            .zip(&self.v_d)
            .map(|(a, b)| (a - b).abs())
            .collect()
    }

    /// Records the end of the window `[t0, t0 + 2 min delay]` for a discrete law.
    pub fn with_agreement_window(mut self, spec: &DelaySpec, t0: f64) -> Self {
        self.agreement_window_end = spec.is_discrete().then(|| t0 + 2.0 * spec.min_delay());
        self
    }
}

pub fn compare<R: Evaluate + ?Sized, D: Evaluate + ?Sized>(
    v_r: &R,
    v_d: &D,
    grid: &[f64],
    tol: f64,
) -> Result<ComparisonReport, CompareError> {
    if grid.is_empty() {
        return Err(CompareError::EmptyGrid);
    }
    if !(tol >= 0.0) {
        return Err(CompareError::InvalidTol(tol));
    }
    let r = v_r.sample(grid)?;
    let d = v_d.sample(grid)?;
    let diff: Vec<f64> = r.iter().zip(&d).map(|(a, b)| (a - b).abs()).collect();
    let sup_diff = diff.iter().copied().fold(0.0, f64::max);
    let l2_sq: f64 = grid
        .windows(2)
        .zip(diff.windows(2))
        .map(|(t, e)| 0.5 * (t[1] - t[0]) * (e[0] * e[0] + e[1] * e[1]))
        .sum();
    let first_divergence = grid
        .iter()
        .zip(&diff)
        .find(|(_, &e)| e > tol)
        .map(|(&t, _)| t);
    Ok(ComparisonReport {
        grid: grid.to_vec(),
        v_r: r,
        v_d: d,
        sup_diff,
        l2_diff: l2_sq.sqrt(),
        first_divergence,
        tol,
        agreement_window_end: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementOutcome {
    pub pass: bool,
    /// `AGREEMENT_TOL - max_diff`; nonnegative iff the check passes.
    pub margin: f64,
    pub max_diff: f64,
    pub window_end: f64,
}

/// Checks `|v_R - v_D| <= 1e-10` at every grid point in `[t0, t0 + 2 min delay]`.
pub fn agreement_check(
    spec: &DelaySpec,
    hist: &HistorySpec,
    report: &ComparisonReport,
) -> Result<AgreementOutcome, CompareError> {
    delay_model::validate(spec)?;
    if !spec.is_discrete() {
        return Err(CompareError::NotDiscrete);
    }
    if !hist.is_constant() {
        return Err(CompareError::NonConstantHistory);
    }
    let window_end = hist.t0 + 2.0 * spec.min_delay();
    let max_diff = report
        .grid
        .iter()
        .zip(report.abs_diff())
        .filter(|(&t, _)| t <= window_end)
        .map(|(_, e)| e)
        .fold(0.0, f64::max);
    let margin = AGREEMENT_TOL - max_diff;
    Ok(AgreementOutcome {
        pass: margin >= 0.0,
        margin,
        max_diff,
        window_end,
    })
}

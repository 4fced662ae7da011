//! Initial functions prescribed for `t <= t0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistoryError {
    #[error("HistoryGap: history requested at t = {t}, defined only on [{min}, {t0}]")]
    Gap { t: f64, min: f64, t0: f64 },
    #[error("InvalidHistory: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistoryKind {
    Constant {
        value: f64,
    },
    /// Coefficients in powers of `(t - t0)`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `breakpoints` run from the earliest defined time up to `t0`;
    /// `coeffs[k]` is in powers of `(t - breakpoints[k])`.
    PiecewiseTable {
        breakpoints: Vec<f64>,
        coeffs: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistorySpec {
    pub t0: f64,
    #[serde(flatten)]
    pub kind: HistoryKind,
}

impl HistorySpec {
    pub fn constant(value: f64) -> Self {
        Self::new(0.0, HistoryKind::Constant { value })
    }

    pub fn new(t0: f64, kind: HistoryKind) -> Self {
        Self { t0, kind }
    }

    pub fn validate(&self) -> Result<(), HistoryError> {
        let bad = |m: &str| Err(HistoryError::Invalid(m.to_string()));
        if !self.t0.is_finite() {
            return bad("t0 must be finite");
        }
        match &self.kind {
            HistoryKind::Constant { value } => {
                if !value.is_finite() {
                    return bad("constant value must be finite");
                }
            }
            HistoryKind::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("polynomial needs finite coefficients");
                }
            }
            HistoryKind::PiecewiseTable {
                breakpoints,
                coeffs,
            } => {
                if breakpoints.len() < 2 || coeffs.len() != breakpoints.len() - 1 {
                    return bad("table needs n+1 breakpoints for n segments");
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("table breakpoints must be strictly increasing");
                }
                if *breakpoints.last().unwrap() != self.t0 {
                    return bad("table must end exactly at t0");
                }
                if coeffs
                    .iter()
                    .any(|c| c.is_empty() || c.iter().any(|x| !x.is_finite()))
                {
                    return bad("table segments need finite coefficients");
                }
            }
        }
        Ok(())
    }

    /// Earliest time at which the history is defined.
    pub fn earliest(&self) -> f64 {
        match &self.kind {
            HistoryKind::PiecewiseTable { breakpoints, .. } => breakpoints[0],
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, HistoryKind::Constant { .. })
    }

    /// Knots strictly before `t0` where the history changes piece.
    pub fn interior_knots(&self) -> &[f64] {
        match &self.kind {
            HistoryKind::PiecewiseTable { breakpoints, .. } => {
                &breakpoints[1..breakpoints.len() - 1]
            }
            _ => &[],
        }
    }

    /// Errors unless the history is defined on `[t0 - span, t0]`.
    pub fn check_covers(&self, span: f64) -> Result<(), HistoryError> {
        let need = self.t0 - span;
        let min = self.earliest();
        if need < min {
            return Err(HistoryError::Gap {
                t: need,
                min,
                t0: self.t0,
            });
        }
        Ok(())
    }

    /// Returns `(origin, coeffs)` of the polynomial piece holding `t`; the
    /// piece is in powers of `(t - origin)`. `t` slightly above `t0` is
    /// served by the last piece.
    pub fn piece_at(&self, t: f64) -> Result<(f64, &[f64]), HistoryError> {
        match &self.kind {
            HistoryKind::Constant { value } => Ok((self.t0, std::slice::from_ref(value))),
            HistoryKind::Polynomial { coeffs } => Ok((self.t0, coeffs)),
            HistoryKind::PiecewiseTable {
                breakpoints,
                coeffs,
            } => {
                if t < breakpoints[0] {
                    return Err(HistoryError::Gap {
                        t,
                        min: breakpoints[0],
                        t0: self.t0,
                    });
                }
                // right-closed pieces, matching PiecewisePoly
                let k = breakpoints
                    .partition_point(|&b| b < t)
                    .saturating_sub(1)
                    .min(coeffs.len() - 1);
                Ok((breakpoints[k], &coeffs[k]))
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, HistoryError> {
        let (origin, c) = self.piece_at(t)?;
        Ok(poly::eval(c, t - origin))
    }

    pub fn eval_derivative(&self, t: f64) -> Result<f64, HistoryError> {
        let (origin, c) = self.piece_at(t)?;
        Ok(poly::eval(&poly::derivative(c), t - origin))
    }

    /// The same history multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let kind = match &self.kind {
            HistoryKind::Constant { value } => HistoryKind::Constant { value: c * value },
            HistoryKind::Polynomial { coeffs } => HistoryKind::Polynomial {
                coeffs: coeffs.iter().map(|x| c * x).collect(),
            },
            HistoryKind::PiecewiseTable {
                breakpoints,
                coeffs,
            } => HistoryKind::PiecewiseTable {
                breakpoints: breakpoints.clone(),
                coeffs: coeffs
                    .iter()
                    .map(|p| p.iter().map(|x| c * x).collect())
                    .collect(),
            },
        };
        Self { t0: self.t0, kind }
    }
}

//! Exact method of steps for `u'(t) = alpha * sum_j w_j u(t - d_j)`.
//!
//! Between consecutive breakpoints every lagged argument falls inside a
//! single already-solved piece (or a history piece), so the right-hand side
//! is a known polynomial and the solution piece is its antiderivative,
//! anchored at the value carried over from the previous piece.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{DomainError, Evaluate};
use crate::history::{HistoryError, HistorySpec};
use crate::poly::{self, Coeffs};

/// Breakpoints closer than this are treated as one.
pub const MERGE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DEGREE: usize = 200;
/// Upper bound on the number of breakpoints a horizon may generate.
pub const MAX_BREAKPOINTS: usize = 2_000_000;
/// Tolerance on the total weight of a multi-delay problem.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("ZeroDelay: the exact solver cannot take a zero-delay atom; use the numeric solver")]
    ZeroDelay,
    #[error("t_end = {t_end} must exceed t0 = {t0}")]
    InvalidHorizon { t0: f64, t_end: f64 },
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error("DegreeGuard: segment degree {degree} exceeds the limit {max}")]
    DegreeGuard { degree: usize, max: usize },
    #[error("TooManyBreakpoints: more than {0} breakpoints before t_end")]
    TooManyBreakpoints(usize),
    #[error("mix: {0}")]
    Mix(String),
}

/// Scalar linear multi-delay problem data: growth rate and weighted delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDelays {
    alpha: f64,
    atoms: Vec<(f64, f64)>,
}

impl WeightedDelays {
    /// Validates and normalizes the atoms: sorted by delay, equal delays merged.
    pub fn new(alpha: f64, atoms: Vec<(f64, f64)>) -> Result<Self, ExactError> {
        let bad = |m: String| Err(ExactError::InvalidProblem(m));
        if !alpha.is_finite() {
            return bad(format!("alpha = {alpha} is not finite"));
        }
        if atoms.is_empty() {
            return bad("no delay atoms".into());
        }
        for &(d, w) in &atoms {
            if !(d.is_finite() && d >= 0.0) {
                return bad(format!("delay {d} must be finite and >= 0"));
            }
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("weight {w} must be > 0"));
            }
        }
        let sum: f64 = atoms.iter().map(|a| a.1).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("weights sum to {sum}"));
        }
        let mut sorted = atoms;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (d, w) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == d => last.1 += w,
                _ => merged.push((d, w)),
            }
        }
        Ok(Self {
            alpha,
            atoms: merged,
        })
    }

    pub fn single(alpha: f64, delay: f64) -> Result<Self, ExactError> {
        Self::new(alpha, vec![(delay, 1.0)])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn delays(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn max_delay(&self) -> f64 {
        self.atoms.last().map_or(0.0, |a| a.0)
    }

    /// Smallest strictly positive delay, if any.
    pub fn min_positive_delay(&self) -> Option<f64> {
        self.atoms.iter().map(|a| a.0).find(|&d| d > 0.0)
    }

    pub fn has_zero_delay(&self) -> bool {
        self.atoms.first().is_some_and(|a| a.0 == 0.0)
    }
}

/// Merges a sorted list in place so that neighbours are at least `MERGE_TOL` apart.
fn merge_close(v: &mut Vec<f64>) {
    v.dedup_by(|b, a| *b - *a < MERGE_TOL);
}

/// Discontinuity propagation from `seeds` through nonnegative integer
/// combinations of the positive delays, restricted to `[t0, t_end]`.
pub(crate) fn propagate(
    seeds: &[f64],
    delays: &[f64],
    t0: f64,
    t_end: f64,
) -> Result<Vec<f64>, ExactError> {
    if !(t_end > t0) {
        return Err(ExactError::InvalidHorizon { t0, t_end });
    }
    let mut pos: Vec<f64> = delays.iter().copied().filter(|&d| d > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    merge_close(&mut pos);

    let limit = t_end + MERGE_TOL;
    let mut all: Vec<f64> = seeds.iter().copied().filter(|&s| s <= limit).collect();
    all.push(t0);
    all.sort_by(f64::total_cmp);
    merge_close(&mut all);
    let mut frontier = all.clone();
    while !frontier.is_empty() && !pos.is_empty() {
        let mut next: Vec<f64> = frontier
            .iter()
            .flat_map(|&s| pos.iter().map(move |&d| s + d))
            .filter(|&t| t <= limit)
            .collect();
        next.sort_by(f64::total_cmp);
        merge_close(&mut next);
        next.retain(|&t| {
            let i = all.partition_point(|&a| a < t);
            let near_lo = i > 0 && t - all[i - 1] < MERGE_TOL;
            let near_hi = i < all.len() && all[i] - t < MERGE_TOL;
            !(near_lo || near_hi)
        });
        all.extend_from_slice(&next);
        all.sort_by(f64::total_cmp);
        if all.len() > MAX_BREAKPOINTS {
            return Err(ExactError::TooManyBreakpoints(MAX_BREAKPOINTS));
        }
        frontier = next;
    }

    let mut out = vec![t0];
    out.extend(
        all.into_iter()
            .filter(|&t| t - t0 >= MERGE_TOL && t_end - t >= MERGE_TOL),
    );
    out.push(t_end);
    merge_close(&mut out);
    if let Some(last) = out.last_mut() {
        *last = t_end;
    }
    Ok(out)
}

/// All distinct `t0 + sum_j k_j d_j <= t_end` over nonnegative integers
/// `k_j` (positive delays only), plus `t_end`. Values closer than
/// [`MERGE_TOL`] are merged.
pub fn breakpoints(delays: &[f64], t0: f64, t_end: f64) -> Result<Vec<f64>, ExactError> {
    propagate(&[t0], delays, t0, t_end)
}

/// Breakpoints of a problem with the given history, including the
/// propagated knots of a piecewise history.
pub fn problem_breakpoints(
    prob: &WeightedDelays,
    hist: &HistorySpec,
    t_end: f64,
) -> Result<Vec<f64>, ExactError> {
    let mut seeds = vec![hist.t0];
    seeds.extend_from_slice(hist.interior_knots());
    propagate(&seeds, &prob.delays(), hist.t0, t_end)
}

/// Continuous piecewise polynomial on `[breakpoints[0], breakpoints[n]]`;
/// piece `k` is in powers of `(t - breakpoints[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    segments: Vec<Coeffs>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Coeffs>) -> Result<Self, ExactError> {
        let bad = |m: &str| Err(ExactError::InvalidProblem(m.to_string()));
        if breakpoints.len() < 2 || segments.len() + 1 != breakpoints.len() {
            return bad("need one segment per breakpoint interval");
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return bad("breakpoints must be strictly increasing");
        }
        if segments.iter().any(|s| s.is_empty()) {
            return bad("empty segment");
        }
        Ok(Self {
            breakpoints,
            segments,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Coeffs] {
        &self.segments
    }

    /// Index of the piece holding `t`: the one whose left endpoint is the
    /// largest breakpoint below `t` (piece 0 at `t_start`).
    fn segment_index(&self, t: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b < t)
            .saturating_sub(1)
            .min(self.segments.len() - 1)
    }

    fn check(&self, t: f64) -> Result<(), DomainError> {
        if t >= self.t_start() && t <= self.t_end() {
            Ok(())
        } else {
            Err(DomainError {
                t,
                start: self.t_start(),
                end: self.t_end(),
            })
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, DomainError> {
        self.check(t)?;
        let k = self.segment_index(t);
        Ok(poly::eval(&self.segments[k], t - self.breakpoints[k]))
    }

    pub fn eval_derivative(&self, t: f64) -> Result<f64, DomainError> {
        self.check(t)?;
        let k = self.segment_index(t);
        Ok(poly::eval(
            &poly::derivative(&self.segments[k]),
            t - self.breakpoints[k],
        ))
    }

    /// Piece holding `t` re-expanded in powers of `(t - origin)`.
    fn expanded_at(&self, t: f64, origin: f64) -> Coeffs {
        let k = self.segment_index(t);
        poly::taylor_shift(&self.segments[k], origin - self.breakpoints[k])
    }

    pub fn max_degree(&self) -> usize {
        self.segments
            .iter()
            .map(|s| poly::degree(s))
            .max()
            .unwrap_or(0)
    }

    /// Largest relative jump `|left limit - right value| / (1 + |value|)`
    /// over the interior breakpoints.
    pub fn max_continuity_defect(&self) -> f64 {
        (1..self.segments.len())
            .map(|k| {
                let h = self.breakpoints[k] - self.breakpoints[k - 1];
                let left = poly::eval(&self.segments[k - 1], h);
                let right = self.segments[k][0];
                (left - right).abs() / (1.0 + right.abs())
            })
            .fold(0.0, f64::max)
    }

    /// The same function multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| s.iter().map(|x| c * x).collect())
                .collect(),
        }
    }
}

impl Evaluate for PiecewisePoly {
    fn domain(&self) -> (f64, f64) {
        (self.t_start(), self.t_end())
    }

    fn value_at(&self, t: f64) -> Result<f64, DomainError> {
        self.eval(t)
    }
}

/// Method-of-steps solver with a degree guard.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolver {
    pub max_degree: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

fn trim(mut c: Coeffs) -> Coeffs {
    let d = poly::degree(&c);
    c.truncate(d + 1);
    c
}

impl ExactSolver {
    pub fn solve(
        &self,
        prob: &WeightedDelays,
        hist: &HistorySpec,
        t_end: f64,
    ) -> Result<PiecewisePoly, ExactError> {
        if prob.has_zero_delay() {
            return Err(ExactError::ZeroDelay);
        }
        hist.validate()?;
        hist.check_covers(prob.max_delay())?;
        let t0 = hist.t0;
        let bps = problem_breakpoints(prob, hist, t_end)?;
        let alpha = prob.alpha();

        let mut segments: Vec<Coeffs> = Vec::with_capacity(bps.len() - 1);
        let mut value = hist.eval(t0)?;
        for k in 0..bps.len() - 1 {
            let (a, b) = (bps[k], bps[k + 1]);
            let mut rhs: Coeffs = vec![0.0];
            for &(d, w) in prob.atoms() {
                let mid = 0.5 * (a + b) - d;
                let lagged = if mid <= t0 {
                    let (origin, c) = hist.piece_at(mid)?;
                    poly::taylor_shift(c, a - d - origin)
                } else {
                    let i = bps[..=k]
                        .partition_point(|&t| t < mid)
                        .saturating_sub(1)
                        .min(k.saturating_sub(1));
                    poly::taylor_shift(&segments[i], a - d - bps[i])
                };
                poly::axpy(&mut rhs, alpha * w, &lagged);
            }
            let seg = trim(poly::antiderivative(&rhs, value));
            let degree = poly::degree(&seg);
            if degree > self.max_degree {
                return Err(ExactError::DegreeGuard {
                    degree,
                    max: self.max_degree,
                });
            }
            value = poly::eval(&seg, b - a);
            segments.push(seg);
        }
        PiecewisePoly::new(bps, segments)
    }
}

/// Exact piecewise-polynomial solution with the default degree guard.
pub fn solve_exact(
    prob: &WeightedDelays,
    hist: &HistorySpec,
    t_end: f64,
) -> Result<PiecewisePoly, ExactError> {
    ExactSolver::default().solve(prob, hist, t_end)
}

/// Weighted sum of piecewise polynomials on a common domain.
pub fn mix(parts: &[PiecewisePoly], weights: &[f64]) -> Result<PiecewisePoly, ExactError> {
    let bad = |m: String| Err(ExactError::Mix(m));
    if parts.is_empty() || parts.len() != weights.len() {
        return bad("need one weight per part".into());
    }
    let (start, end) = (parts[0].t_start(), parts[0].t_end());
    if parts
        .iter()
        .any(|p| p.t_start() != start || p.t_end() != end)
    {
        return bad("parts have different domains".into());
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return bad(format!("weights sum to {sum}"));
    }
    let mut bps: Vec<f64> = parts
        .iter()
        .flat_map(|p| p.breakpoints.iter().copied())
        .collect();
    bps.sort_by(f64::total_cmp);
    merge_close(&mut bps);
    *bps.last_mut().unwrap() = end;

    let segments = bps
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let mut acc: Coeffs = vec![0.0];
            for (p, &wt) in parts.iter().zip(weights) {
                poly::axpy(&mut acc, wt, &p.expanded_at(mid, w[0]));
            }
            acc
        })
        .collect();
    PiecewisePoly::new(bps, segments)
}

//! Laws of the nonnegative random delay.
//!
//! A [`DelaySpec`] is either a finite set of weighted atoms or one of a few
//! continuous families. Continuous laws are reduced to weighted atoms by
//! [`discretize`], which places Gauss–Legendre nodes on the (truncated)
//! support and weights them by the density.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussLegendre;

/// Tolerance on the total probability of a discrete law.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Default tail mass dropped on each side of an unbounded support.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-6;
/// Largest admissible truncation level.
pub const MAX_TRUNCATION_EPS: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelayError {
    #[error("NoAtoms: a discrete law needs at least one atom")]
    NoAtoms,
    #[error("NonFinite: parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("NegativeDelay: delay {delay} < 0")]
    NegativeDelay { delay: f64 },
    #[error("ProbOutOfRange: atom probability {prob} not in (0, 1]")]
    ProbOutOfRange { prob: f64 },
    #[error("ProbSumMismatch: probabilities sum to {sum}, expected 1")]
    ProbSumMismatch { sum: f64 },
    #[error("DuplicateAtom: delay {delay} appears more than once")]
    DuplicateAtom { delay: f64 },
    #[error("DelaysNotIncreasing: atom {index} is out of order")]
    DelaysNotIncreasing { index: usize },
    #[error("InvalidUniform: need 0 <= a < b, got a = {a}, b = {b}")]
    InvalidUniform { a: f64, b: f64 },
    #[error("InvalidRate: exponential rate {rate} must be > 0")]
    InvalidRate { rate: f64 },
    #[error("InvalidQuantileTable: {0}")]
    InvalidQuantileTable(String),
    #[error("InvalidTruncation: eps = {eps} not in (0, 1e-2]")]
    InvalidTruncation { eps: f64 },
    #[error("ProbabilityOutOfRange: p = {p} not in [0, 1]")]
    ProbabilityOutOfRange { p: f64 },
    #[error("NotContinuous: discretization needs a continuous law")]
    NotContinuous,
    #[error("ZeroNodes: at least one quadrature node is required")]
    ZeroNodes,
    #[error("NoDensity: tabulated quantile has a flat piece at {q} inside the truncated support")]
    NoDensity { q: f64 },
}

/// A point mass `prob` at `delay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub delay: f64,
    pub prob: f64,
}

impl Atom {
    pub fn new(delay: f64, prob: f64) -> Self {
        Self { delay, prob }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Uniform {
        a: f64,
        b: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Quantile function tabulated as `(p, q(p))` pairs, linearly interpolated.
    /// The table must start at `p = 0` and end at `p = 1`.
    TabulatedQuantile {
        table: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySpec {
    Discrete { atoms: Vec<Atom> },
    Continuous { family: Family, truncation_eps: f64 },
}

impl DelaySpec {
    /// Builds a discrete law from `(delay, prob)` pairs.
    pub fn discrete<I: IntoIterator<Item = (f64, f64)>>(atoms: I) -> Self {
        DelaySpec::Discrete {
            atoms: atoms.into_iter().map(|(d, p)| Atom::new(d, p)).collect(),
        }
    }

    pub fn point_mass(delay: f64) -> Self {
        Self::discrete([(delay, 1.0)])
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        DelaySpec::Continuous {
            family: Family::Uniform { a, b },
            truncation_eps: DEFAULT_TRUNCATION_EPS,
        }
    }

    pub fn exponential(rate: f64, truncation_eps: f64) -> Self {
        DelaySpec::Continuous {
            family: Family::Exponential { rate },
            truncation_eps,
        }
    }

    pub fn tabulated(table: Vec<(f64, f64)>, truncation_eps: f64) -> Self {
        DelaySpec::Continuous {
            family: Family::TabulatedQuantile { table },
            truncation_eps,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, DelaySpec::Discrete { .. })
    }

    /// Smallest point of the support.
    pub fn min_delay(&self) -> f64 {
        match self {
            DelaySpec::Discrete { atoms } => {
                atoms.iter().map(|a| a.delay).fold(f64::INFINITY, f64::min)
            }
            DelaySpec::Continuous { family, .. } => match family {
                Family::Uniform { a, .. } => *a,
                Family::Exponential { .. } => 0.0,
                Family::TabulatedQuantile { table } => table.first().map_or(0.0, |e| e.1),
            },
        }
    }

    /// Largest point of the support; infinite for the exponential law.
    pub fn max_delay(&self) -> f64 {
        match self {
            DelaySpec::Discrete { atoms } => atoms.iter().map(|a| a.delay).fold(0.0, f64::max),
            DelaySpec::Continuous { family, .. } => match family {
                Family::Uniform { b, .. } => *b,
                Family::Exponential { .. } => f64::INFINITY,
                Family::TabulatedQuantile { table } => table.last().map_or(0.0, |e| e.1),
            },
        }
    }

    pub fn truncation_eps(&self) -> Option<f64> {
        match self {
            DelaySpec::Discrete { .. } => None,
            DelaySpec::Continuous { truncation_eps, .. } => Some(*truncation_eps),
        }
    }
}

fn finite(x: f64, name: &'static str) -> Result<(), DelayError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(DelayError::NonFinite(name))
    }
}

/// Checks every invariant of the law, reporting the first violation.
pub fn validate(spec: &DelaySpec) -> Result<(), DelayError> {
    match spec {
        DelaySpec::Discrete { atoms } => {
            if atoms.is_empty() {
                return Err(DelayError::NoAtoms);
            }
            for a in atoms {
                finite(a.delay, "delay")?;
                finite(a.prob, "prob")?;
                if a.delay < 0.0 {
                    return Err(DelayError::NegativeDelay { delay: a.delay });
                }
                if !(a.prob > 0.0 && a.prob <= 1.0) {
                    return Err(DelayError::ProbOutOfRange { prob: a.prob });
                }
            }
            for (i, w) in atoms.windows(2).enumerate() {
                if w[1].delay == w[0].delay {
                    return Err(DelayError::DuplicateAtom { delay: w[1].delay });
                }
                if w[1].delay < w[0].delay {
                    return Err(DelayError::DelaysNotIncreasing { index: i + 1 });
                }
            }
            let sum: f64 = atoms.iter().map(|a| a.prob).sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(DelayError::ProbSumMismatch { sum });
            }
            Ok(())
        }
        DelaySpec::Continuous {
            family,
            truncation_eps,
        } => {
            let eps = *truncation_eps;
            if !(eps > 0.0 && eps <= MAX_TRUNCATION_EPS) {
                return Err(DelayError::InvalidTruncation { eps });
            }
            match family {
                Family::Uniform { a, b } => {
                    finite(*a, "a")?;
                    finite(*b, "b")?;
                    if !(0.0 <= *a && a < b) {
                        return Err(DelayError::InvalidUniform { a: *a, b: *b });
                    }
                }
                Family::Exponential { rate } => {
                    finite(*rate, "rate")?;
                    if *rate <= 0.0 {
                        return Err(DelayError::InvalidRate { rate: *rate });
                    }
                }
                Family::TabulatedQuantile { table } => validate_table(table)?,
            }
            Ok(())
        }
    }
}

fn validate_table(table: &[(f64, f64)]) -> Result<(), DelayError> {
    let bad = |m: &str| Err(DelayError::InvalidQuantileTable(m.to_string()));
    if table.len() < 2 {
        return bad("need at least two (p, q) points");
    }
    for &(p, q) in table {
        finite(p, "table p")?;
        finite(q, "table q")?;
    }
    if table[0].0 != 0.0 || table[table.len() - 1].0 != 1.0 {
        return bad("p grid must start at 0 and end at 1");
    }
    if table[0].1 < 0.0 {
        return bad("q(0) must be >= 0");
    }
    for w in table.windows(2) {
        if w[1].0 <= w[0].0 {
            return bad("p must be strictly increasing");
        }
        if w[1].1 < w[0].1 {
            return bad("q must be nondecreasing");
        }
    }
    Ok(())
}

fn check_p(p: f64) -> Result<(), DelayError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DelayError::ProbabilityOutOfRange { p })
    }
}

fn table_quantile(table: &[(f64, f64)], p: f64) -> f64 {
    let k = table.partition_point(|e| e.0 < p).clamp(1, table.len() - 1);
    let (p0, q0) = table[k - 1];
    let (p1, q1) = table[k];
    q0 + (p - p0) / (p1 - p0) * (q1 - q0)
}

/// Generalized inverse CDF `inf { x : F(x) >= p }`.
///
/// For discrete laws this is the smallest atom whose cumulative probability
/// reaches `p`. The exponential quantile at `p = 1` is `+inf`.
pub fn quantile(spec: &DelaySpec, p: f64) -> Result<f64, DelayError> {
    check_p(p)?;
    Ok(quantile_unchecked(spec, p))
}

fn quantile_unchecked(spec: &DelaySpec, p: f64) -> f64 {
    match spec {
        DelaySpec::Discrete { atoms } => {
            let mut cum = 0.0;
            for a in atoms {
                cum += a.prob;
                if cum >= p {
                    return a.delay;
                }
            }
            // rounding left the total a hair below 1
            atoms.last().map_or(0.0, |a| a.delay)
        }
        DelaySpec::Continuous { family, .. } => match family {
            Family::Uniform { a, b } => a + p * (b - a),
            Family::Exponential { rate } => -(-p).ln_1p() / rate,
            Family::TabulatedQuantile { table } => table_quantile(table, p),
        },
    }
}

/// Cumulative distribution function `P(delay <= x)`.
pub fn cdf(spec: &DelaySpec, x: f64) -> f64 {
    match spec {
        DelaySpec::Discrete { atoms } => atoms
            .iter()
            .filter(|a| a.delay <= x)
            .map(|a| a.prob)
            .sum::<f64>()
            .min(1.0),
        DelaySpec::Continuous { family, .. } => match family {
            Family::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Family::TabulatedQuantile { table } => {
                let mut best = 0.0f64;
                for w in table.windows(2) {
                    let ((p0, q0), (p1, q1)) = (w[0], w[1]);
                    if q1 <= x {
                        best = best.max(p1);
                    } else if q0 <= x {
                        best = best.max(p0 + (x - q0) / (q1 - q0) * (p1 - p0));
                    }
                }
                best
            }
        },
    }
}

/// Density of a continuous law; zero outside the support. `None` for
/// discrete laws.
pub fn pdf(spec: &DelaySpec, x: f64) -> Option<f64> {
    let DelaySpec::Continuous { family, .. } = spec else {
        return None;
    };
    Some(match family {
        Family::Uniform { a, b } => {
            if (*a..=*b).contains(&x) {
                1.0 / (b - a)
            } else {
                0.0
            }
        }
        Family::Exponential { rate } => {
            if x >= 0.0 {
                rate * (-rate * x).exp()
            } else {
                0.0
            }
        }
        Family::TabulatedQuantile { table } => table
            .windows(2)
            .find(|w| w[0].1 <= x && x < w[1].1)
            .map_or(0.0, |w| (w[1].0 - w[0].0) / (w[1].1 - w[0].1)),
    })
}

/// Maps one uniform variate `u` in `[0, 1)` to a delay by inverse transform.
pub fn delay_from_uniform(spec: &DelaySpec, u: f64) -> f64 {
    quantile_unchecked(spec, u.clamp(0.0, 1.0))
}

/// Draws one delay, consuming exactly one `f64` from `rng`.
pub fn sample_delay<R: Rng + ?Sized>(spec: &DelaySpec, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    delay_from_uniform(spec, u)
}

/// Like [`sample_delay`] for discrete laws, but returns the atom index.
pub fn sample_atom_index<R: Rng + ?Sized>(atoms: &[Atom], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        cum += a.prob;
        if cum >= u {
            return i;
        }
    }
    atoms.len() - 1
}

/// The compact interval the quadrature is placed on.
pub fn truncated_support(spec: &DelaySpec) -> Result<(f64, f64), DelayError> {
    let DelaySpec::Continuous {
        family,
        truncation_eps,
    } = spec
    else {
        return Err(DelayError::NotContinuous);
    };
    Ok(match family {
        Family::Uniform { a, b } => (*a, *b),
        _ => (
            quantile_unchecked(spec, *truncation_eps),
            quantile_unchecked(spec, 1.0 - truncation_eps),
        ),
    })
}

/// Replaces a continuous law by `n_nodes` weighted atoms.
///
/// Gauss–Legendre nodes are mapped onto the truncated support, their
/// weights multiplied by the density and renormalized to sum to one.
pub fn discretize(spec: &DelaySpec, n_nodes: usize) -> Result<Vec<(f64, f64)>, DelayError> {
    validate(spec)?;
    if n_nodes == 0 {
        return Err(DelayError::ZeroNodes);
    }
    let (lo, hi) = truncated_support(spec)?;
    if let DelaySpec::Continuous {
        family: Family::TabulatedQuantile { table },
        ..
    } = spec
    {
        if let Some(w) = table
            .windows(2)
            .find(|w| w[0].1 == w[1].1 && w[0].1 >= lo && w[0].1 <= hi)
        {
            return Err(DelayError::NoDensity { q: w[0].1 });
        }
    }
    let rule = GaussLegendre::new(n_nodes);
    let (nodes, gl_weights) = rule.on_interval(lo, hi);
    let raw: Vec<f64> = nodes
        .iter()
        .zip(&gl_weights)
        .map(|(&x, &w)| w * pdf(spec, x).unwrap_or(0.0))
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(nodes
        .into_iter()
        .zip(raw)
        .map(|(x, w)| (x, w / total))
        .collect())
}

/// Where a list of weighted delays came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Atoms and probabilities of a discrete law, verbatim.
    Discrete,
    /// Gauss–Legendre discretization of a continuous law.
    Quadrature { n_nodes: usize, eps: f64 },
}

//! Averaging right-hand-side operators: the distributed delay equation
//! `v_D'(t) = alpha * E[v_D(t - delay)]`.
//!
//! For a discrete law the expectation is the probability-weighted sum of
//! the single-delay operators; a continuous law is first reduced to weighted
//! atoms by the same quadrature the mixtures use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde_solver::{solve_numeric, SolverConfig, SolverError, Trajectory};
use crate::delay_model::{self, DelayError, DelaySpec, Provenance};
use crate::eval::{DomainError, Evaluate};
use crate::history::HistorySpec;
use crate::polyexact::{solve_exact, ExactError, PiecewisePoly, WeightedDelays};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributedError {
    #[error(transparent)]
    Spec(#[from] DelayError),
    #[error("a continuous delay law needs a quadrature node count")]
    MissingNodes,
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The operator average `sum_i w_i L_i` as data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedProblem {
    pub alpha: f64,
    pub effective_atoms: Vec<(f64, f64)>,
    pub provenance: Provenance,
}

impl DistributedProblem {
    pub fn to_weighted(&self) -> Result<WeightedDelays, ExactError> {
        WeightedDelays::new(self.alpha, self.effective_atoms.clone())
    }
}

/// Discrete laws keep their atoms verbatim (`n_nodes` is ignored);
/// continuous laws are discretized with `n_nodes` Gauss–Legendre nodes.
pub fn build_distributed(
    alpha: f64,
    spec: &DelaySpec,
    n_nodes: Option<usize>,
) -> Result<DistributedProblem, DistributedError> {
    delay_model::validate(spec)?;
    let (effective_atoms, provenance) = match spec {
        DelaySpec::Discrete { atoms } => (
            atoms.iter().map(|a| (a.delay, a.prob)).collect(),
            Provenance::Discrete,
        ),
        DelaySpec::Continuous { truncation_eps, .. } => {
            let n = n_nodes.ok_or(DistributedError::MissingNodes)?;
            (
                delay_model::discretize(spec, n)?,
                Provenance::Quadrature {
                    n_nodes: n,
                    eps: *truncation_eps,
                },
            )
        }
    };
    Ok(DistributedProblem {
        alpha,
        effective_atoms,
        provenance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveMode {
    Exact,
    /// RK4 with the given step; the problem's breakpoints are added to the mesh.
    Numeric(SolverConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributedSolution {
    Exact(PiecewisePoly),
    Numeric(Trajectory),
}

impl Evaluate for DistributedSolution {
    fn domain(&self) -> (f64, f64) {
        match self {
            DistributedSolution::Exact(p) => p.domain(),
            DistributedSolution::Numeric(t) => t.domain(),
        }
    }

    fn value_at(&self, t: f64) -> Result<f64, DomainError> {
        match self {
            DistributedSolution::Exact(p) => p.value_at(t),
            DistributedSolution::Numeric(tr) => tr.value_at(t),
        }
    }
}

/// Solves for `v_D`.
pub fn solve_distributed(
    prob: &DistributedProblem,
    hist: &HistorySpec,
    t_end: f64,
    mode: &SolveMode,
) -> Result<DistributedSolution, DistributedError> {
    let weighted = prob.to_weighted()?;
    Ok(match mode {
        SolveMode::Exact => DistributedSolution::Exact(solve_exact(&weighted, hist, t_end)?),
        SolveMode::Numeric(cfg) => {
            let cfg = cfg.aligned_to(&weighted, hist, t_end)?;
            DistributedSolution::Numeric(solve_numeric(&weighted, hist, t_end, &cfg)?)
        }
    })
}

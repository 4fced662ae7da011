//! Averaging sampled solutions.
//!
//! Each sample draws a delay, solves the single-delay equation for it and
//! contributes its values on a shared grid. Samples are solved in parallel
//! but folded into the running mean and variance strictly in sample-index
//! order, so a given seed always produces the same bits.
//!
//! The limit object `v_R` is available exactly for discrete laws (the
//! probability-weighted mixture of per-atom solutions) and through
//! Gauss–Legendre quadrature over the delay density for continuous ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde_solver::{solve_numeric, SolverConfig, SolverError, Trajectory};
use crate::delay_model::{self, DelayError, DelaySpec, Provenance};
use crate::eval::{DomainError, Evaluate};
use crate::history::HistorySpec;
use crate::polyexact::{self, solve_exact, ExactError, PiecewisePoly, WeightedDelays};
use crate::rng::{derive_seed, sample_stream};

/// Node count of the quadrature that stands in for `v_R` of a continuous law.
pub const REFERENCE_NODES: usize = 256;
const CHUNK: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Spec(#[from] DelayError),
    #[error("invalid ensemble input: {0}")]
    Input(String),
    #[error("sample {index} (delay {delay}): {source}")]
    Sample {
        index: u64,
        delay: f64,
        source: SolverError,
    },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// One retained sample: its delay and its values on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub delay: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub grid: Vec<f64>,
    /// Sample mean `v_{R_M}` on the grid.
    pub mean: Vec<f64>,
    /// Unbiased pointwise sample variance (zero when `m == 1`).
    pub variance: Vec<f64>,
    pub m: usize,
    /// Per-atom tallies `M_i` for discrete laws.
    pub atom_counts: Option<Vec<usize>>,
    pub seed: u64,
    pub samples: Option<Vec<SampleRecord>>,
}

impl EnsembleResult {
    /// Standard error of the mean, `sqrt(variance / m)`.
    pub fn stderr(&self) -> Vec<f64> {
        let m = self.m as f64;
        self.variance.iter().map(|v| (v / m).sqrt()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnsembleOptions {
    /// Keep every sample's grid values in the result.
    pub keep_samples: bool,
}

/// Welford accumulator over grid vectors.
struct Running {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Running {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mu, m2), &xi) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = xi - *mu;
            *mu += d / n;
            *m2 += d * (xi - *mu);
        }
    }

    fn variance(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let d = (self.n - 1) as f64;
        self.m2.iter().map(|v| (v / d).max(0.0)).collect()
    }
}

fn check_grid(grid: &[f64], t0: f64, t_end: f64) -> Result<(), EnsembleError> {
    if grid.is_empty() {
        return Err(EnsembleError::Input("empty evaluation grid".into()));
    }
    if let Some(&t) = grid.iter().find(|&&t| !(t >= t0 && t <= t_end)) {
        return Err(EnsembleError::Input(format!(
            "grid point {t} outside [{t0}, {t_end}]"
        )));
    }
    Ok(())
}

/// Solves the single-delay problem for `delay` on a breakpoint-aligned mesh
/// and samples it on `grid`. The step is reduced to `delay / 4` when the
/// configured one is too coarse for this delay.
pub fn solve_single(
    alpha: f64,
    delay: f64,
    hist: &HistorySpec,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    let prob = WeightedDelays::single(alpha, delay)?;
    let mut local = cfg.aligned_to(&prob, hist, t_end)?;
    if delay > 0.0 && delay < 4.0 * local.h {
        local.h = delay / 4.0;
    }
    solve_numeric(&prob, hist, t_end, &local)
}

fn sample_on_grid(
    alpha: f64,
    delay: f64,
    hist: &HistorySpec,
    t_end: f64,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<Vec<f64>, SolverError> {
    let tr = solve_single(alpha, delay, hist, t_end, cfg)?;
    grid.iter().map(|&t| tr.eval_dense(t)).collect()
}

/// Runs the ensemble once up to `max(checkpoints)` and snapshots the
/// running statistics at every checkpoint. A snapshot at `m` is bit-for-bit
/// the result of an `m`-sample run with the same seed.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble_checkpoints(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    checkpoints: &[usize],
    seed: u64,
    cfg: &SolverConfig,
    grid: &[f64],
    opts: EnsembleOptions,
) -> Result<Vec<EnsembleResult>, EnsembleError> {
    delay_model::validate(spec)?;
    hist.validate().map_err(SolverError::from)?;
    check_grid(grid, hist.t0, t_end)?;
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(EnsembleError::Input("sample counts must be >= 1".into()));
    }
    let mut order: Vec<usize> = checkpoints.to_vec();
    order.sort_unstable();
    order.dedup();
    let m_max = *order.last().unwrap();

    let mut acc = Running::new(grid.len());
    let mut kept: Vec<SampleRecord> = Vec::new();
    let mut snapshots: Vec<EnsembleResult> = Vec::with_capacity(order.len());
    let mut next_cp = 0;

    let snapshot =
        |acc: &Running, counts: Option<&Vec<usize>>, kept: &[SampleRecord]| EnsembleResult {
            grid: grid.to_vec(),
            mean: acc.mean.clone(),
            variance: acc.variance(),
            m: acc.n,
            atom_counts: counts.cloned(),
            seed,
            samples: opts.keep_samples.then(|| kept.to_vec()),
        };

    match spec {
        DelaySpec::Discrete { atoms } => {
            let draws: Vec<usize> = (1..=m_max as u64)
                .map(|i| delay_model::sample_atom_index(atoms, &mut sample_stream(seed, i)))
                .collect();
            let mut first_use = vec![None; atoms.len()];
            for (k, &a) in draws.iter().enumerate() {
                first_use[a].get_or_insert(k as u64 + 1);
            }
            let solved: Vec<Option<Result<Vec<f64>, EnsembleError>>> = (0..atoms.len())
                .into_par_iter()
                .map(|a| {
                    first_use[a].map(|index| {
                        let delay = atoms[a].delay;
                        sample_on_grid(alpha, delay, hist, t_end, cfg, grid).map_err(|source| {
                            EnsembleError::Sample {
                                index,
                                delay,
                                source,
                            }
                        })
                    })
                })
                .collect();
            // report the failure that the lowest sample index hits
            let mut failures: Vec<EnsembleError> = solved
                .iter()
                .filter_map(|s| s.as_ref().and_then(|r| r.as_ref().err().cloned()))
                .collect();
            failures.sort_by_key(|e| match e {
                EnsembleError::Sample { index, .. } => *index,
                _ => 0,
            });
            if let Some(e) = failures.into_iter().next() {
                return Err(e);
            }
            let cache: Vec<Option<Vec<f64>>> = solved
                .into_iter()
                .map(|s| s.map(|r| r.expect("checked above")))
                .collect();
            let mut counts = vec![0usize; atoms.len()];
            for (k, &a) in draws.iter().enumerate() {
                let values = cache[a].as_ref().expect("drawn atoms are solved");
                acc.push(values);
                counts[a] += 1;
                if opts.keep_samples {
                    kept.push(SampleRecord {
                        index: k as u64 + 1,
                        delay: atoms[a].delay,
                        values: values.clone(),
                    });
                }
                if acc.n == order[next_cp] {
                    snapshots.push(snapshot(&acc, Some(&counts), &kept));
                    next_cp += 1;
                }
            }
        }
        DelaySpec::Continuous { .. } => {
            let mut start = 1u64;
            while start <= m_max as u64 {
                let end = (start + CHUNK as u64 - 1).min(m_max as u64);
                let chunk: Vec<Result<(f64, Vec<f64>), EnsembleError>> = (start..=end)
                    .into_par_iter()
                    .map(|index| {
                        let delay =
                            delay_model::sample_delay(spec, &mut sample_stream(seed, index));
                        sample_on_grid(alpha, delay, hist, t_end, cfg, grid)
                            .map(|v| (delay, v))
                            .map_err(|source| EnsembleError::Sample {
                                index,
                                delay,
                                source,
                            })
                    })
                    .collect();
                for (offset, item) in chunk.into_iter().enumerate() {
                    let (delay, values) = item?;
                    acc.push(&values);
                    if opts.keep_samples {
                        kept.push(SampleRecord {
                            index: start + offset as u64,
                            delay,
                            values,
                        });
                    }
                    if acc.n == order[next_cp] {
                        snapshots.push(snapshot(&acc, None, &kept));
                        next_cp += 1;
                    }
                }
                start = end + 1;
            }
        }
    }
    // return in the caller's order
    Ok(checkpoints
        .iter()
        .map(|m| {
            snapshots
                .iter()
                .find(|s| s.m == *m)
                .cloned()
                .expect("every checkpoint was reached")
        })
        .collect())
}

/// Monte Carlo estimate `v_{R_M}` from `m` samples.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    m: usize,
    seed: u64,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<EnsembleResult, EnsembleError> {
    run_ensemble_with(
        alpha,
        spec,
        hist,
        t_end,
        m,
        seed,
        cfg,
        grid,
        EnsembleOptions::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn run_ensemble_with(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    m: usize,
    seed: u64,
    cfg: &SolverConfig,
    grid: &[f64],
    opts: EnsembleOptions,
) -> Result<EnsembleResult, EnsembleError> {
    let mut v = run_ensemble_checkpoints(alpha, spec, hist, t_end, &[m], seed, cfg, grid, opts)?;
    Ok(v.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixtureRepr {
    /// Exact `sum_i p_i v_i` as one piecewise polynomial.
    Exact(PiecewisePoly),
    /// Numerical per-delay trajectories combined on evaluation.
    Weighted(Vec<Trajectory>),
}

/// The limit `v_R` of the sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResult {
    pub repr: MixtureRepr,
    pub delays: Vec<f64>,
    pub weights: Vec<f64>,
    pub provenance: Provenance,
}

impl Evaluate for MixtureResult {
    fn domain(&self) -> (f64, f64) {
        match &self.repr {
            MixtureRepr::Exact(pp) => pp.domain(),
            MixtureRepr::Weighted(parts) => parts[0].domain(),
        }
    }

    fn value_at(&self, t: f64) -> Result<f64, DomainError> {
        match &self.repr {
            MixtureRepr::Exact(pp) => pp.eval(t),
            MixtureRepr::Weighted(parts) => {
                let mut s = 0.0;
                for (p, w) in parts.iter().zip(&self.weights) {
                    s += w * p.value_at(t)?;
                }
                Ok(s)
            }
        }
    }
}

fn discrete_atoms(spec: &DelaySpec) -> Result<Vec<(f64, f64)>, EnsembleError> {
    delay_model::validate(spec)?;
    match spec {
        DelaySpec::Discrete { atoms } => Ok(atoms.iter().map(|a| (a.delay, a.prob)).collect()),
        DelaySpec::Continuous { .. } => Err(EnsembleError::Input(
            "exact mixture needs a discrete delay law".into(),
        )),
    }
}

/// `v_R = sum_i p_i v_i`, each `v_i` from the exact solver.
pub fn exact_mixture(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
) -> Result<MixtureResult, EnsembleError> {
    let atoms = discrete_atoms(spec)?;
    let parts = atoms
        .iter()
        .map(|&(d, _)| solve_exact(&WeightedDelays::single(alpha, d)?, hist, t_end))
        .collect::<Result<Vec<_>, _>>()?;
    let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    let pp = polyexact::mix(&parts, &weights)?;
    Ok(MixtureResult {
        repr: MixtureRepr::Exact(pp),
        delays: atoms.iter().map(|a| a.0).collect(),
        weights,
        provenance: Provenance::Discrete,
    })
}

/// Weighted sum of numerically solved single-delay problems.
pub fn numeric_mixture(
    alpha: f64,
    atoms: &[(f64, f64)],
    hist: &HistorySpec,
    t_end: f64,
    cfg: &SolverConfig,
    provenance: Provenance,
) -> Result<MixtureResult, EnsembleError> {
    if atoms.is_empty() {
        return Err(EnsembleError::Input("no atoms to mix".into()));
    }
    let parts = atoms
        .par_iter()
        .map(|&(d, _)| solve_single(alpha, d, hist, t_end, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MixtureResult {
        repr: MixtureRepr::Weighted(parts),
        delays: atoms.iter().map(|a| a.0).collect(),
        weights: atoms.iter().map(|a| a.1).collect(),
        provenance,
    })
}

/// `v_R = integral of v_delta f(delta) d delta`, by `n_nodes`-point quadrature.
pub fn quadrature_mixture(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    n_nodes: usize,
    cfg: &SolverConfig,
) -> Result<MixtureResult, EnsembleError> {
    let atoms = delay_model::discretize(spec, n_nodes)?;
    let eps = spec.truncation_eps().unwrap_or_default();
    numeric_mixture(
        alpha,
        &atoms,
        hist,
        t_end,
        cfg,
        Provenance::Quadrature { n_nodes, eps },
    )
}

/// Best available `v_R`: exact for discrete laws without zero delays,
/// numeric for discrete laws with one, [`REFERENCE_NODES`]-point quadrature
/// for continuous laws.
pub fn reference_mixture(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<MixtureResult, EnsembleError> {
    match spec {
        DelaySpec::Discrete { atoms } if atoms.iter().any(|a| a.delay == 0.0) => {
            let atoms = discrete_atoms(spec)?;
            numeric_mixture(alpha, &atoms, hist, t_end, cfg, Provenance::Discrete)
        }
        DelaySpec::Discrete { .. } => exact_mixture(alpha, spec, hist, t_end),
        DelaySpec::Continuous { .. } => {
            quadrature_mixture(alpha, spec, hist, t_end, REFERENCE_NODES, cfg)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllnRow {
    pub m: usize,
    /// Mean over batches of `sup_grid |v_{R_M} - v_R|`.
    pub mean_error: f64,
    pub batch_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllnReport {
    pub rows: Vec<SllnRow>,
    /// Least-squares slope of `ln(mean_error)` against `ln(M)`; `None` when
    /// an error is zero or fewer than two sample sizes were given.
    pub slope: Option<f64>,
    pub seed: u64,
    pub n_batches: usize,
    pub reference: Provenance,
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Convergence of `v_{R_M}` towards `v_R` over sample sizes `ms`.
///
/// Batch `b` uses master seed `derive_seed(seed, b)`; within a batch the
/// sample sizes are nested prefixes of one sample sequence.
#[allow(clippy::too_many_arguments)]
pub fn slln_diagnostics(
    alpha: f64,
    spec: &DelaySpec,
    hist: &HistorySpec,
    t_end: f64,
    ms: &[usize],
    n_batches: usize,
    seed: u64,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<SllnReport, EnsembleError> {
    if n_batches == 0 || ms.is_empty() {
        return Err(EnsembleError::Input(
            "need at least one batch and one M".into(),
        ));
    }
    let reference = reference_mixture(alpha, spec, hist, t_end, cfg)?;
    let v_r = reference.sample(grid)?;
    let mut errors = vec![vec![0.0; n_batches]; ms.len()];
    #[allow(clippy::needless_range_loop)]
    for b in 0..n_batches {
        let runs = run_ensemble_checkpoints(
            alpha,
            spec,
            hist,
            t_end,
            ms,
            derive_seed(seed, b as u64),
            cfg,
            grid,
            EnsembleOptions::default(),
        )?;
        for (k, run) in runs.iter().enumerate() {
            errors[k][b] = run
                .mean
                .iter()
                .zip(&v_r)
                .map(|(a, r)| (a - r).abs())
                .fold(0.0, f64::max);
        }
    }
    let rows: Vec<SllnRow> = ms
        .iter()
        .zip(errors)
        .map(|(&m, batch_errors)| SllnRow {
            m,
            mean_error: batch_errors.iter().sum::<f64>() / n_batches as f64,
            batch_errors,
        })
        .collect();
    let slope = if rows.iter().all(|r| r.mean_error > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.mean_error.ln()).collect();
        ls_slope(&x, &y)
    } else {
        None
    };
    Ok(SllnReport {
        rows,
        slope,
        seed,
        n_batches,
        reference: reference.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::uniform_grid;
    use approx::assert_abs_diff_eq;

    fn one() -> HistorySpec {
        HistorySpec::constant(1.0)
    }

    fn canonical() -> DelaySpec {
        DelaySpec::discrete([(1.0, 0.5), (3.0, 0.5)])
    }

    #[test]
    fn point_mass_has_no_spread() {
        let grid = uniform_grid(0.0, 3.0, 0.1);
        let cfg = SolverConfig::new(1e-3);
        let r = run_ensemble(
            1.0,
            &DelaySpec::point_mass(1.0),
            &one(),
            3.0,
            7,
            1,
            &cfg,
            &grid,
        )
        .unwrap();
        assert_abs_diff_eq!(*r.mean.last().unwrap(), 37.0 / 6.0, epsilon = 1e-8);
        assert!(r.variance.iter().all(|&v| v <= 1e-20));
        assert_eq!(r.atom_counts, Some(vec![7]));
    }

    #[test]
    fn small_discrete_run_is_tally_weighted_and_reproducible() {
        let grid = uniform_grid(0.0, 3.0, 0.5);
        let cfg = SolverConfig::new(1e-3);
        let a = run_ensemble(1.0, &canonical(), &one(), 3.0, 4, 99, &cfg, &grid).unwrap();
        let b = run_ensemble(1.0, &canonical(), &one(), 3.0, 4, 99, &cfg, &grid).unwrap();
        assert_eq!(a, b);
        let counts = a.atom_counts.clone().unwrap();
        assert_eq!(counts.iter().sum::<usize>(), 4);
        let v1 = solve_single(1.0, 1.0, &one(), 3.0, &cfg).unwrap();
        let v2 = solve_single(1.0, 3.0, &one(), 3.0, &cfg).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let expect = (counts[0] as f64 * v1.eval_dense(t).unwrap()
                + counts[1] as f64 * v2.eval_dense(t).unwrap())
                / 4.0;
            assert_abs_diff_eq!(a.mean[k], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn checkpoints_match_separate_runs() {
        let grid = uniform_grid(0.0, 2.0, 0.25);
        let cfg = SolverConfig::new(1e-2);
        let spec = DelaySpec::uniform(1.0, 3.0);
        let both = run_ensemble_checkpoints(
            1.0,
            &spec,
            &one(),
            2.0,
            &[30, 5],
            3,
            &cfg,
            &grid,
            EnsembleOptions { keep_samples: true },
        )
        .unwrap();
        let five = run_ensemble(1.0, &spec, &one(), 2.0, 5, 3, &cfg, &grid).unwrap();
        assert_eq!(both[1].mean, five.mean);
        assert_eq!(both[1].variance, five.variance);
        assert_eq!(both[0].m, 30);
        assert_eq!(both[0].samples.as_ref().unwrap().len(), 30);
        assert!(five.samples.is_none());
    }

    #[test]
    fn input_errors() {
        let cfg = SolverConfig::new(1e-3);
        let grid = vec![0.0, 4.0];
        assert!(matches!(
            run_ensemble(1.0, &canonical(), &one(), 3.0, 4, 1, &cfg, &grid),
            Err(EnsembleError::Input(_))
        ));
        let bad = DelaySpec::discrete([(1.0, 0.6), (3.0, 0.5)]);
        assert!(matches!(
            run_ensemble(1.0, &bad, &one(), 3.0, 4, 1, &cfg, &[0.0]),
            Err(EnsembleError::Spec(_))
        ));
        assert!(run_ensemble(1.0, &canonical(), &one(), 3.0, 0, 1, &cfg, &[0.0]).is_err());
    }

    #[test]
    fn sample_errors_carry_index() {
        let gap = HistorySpec::new(
            0.0,
            crate::history::HistoryKind::PiecewiseTable {
                breakpoints: vec![-1.5, 0.0],
                coeffs: vec![vec![1.0]],
            },
        );
        let cfg = SolverConfig::new(1e-2);
        let err = run_ensemble(1.0, &canonical(), &gap, 3.0, 10, 5, &cfg, &[0.0, 1.0]).unwrap_err();
        match err {
            EnsembleError::Sample { index, delay, .. } => {
                assert_eq!(delay, 3.0);
                assert!(index >= 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn mixture_examples() {
        let m = exact_mixture(1.0, &canonical(), &one(), 3.0).unwrap();
        assert_abs_diff_eq!(m.value_at(3.0).unwrap(), 61.0 / 12.0, epsilon = 1e-13);
        let single = exact_mixture(1.0, &DelaySpec::point_mass(1.0), &one(), 3.0).unwrap();
        let direct = solve_exact(&WeightedDelays::single(1.0, 1.0).unwrap(), &one(), 3.0).unwrap();
        assert_eq!(single.repr, MixtureRepr::Exact(direct));
        let flat = exact_mixture(0.0, &canonical(), &HistorySpec::constant(2.0), 3.0).unwrap();
        assert_eq!(flat.value_at(2.2).unwrap(), 2.0);
        assert!(exact_mixture(1.0, &DelaySpec::uniform(1.0, 3.0), &one(), 3.0).is_err());
    }

    #[test]
    fn degenerate_quadrature_is_midpoint_solution() {
        let cfg = SolverConfig::new(1e-3);
        let q =
            quadrature_mixture(1.0, &DelaySpec::uniform(1.0, 3.0), &one(), 3.0, 1, &cfg).unwrap();
        let mid = solve_single(1.0, 2.0, &one(), 3.0, &cfg).unwrap();
        for t in [0.0, 1.3, 2.5, 3.0] {
            assert_eq!(q.value_at(t).unwrap(), mid.eval_dense(t).unwrap());
        }
        assert_eq!(
            q.provenance,
            Provenance::Quadrature {
                n_nodes: 1,
                eps: 1e-6
            }
        );
    }

    #[test]
    fn uniform_reference_matches_closed_form() {
        // E[v_delta(3)], delta ~ U[1, 3]: 1 + 3 + E[(3 - d)^2 / 2] + E[(3 - 2d)_+^3 / 6]
        let want = 4.0 + 2.0 / 3.0 + 1.0 / 96.0;
        let r = reference_mixture(
            1.0,
            &DelaySpec::uniform(1.0, 3.0),
            &one(),
            3.0,
            &SolverConfig::new(1e-3),
        )
        .unwrap();
        assert!((r.value_at(3.0).unwrap() - want).abs() < 1e-6);
        assert!((r.value_at(1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_delay_atoms_route_numerically() {
        let spec = DelaySpec::discrete([(0.0, 0.5), (1.0, 0.5)]);
        let cfg = SolverConfig::new(1e-3);
        let r = reference_mixture(-1.0, &spec, &one(), 2.0, &cfg).unwrap();
        assert!(matches!(r.repr, MixtureRepr::Weighted(_)));
        // on [0, 1]: 0.5 e^{-t} + 0.5 (1 - t)
        let t: f64 = 0.6;
        assert_abs_diff_eq!(
            r.value_at(t).unwrap(),
            0.5 * (-t).exp() + 0.5 * (1.0 - t),
            epsilon = 1e-10
        );
    }

    #[test]
    fn slln_point_mass_has_no_error() {
        let grid = uniform_grid(0.0, 3.0, 0.1);
        let cfg = SolverConfig::new(1e-3);
        let rep = slln_diagnostics(
            1.0,
            &DelaySpec::point_mass(1.0),
            &one(),
            3.0,
            &[10, 100],
            3,
            11,
            &cfg,
            &grid,
        )
        .unwrap();
        assert!(rep.rows.iter().all(|r| r.mean_error <= 1e-8));
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(
            ls_slope(&x, &[2.0, 1.5, 1.0]).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
        assert_eq!(ls_slope(&[1.0], &[1.0]), None);
    }
}

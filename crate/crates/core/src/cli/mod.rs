//! Command-line front end: `ddelay [--config FILE] [--seed N] <command>`.
//!
//! Every command reads one TOML [`RunConfig`], writes CSV files keyed by a
//! `t` column (values in `{:.16e}`) plus a JSON sidecar into the output
//! directory, and exits with 0 on success, 2 on a configuration error and
//! 3 on a solver or I/O failure.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::compare::{agreement_check, compare};
use crate::dde_solver::solve_numeric;
use crate::delay_model::{DelaySpec, Provenance};
use crate::distributed::{
    build_distributed, solve_distributed, DistributedProblem, DistributedSolution, SolveMode,
};
use crate::ensemble::{
    exact_mixture, numeric_mixture, quadrature_mixture, run_ensemble_with, slln_diagnostics,
    EnsembleOptions, MixtureResult,
};
use crate::eval::Evaluate;
use crate::polyexact::WeightedDelays;

pub use config::{DelayConfig, Problem, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ddelay",
    version,
    about = "Random versus distributed delay equations"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Writes the effective configuration (after overrides) to this path.
    #[arg(long, global = true)]
    dump_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve u' = alpha u(t - delay) for one fixed delay.
    Solve {
        #[arg(long)]
        delay: f64,
    },
    /// Monte Carlo sample mean over random delays.
    Ensemble,
    /// The mixture v_R = E[v_delay].
    Mixture,
    /// The distributed delay solution v_D.
    Distributed,
    /// v_R against v_D on the output grid.
    Compare,
    /// Convergence of the sample mean as M grows.
    Slln,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

fn config_err(msg: impl ToString) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        msg: msg.to_string(),
    }
}

fn solver_err(msg: impl ToString) -> Failure {
    Failure {
        code: EXIT_SOLVER,
        msg: msg.to_string(),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .ok_or_else(|| config_err("--config <FILE> is required"))?;
    let mut cfg = RunConfig::load(&path).map_err(config_err)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    let problem = cfg.problem().map_err(config_err)?;
    if let Some(dump) = &cli.dump_config {
        let text = cfg.to_toml().map_err(config_err)?;
        write_file(dump, &text)?;
    }
    let Some(command) = cli.command else {
        if cli.dump_config.is_some() {
            return Ok(());
        }
        return Err(config_err("no command given; see --help"));
    };
    std::fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| solver_err(format!("cannot create {}: {e}", cfg.output.dir.display())))?;
    let written = match command {
        Command::Solve { delay } => cmd_solve(&cfg, &problem, delay)?,
        Command::Ensemble => cmd_ensemble(&cfg, &problem)?,
        Command::Mixture => cmd_mixture(&cfg, &problem)?,
        Command::Distributed => cmd_distributed(&cfg, &problem)?,
        Command::Compare => cmd_compare(&cfg, &problem)?,
        Command::Slln => cmd_slln(&cfg, &problem)?,
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| solver_err(format!("cannot write {}: {e}", path.display())))
}

/// Writes a CSV whose first column is `t`.
fn write_csv(path: &Path, header: &[&str], grid: &[f64], cols: &[&[f64]]) -> Result<(), Failure> {
    let mut s = String::with_capacity(grid.len() * 24 * (cols.len() + 1));
    s.push_str(&header.join(","));
    s.push('\n');
    for (i, &t) in grid.iter().enumerate() {
        s.push_str(&num(t));
        for c in cols {
            let _ = write!(s, ",{}", num(c[i]));
        }
        s.push('\n');
    }
    write_file(path, &s)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(solver_err)?;
    write_file(path, &(text + "\n"))
}

fn meta(cfg: &RunConfig) -> serde_json::Value {
    json!({ "version": env!("CARGO_PKG_VERSION"), "config": cfg })
}

fn has_zero_delay(spec: &DelaySpec) -> bool {
    matches!(spec, DelaySpec::Discrete { atoms } if atoms.iter().any(|a| a.delay == 0.0))
}

/// Exact for discrete laws without a zero delay, otherwise numerical.
fn exact_path(spec: &DelaySpec) -> bool {
    spec.is_discrete() && !has_zero_delay(spec)
}

fn mixture(cfg: &RunConfig, p: &Problem) -> Result<MixtureResult, Failure> {
    let res = match &p.spec {
        DelaySpec::Discrete { atoms } if has_zero_delay(&p.spec) => {
            let atoms: Vec<_> = atoms.iter().map(|a| (a.delay, a.prob)).collect();
            numeric_mixture(
                p.alpha,
                &atoms,
                &p.hist,
                p.t_end,
                &p.solver,
                Provenance::Discrete,
            )
        }
        DelaySpec::Discrete { .. } => exact_mixture(p.alpha, &p.spec, &p.hist, p.t_end),
        DelaySpec::Continuous { .. } => {
            quadrature_mixture(p.alpha, &p.spec, &p.hist, p.t_end, cfg.n_nodes, &p.solver)
        }
    };
    res.map_err(solver_err)
}

fn distributed(
    cfg: &RunConfig,
    p: &Problem,
) -> Result<(DistributedSolution, DistributedProblem), Failure> {
    let prob = build_distributed(p.alpha, &p.spec, Some(cfg.n_nodes)).map_err(solver_err)?;
    let mode = if exact_path(&p.spec) {
        SolveMode::Exact
    } else {
        SolveMode::Numeric(p.solver.clone())
    };
    let sol = solve_distributed(&prob, &p.hist, p.t_end, &mode).map_err(solver_err)?;
    Ok((sol, prob))
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

fn cmd_solve(cfg: &RunConfig, p: &Problem, delay: f64) -> Result<Vec<PathBuf>, Failure> {
    let single = WeightedDelays::single(p.alpha, delay).map_err(config_err)?;
    let solver = p
        .solver
        .aligned_to(&single, &p.hist, p.t_end)
        .map_err(solver_err)?;
    let traj = solve_numeric(&single, &p.hist, p.t_end, &solver).map_err(solver_err)?;
    let values = traj.sample(&p.grid).map_err(solver_err)?;
    let csv = out(cfg, "solve.csv");
    write_csv(&csv, &["t", "value"], &p.grid, &[&values])?;
    Ok(vec![csv])
}

fn cmd_ensemble(cfg: &RunConfig, p: &Problem) -> Result<Vec<PathBuf>, Failure> {
    let opts = EnsembleOptions {
        keep_samples: cfg.output.keep_samples,
    };
    let res = run_ensemble_with(
        p.alpha, &p.spec, &p.hist, p.t_end, cfg.m, cfg.seed, &p.solver, &p.grid, opts,
    )
    .map_err(solver_err)?;
    let csv = out(cfg, "ensemble.csv");
    let se = res.stderr();
    write_csv(
        &csv,
        &["t", "mean", "variance", "stderr"],
        &p.grid,
        &[&res.mean, &res.variance, &se],
    )?;
    let mut files = vec![csv];
    if let Some(samples) = &res.samples {
        let mut s = String::from("index,delay,t,value\n");
        for r in samples {
            for (t, v) in p.grid.iter().zip(&r.values) {
                let _ = writeln!(s, "{},{},{},{}", r.index, num(r.delay), num(*t), num(*v));
            }
        }
        let path = out(cfg, "ensemble_samples.csv");
        write_file(&path, &s)?;
        files.push(path);
    }
    let mut side = meta(cfg);
    side["seed"] = json!(res.seed);
    side["m"] = json!(res.m);
    side["atom_counts"] = json!(res.atom_counts);
    let js = out(cfg, "ensemble.json");
    write_json(&js, &side)?;
    files.push(js);
    Ok(files)
}

fn cmd_mixture(cfg: &RunConfig, p: &Problem) -> Result<Vec<PathBuf>, Failure> {
    let mix = mixture(cfg, p)?;
    let values = mix.sample(&p.grid).map_err(solver_err)?;
    let csv = out(cfg, "mixture.csv");
    write_csv(&csv, &["t", "value"], &p.grid, &[&values])?;
    let mut side = meta(cfg);
    side["provenance"] = json!(mix.provenance);
    side["delays"] = json!(mix.delays);
    side["weights"] = json!(mix.weights);
    let js = out(cfg, "mixture.json");
    write_json(&js, &side)?;
    Ok(vec![csv, js])
}

fn cmd_distributed(cfg: &RunConfig, p: &Problem) -> Result<Vec<PathBuf>, Failure> {
    let (sol, prob) = distributed(cfg, p)?;
    let values = sol.sample(&p.grid).map_err(solver_err)?;
    let csv = out(cfg, "distributed.csv");
    write_csv(&csv, &["t", "value"], &p.grid, &[&values])?;
    let mut side = meta(cfg);
    side["provenance"] = json!(prob.provenance);
    side["effective_atoms"] = json!(prob.effective_atoms);
    let js = out(cfg, "distributed.json");
    write_json(&js, &side)?;
    Ok(vec![csv, js])
}

fn cmd_compare(cfg: &RunConfig, p: &Problem) -> Result<Vec<PathBuf>, Failure> {
    let mix = mixture(cfg, p)?;
    let (sol, prob) = distributed(cfg, p)?;
    let report = compare(&mix, &sol, &p.grid, cfg.tol)
        .map_err(solver_err)?
        .with_agreement_window(&p.spec, p.hist.t0);
    let csv = out(cfg, "compare.csv");
    let diff = report.abs_diff();
    write_csv(
        &csv,
        &["t", "vR", "vD", "absdiff"],
        &p.grid,
        &[&report.v_r, &report.v_d, &diff],
    )?;
    // Only meaningful for a discrete law with constant history.
    let agreement = agreement_check(&p.spec, &p.hist, &report).ok();
    let mut side = meta(cfg);
    side["sup_diff"] = json!(report.sup_diff);
    side["l2_diff"] = json!(report.l2_diff);
    side["first_divergence"] = json!(report.first_divergence);
    side["tol"] = json!(report.tol);
    side["agreement_window_end"] = json!(report.agreement_window_end);
    side["agreement"] = json!(agreement);
    side["provenance"] = json!(prob.provenance);
    let js = out(cfg, "compare.json");
    write_json(&js, &side)?;
    Ok(vec![csv, js])
}

fn cmd_slln(cfg: &RunConfig, p: &Problem) -> Result<Vec<PathBuf>, Failure> {
    let report = slln_diagnostics(
        p.alpha,
        &p.spec,
        &p.hist,
        p.t_end,
        &cfg.slln.ms,
        cfg.slln.batches,
        cfg.seed,
        &p.solver,
        &p.grid,
    )
    .map_err(solver_err)?;
    let mut s = String::from("M,mean_sup_error\n");
    for r in &report.rows {
        let _ = writeln!(s, "{},{}", r.m, num(r.mean_error));
    }
    let csv = out(cfg, "slln.csv");
    write_file(&csv, &s)?;
    let mut side = meta(cfg);
    side["report"] = json!(report);
    let js = out(cfg, "slln.json");
    write_json(&js, &side)?;
    Ok(vec![csv, js])
}

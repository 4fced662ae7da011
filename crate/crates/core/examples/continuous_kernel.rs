//! A uniform delay law: quadrature mixture, distributed solution, Monte Carlo.
//!
//! `cargo run --release --example continuous_kernel`

use ddelay::dde_solver::SolverConfig;
use ddelay::delay_model::DelaySpec;
use ddelay::distributed::{build_distributed, solve_distributed, SolveMode};
use ddelay::ensemble::{quadrature_mixture, run_ensemble};
use ddelay::eval::{uniform_grid, Evaluate};
use ddelay::history::HistorySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DelaySpec::uniform(1.0, 3.0);
    let hist = HistorySpec::constant(1.0);
    let cfg = SolverConfig::new(1e-3);
    let grid = uniform_grid(0.0, 3.0, 0.5);

    let mc = run_ensemble(1.0, &spec, &hist, 3.0, 10_000, 1, &cfg, &grid)?;
    let mut columns = Vec::new();
    for n in [8, 32, 64, 256] {
        let v_r = quadrature_mixture(1.0, &spec, &hist, 3.0, n, &cfg)?.sample(&grid)?;
        let mode = SolveMode::Numeric(cfg.clone());
        let v_d = solve_distributed(&build_distributed(1.0, &spec, Some(n))?, &hist, 3.0, &mode)?
            .sample(&grid)?;
        columns.push((n, v_r, v_d));
    }
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12}",
        "t", "MC", "se", "v_R(256)", "v_D(256)"
    );
    let (_, r256, d256) = &columns[3];
    let se = mc.stderr();
    for (i, t) in grid.iter().enumerate() {
        println!(
            "{t:4.1} {:12.8} {:12.2e} {:12.8} {:12.8}",
            mc.mean[i], se[i], r256[i], d256[i]
        );
    }
    for w in columns.windows(2) {
        let diff = w[0]
            .2
            .iter()
            .zip(&w[1].2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("v_D node change {} -> {}: {diff:.3e}", w[0].0, w[1].0);
    }
    Ok(())
}

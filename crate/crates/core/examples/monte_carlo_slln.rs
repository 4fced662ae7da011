//! Monte Carlo sample means converging at the CLT rate.
//!
//! `cargo run --release --example monte_carlo_slln`

use ddelay::dde_solver::SolverConfig;
use ddelay::delay_model::DelaySpec;
use ddelay::ensemble::{run_ensemble, slln_diagnostics};
use ddelay::eval::uniform_grid;
use ddelay::history::HistorySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DelaySpec::discrete([(1.0, 0.5), (3.0, 0.5)]);
    let hist = HistorySpec::constant(1.0);
    let cfg = SolverConfig::new(1e-3);
    let grid = uniform_grid(0.0, 3.0, 0.01);

    let run = run_ensemble(1.0, &spec, &hist, 3.0, 1000, 42, &cfg, &grid)?;
    let last = grid.len() - 1;
    println!(
        "M = 1000: mean at t = 3 is {:.6} +- {:.6}, tallies {:?}",
        run.mean[last],
        run.stderr()[last],
        run.atom_counts
    );

    let report = slln_diagnostics(
        1.0,
        &spec,
        &hist,
        3.0,
        &[100, 1000, 10_000],
        20,
        7,
        &cfg,
        &grid,
    )?;
    for row in &report.rows {
        println!("M = {:>6}: mean sup error {:.4e}", row.m, row.mean_error);
    }
    println!(
        "log-log slope {:.3} (expected about -0.5)",
        report.slope.unwrap_or(f64::NAN)
    );
    Ok(())
}

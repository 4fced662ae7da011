//! With a deterministic delay both averages reduce to the same solution.
//!
//! `cargo run --example point_mass_collapse`

use ddelay::dde_solver::SolverConfig;
use ddelay::delay_model::DelaySpec;
use ddelay::distributed::{build_distributed, solve_distributed, SolveMode};
use ddelay::ensemble::{exact_mixture, run_ensemble};
use ddelay::eval::{uniform_grid, Evaluate};
use ddelay::history::HistorySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DelaySpec::point_mass(2.0);
    let hist = HistorySpec::constant(1.0);
    let grid = uniform_grid(0.0, 5.0, 0.01);

    let mix = exact_mixture(1.0, &spec, &hist, 5.0)?.sample(&grid)?;
    let dist = solve_distributed(
        &build_distributed(1.0, &spec, None)?,
        &hist,
        5.0,
        &SolveMode::Exact,
    )?
    .sample(&grid)?;
    let ens = run_ensemble(
        1.0,
        &spec,
        &hist,
        5.0,
        50,
        3,
        &SolverConfig::new(1e-3),
        &grid,
    )?;

    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    println!("sup |mixture - distributed| = {:.1e}", sup(&mix, &dist));
    println!("sup |ensemble - mixture|    = {:.1e}", sup(&ens.mean, &mix));
    println!(
        "ensemble variance at t = 5: {:.1e}",
        ens.variance[grid.len() - 1]
    );
    println!("v(5) = {:.12}", mix[grid.len() - 1]);
    Ok(())
}

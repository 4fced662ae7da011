//! Fourth-order convergence of the Runge–Kutta solver against the exact one.
//!
//! `cargo run --release --example solver_convergence`

use ddelay::dde_solver::{solve_numeric, SolverConfig};
use ddelay::eval::{uniform_grid, Evaluate};
use ddelay::history::HistorySpec;
use ddelay::polyexact::{solve_exact, WeightedDelays};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prob = WeightedDelays::new(1.0, vec![(1.0, 0.5), (3.0, 0.5)])?;
    let hist = HistorySpec::constant(1.0);
    let t_end = 12.0;
    let exact = solve_exact(&prob, &hist, t_end)?;
    let grid = uniform_grid(0.0, t_end, 0.01);
    let want = exact.sample(&grid)?;

    let mut prev: Option<f64> = None;
    for h in [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3] {
        let cfg = SolverConfig::aligned(h, &prob, &hist, t_end)?;
        let got = solve_numeric(&prob, &hist, t_end, &cfg)?.sample(&grid)?;
        let err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        match prev {
            Some(p) => println!("h = {h:<7} max error {err:.3e}  ratio {:.2}", p / err),
            None => println!("h = {h:<7} max error {err:.3e}"),
        }
        prev = Some(err);
    }

    // Zero delay reduces to the ODE u' = -u.
    let ode = WeightedDelays::single(-1.0, 0.0)?;
    let tr = solve_numeric(&ode, &hist, 1.0, &SolverConfig::new(1e-3))?;
    println!(
        "u' = -u: u(1) = {:.12} (e^-1 = {:.12})",
        tr.eval_dense(1.0)?,
        (-1.0f64).exp()
    );
    Ok(())
}

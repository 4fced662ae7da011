//! Exact piecewise-polynomial solutions and their breakpoints.
//!
//! `cargo run --example method_of_steps`

use ddelay::history::{HistoryKind, HistorySpec};
use ddelay::polyexact::{breakpoints, solve_exact, WeightedDelays};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prob = WeightedDelays::single(1.0, 1.0)?;
    let sol = solve_exact(&prob, &HistorySpec::constant(1.0), 3.0)?;
    for (i, seg) in sol.segments().iter().enumerate() {
        let start = sol.breakpoints()[i];
        println!(
            "[{start}, {}]: coefficients in (t - {start}) = {seg:?}",
            sol.breakpoints()[i + 1]
        );
    }
    println!(
        "u(1), u(2), u(3) = {}, {}, {}",
        sol.eval(1.0)?,
        sol.eval(2.0)?,
        sol.eval(3.0)?
    );

    println!(
        "breakpoints for delays {{1, 1.5}} up to 4: {:?}",
        breakpoints(&[1.0, 1.5], 0.0, 4.0)?
    );

    // A non-constant history: u(t) = 1 + t on [-1, 0].
    let hist = HistorySpec::new(
        0.0,
        HistoryKind::Polynomial {
            coeffs: vec![1.0, 1.0],
        },
    );
    let sol = solve_exact(
        &WeightedDelays::new(-0.5, vec![(0.5, 0.4), (1.0, 0.6)])?,
        &hist,
        4.0,
    )?;
    println!(
        "two delays, linear history: u(4) = {:.12}, max degree {}, continuity defect {:.1e}",
        sol.eval(4.0)?,
        sol.max_degree(),
        sol.max_continuity_defect()
    );
    Ok(())
}

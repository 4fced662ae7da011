//! Averaging solutions versus averaging models on the two-delay instance.
//!
//! `cargo run --example canonical_instance`

use ddelay::compare::{agreement_check, compare};
use ddelay::delay_model::DelaySpec;
use ddelay::distributed::{build_distributed, solve_distributed, SolveMode};
use ddelay::ensemble::exact_mixture;
use ddelay::eval::uniform_grid;
use ddelay::history::HistorySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DelaySpec::discrete([(1.0, 0.5), (3.0, 0.5)]);
    let hist = HistorySpec::constant(1.0);

    let v_r = exact_mixture(1.0, &spec, &hist, 3.0)?;
    let v_d = solve_distributed(
        &build_distributed(1.0, &spec, None)?,
        &hist,
        3.0,
        &SolveMode::Exact,
    )?;

    let grid = uniform_grid(0.0, 3.0, 0.25);
    let report = compare(&v_r, &v_d, &grid, 1e-10)?.with_agreement_window(&spec, 0.0);
    println!("{:>5} {:>12} {:>12} {:>10}", "t", "v_R", "v_D", "|diff|");
    for (i, t) in grid.iter().enumerate() {
        println!(
            "{t:5.2} {:12.8} {:12.8} {:10.2e}",
            report.v_r[i],
            report.v_d[i],
            (report.v_r[i] - report.v_d[i]).abs()
        );
    }
    println!("v_R(3) = 61/12 = {:.12}", 61.0 / 12.0);
    println!("v_D(3) = 121/24 = {:.12}", 121.0 / 24.0);
    println!("first divergence: {:?}", report.first_divergence);
    let agreement = agreement_check(&spec, &hist, &report)?;
    println!(
        "agreement on [0, {}]: {} (max diff {:.1e})",
        agreement.window_end, agreement.pass, agreement.max_diff
    );
    Ok(())
}

//! Delay laws: validation, quantiles, sampling and quadrature discretization.
//!
//! `cargo run --example delay_laws`

use ddelay::delay_model::{self, DelaySpec};
use ddelay::rng::sample_stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let laws = [
        ("discrete", DelaySpec::discrete([(1.0, 0.5), (3.0, 0.5)])),
        ("uniform", DelaySpec::uniform(1.0, 3.0)),
        ("exponential", DelaySpec::exponential(2.0, 1e-6)),
        (
            "tabulated",
            DelaySpec::tabulated(vec![(0.0, 0.5), (0.5, 1.0), (1.0, 2.5)], 1e-6),
        ),
    ];
    for (name, spec) in &laws {
        delay_model::validate(spec)?;
        let median = delay_model::quantile(spec, 0.5)?;
        let mut rng = sample_stream(1, 0);
        let draws: Vec<f64> = (0..5)
            .map(|_| delay_model::sample_delay(spec, &mut rng))
            .collect();
        println!("{name}: median {median:.4}, draws {draws:.3?}");
        if !spec.is_discrete() {
            let atoms = delay_model::discretize(spec, 4)?;
            println!("  4-node discretization {atoms:.5?}");
        }
    }

    let bad = DelaySpec::discrete([(1.0, 0.5), (3.0, 0.6)]);
    println!(
        "invalid law rejected: {}",
        delay_model::validate(&bad).unwrap_err()
    );
    Ok(())
}

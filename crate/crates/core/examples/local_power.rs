//! Type-II error under local alternatives `θ_0 + a/√n` against the
//! noncentral chi-square prediction, for the two-state chain whose
//! long-run variance is known in closed form.
//!
//! ```bash
//! cargo run --release --example local_power -- [REPS]
//! ```

use rebel::chain_models::stationary_distribution;
use rebel::inference::predicted_power;
use rebel::mc::{run_power_comparison, two_state};
use nalgebra::DMatrix;

fn main() -> rebel::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(500, |s| s.parse().expect("REPS"));
    let (a, b) = (0.3, 0.2);
    let pi = stationary_distribution(&[vec![1.0 - a, a], vec![b, 1.0 - b]]);
    let lambda = 1.0 - a - b;
    let sigma = pi[0] * pi[1] * (1.0 + lambda) / (1.0 - lambda);
    println!("long-run variance pi0 pi1 (1 + lambda) / (1 - lambda) = {sigma:.4}");
    for d in [1.0, 2.0, 3.0, 4.0] {
        let p = predicted_power(&[d], &DMatrix::from_element(1, 1, sigma), 0.95)?;
        println!("  a = {d}: predicted power {p:.3}");
    }

    let mut spec = two_state(5000, reps, 1);
    spec.alternatives = vec![0.0, 2.0, 4.0];
    let cmp = run_power_comparison(&spec, Some(sigma))?;
    println!("\n{:>6} {:>12} {:>12}", "a", "type II", "predicted");
    for r in &cmp.rows {
        println!("{:>6} {:>8.3} ±{:.3} {:>12.3}", r.alternative, r.empirical_acceptance, r.se, r.predicted_acceptance);
    }
    Ok(())
}

//! Simulates the three built-in processes and prints summary statistics.
//!
//! ```bash
//! cargo run --release --example simulate_chains
//! ```

use rebel::chain_models::{simulate, stationary_distribution, ModelKind, ModelSpec};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

fn main() -> rebel::Result<()> {
    let n = 100_000;

    let ar = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 1), n)?;
    let (m, v) = mean_var(&ar.coordinate(0));
    println!("AR(1) rho=0.9   mean {m:+.4}  var {v:.3}  (stationary var {:.3})", 4.0 / (1.0 - 0.81));

    let transition = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
    let pi = stationary_distribution(&transition);
    let kind = ModelKind::FiniteMarkov { transition, initial_state: 0 };
    let two = simulate(&ModelSpec::new(kind, 1), n)?;
    let (m, _) = mean_var(&two.coordinate(0));
    println!("two-state       mean {m:.4}  (pi(1) = {:.4})", pi[1]);

    let tg = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), 1), n)?;
    let xs = tg.coordinate(0);
    let (m, v) = mean_var(&xs);
    let above = xs.iter().filter(|&&x| x >= 10.0).count() as f64 / n as f64;
    println!("TGARCH          mean {m:.3}  var {v:.2}  P(X >= 10) ~ {above:.4}");

    let mut out = Vec::new();
    simulate(&ModelSpec::new(ModelKind::tgarch_reference(), 1), 5)?.write_csv(&mut out)?;
    print!("\nfirst rows as CSV:\n{}", String::from_utf8_lossy(&out));
    Ok(())
}

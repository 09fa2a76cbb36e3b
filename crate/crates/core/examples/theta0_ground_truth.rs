//! `P(X >= 10)` under the stationary TGARCH law from long simulations.
//!
//! ```bash
//! cargo run --release --example theta0_ground_truth -- [SEEDS] [N]
//! ```

use rebel::chain_models::{simulate, ModelKind, ModelSpec};
use rebel::mc::TGARCH_THETA0;

fn main() -> rebel::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(4, |s| s.parse().expect("SEEDS"));
    let n: usize = args.next().map_or(1_000_000, |s| s.parse().expect("N"));
    let mut freqs = Vec::new();
    for seed in 0..seeds {
        let path = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), seed), n)?;
        let f = path.states().filter(|x| x[0] >= 10.0).count() as f64 / n as f64;
        println!("seed {seed}: {f:.4}");
        freqs.push(f);
    }
    let m = freqs.iter().sum::<f64>() / freqs.len() as f64;
    let sd = (freqs.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (freqs.len().max(2) - 1) as f64).sqrt();
    println!("mean {m:.4} (sd across seeds {sd:.4}); reference value {TGARCH_THETA0}");
    Ok(())
}

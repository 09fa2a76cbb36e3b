//! Splitting with the true transition density. For the AR(1) chain with
//! uniform innovations on `[-√12, √12]` the density is flat on `[-a, a]²`
//! when `a (1 + ρ) <= √12`, so every pair of consecutive visits is a
//! regeneration and the blocks are exactly i.i.d. The resulting coverage
//! is what ReBEL can reach without density estimation error.
//!
//! ```bash
//! cargo run --release --example exact_split_ar1 -- [REPS]
//! ```

use rayon::prelude::*;
use rebel::chain_models::{simulate, ModelKind, ModelSpec};
use rebel::el_core::el_ratio;
use rebel::regeneration::{evaluate_small_set, split, PairDensities, SmallSetBox, TransitionDensity};
use rebel::rng::replication_seed;

struct UniformAr {
    rho: f64,
}

impl TransitionDensity for UniformAr {
    fn dim(&self) -> usize {
        1
    }
    fn density(&self, x: &[f64], y: &[f64]) -> f64 {
        let h = 12f64.sqrt();
        if (y[0] - self.rho * x[0]).abs() <= h { 0.5 / h } else { 0.0 }
    }
}

fn main() -> rebel::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("REPS"));
    let rho = 0.9;
    let a = 12f64.sqrt() / (1.0 + rho);
    let truth = UniformAr { rho };
    let crit = rebel::dist::chi2_quantile(0.95, 1);
    for n in [250, 500, 1000, 4000] {
        let covered: usize = (0..reps)
            .into_par_iter()
            .map(|i| {
                let seed = replication_seed(7, i as u64);
                let path = simulate(&ModelSpec::new(ModelKind::AR1Uniform { rho }, seed), n).unwrap();
                let bounds = SmallSetBox::cube(-a, a, 1).unwrap();
                let small = evaluate_small_set(&path, &truth, &bounds, Some(50), &mut PairDensities::new(n)).unwrap();
                let Ok(out) = split(&path, &small, Some(&truth), seed) else { return 0 };
                let y: Vec<Vec<f64>> = out
                    .partition
                    .complete_blocks()
                    .map(|b| vec![b.positions().map(|i| path.state(i)[0]).sum::<f64>()])
                    .collect();
                match el_ratio(&y) {
                    Ok(s) if y.len() >= 2 && s.statistic() <= crit => 1,
                    _ => 0,
                }
            })
            .sum();
        println!("n = {n:>4}: coverage {:.3} over {reps} replications", covered as f64 / reps as f64);
    }
    Ok(())
}

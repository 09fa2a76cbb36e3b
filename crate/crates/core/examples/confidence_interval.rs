//! ReBEL interval for the stationary mean of a two-state chain, the
//! corrected statistic, and the likelihood curve around the estimate.
//!
//! ```bash
//! cargo run --release --example confidence_interval
//! ```

use rebel::chain_models::{simulate, ModelKind, ModelSpec};
use rebel::el_core::MeanModel;
use rebel::inference::{asymptotic_estimates, confidence_interval, likelihood_curve, mele, CiOptions, StatisticKind};
use rebel::regeneration::atomic_blocks;

fn main() -> rebel::Result<()> {
    let kind = ModelKind::FiniteMarkov { transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]], initial_state: 0 };
    let path = simulate(&ModelSpec::new(kind, 11), 2000)?;
    let part = atomic_blocks(&path, |x| x[0] == 0.0)?;
    let model = MeanModel::scalar();

    let est = mele(&path, &part, &model, &[0.5], 100)?;
    let asym = asymptotic_estimates(&path, &part, &model, &est.theta)?;
    println!("MELE {:.5} (se {:.5}), true mean 0.6", est.theta[0], asym.standard_errors()[0]);

    let ci = confidence_interval(&path, &part, &model, &CiOptions::new(0.95))?;
    println!("95% interval [{:.5}, {:.5}], chi2 critical value {:.4}", ci.lower, ci.upper, ci.critical_value);

    let mut opts = CiOptions::new(0.95);
    opts.kind = StatisticKind::Corrected;
    let corrected = confidence_interval(&path, &part, &model, &opts)?;
    println!("corrected       [{:.5}, {:.5}]", corrected.lower, corrected.upper);

    let grid: Vec<f64> = (0..=12).map(|k| ci.lower - 0.02 + (ci.upper - ci.lower + 0.04) * k as f64 / 12.0).collect();
    for (t, s) in likelihood_curve(&path, &part, &model, &grid) {
        let bar = "#".repeat((s * 4.0).min(60.0) as usize);
        println!("  {t:.4} {s:>8.3} {bar}");
    }
    Ok(())
}

//! The four interval methods side by side for `P(X >= 10)` on one TGARCH
//! path: ReBEL, block EL, plain mean and truncated mean with block-bootstrap
//! variance.
//!
//! ```bash
//! cargo run --release --example baselines
//! ```

use rebel::baselines::{bel_interval, mean_interval, trunc_interval, BlockLength};
use rebel::chain_models::{simulate, stack, ModelKind, ModelSpec};
use rebel::el_core::IndicatorGe;
use rebel::inference::{confidence_interval, CiOptions};
use rebel::mc::{TGARCH_SMALL_SET, TGARCH_THETA0};
use rebel::regeneration::{estimate_transition_density, evaluate_small_set, split_with, Bandwidth, PairDensities, SmallSetBox};

fn main() -> rebel::Result<()> {
    let path = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), 3), 1000)?;
    let stacked = stack(&path, 2)?;
    let density = estimate_transition_density(&stacked, &Bandwidth::Auto)?;
    let mut pairs = PairDensities::new(stacked.len());
    let (lo, hi) = TGARCH_SMALL_SET;
    let small = evaluate_small_set(&stacked, &density, &SmallSetBox::cube(lo, hi, 2)?, None, &mut pairs)?;
    let part = split_with(&stacked, &small, Some(&density), 3, &mut pairs)?.partition;
    println!("{} complete blocks; theta_0 = {TGARCH_THETA0}", part.complete_count());

    let model = IndicatorGe::new(10.0);
    let g = |x: &[f64]| model.indicator(x);
    let rebel = confidence_interval(&stacked, &part, &model, &CiOptions::new(0.95))?;
    let bel = bel_interval(&path, g, BlockLength::Auto, 0.95)?.ci;
    let mean = mean_interval(&path, g, BlockLength::Auto, 500, 0.95, 3)?.ci;
    let trunc = trunc_interval(&stacked, &part, g, BlockLength::Auto, 500, 0.95, 3)?.ci;
    for (name, ci) in [("rebel", rebel), ("bel", bel), ("mean", mean), ("trunc", trunc)] {
        println!("{name:>6}: {:.4}  [{:.4}, {:.4}]  width {:.4}", ci.estimate, ci.lower, ci.upper, ci.width());
    }
    Ok(())
}

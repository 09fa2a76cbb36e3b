//! Approximate regeneration of the TGARCH chain: stack to order 2, estimate
//! the transition density, and split on the small set `[-1.3, 4.7]²`.
//!
//! ```bash
//! cargo run --release --example nummelin_split
//! ```

use rebel::chain_models::{simulate, stack, ModelKind, ModelSpec};
use rebel::mc::TGARCH_SMALL_SET;
use rebel::regeneration::{estimate_transition_density, evaluate_small_set, split_with, Bandwidth, PairDensities, SmallSetBox};

fn main() -> rebel::Result<()> {
    let path = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), 2), 1000)?;
    let stacked = stack(&path, 2)?;

    let density = estimate_transition_density(&stacked, &Bandwidth::Auto)?;
    println!("bandwidth {:?}", density.bandwidth());

    let (lo, hi) = TGARCH_SMALL_SET;
    let mut pairs = PairDensities::new(stacked.len());
    let small = evaluate_small_set(&stacked, &density, &SmallSetBox::cube(lo, hi, 2)?, None, &mut pairs)?;
    println!(
        "S = [{lo}, {hi}]^2: delta {:.4}, {} visits, {:.1} expected regenerations",
        small.delta, small.visits, small.expected_regenerations
    );
    println!("minorization gap on the grid: {:.2e}", small.minorization_gap(&density));

    let out = split_with(&stacked, &small, Some(&density), 2, &mut pairs)?;
    let times = out.partition.regeneration_times();
    println!("{} renewal times ({} clamped parameters)", times.len(), out.clamped);
    println!("renewals at {:?}", times.iter().map(|t| t + 1).collect::<Vec<_>>());
    for b in out.partition.complete_blocks().take(4) {
        println!("  block [{}, {}] length {}", b.start, b.end, b.len());
    }
    Ok(())
}

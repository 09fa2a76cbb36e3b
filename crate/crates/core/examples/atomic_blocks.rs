//! Exact regeneration blocks of a two-state chain at visits to state 0.
//!
//! ```bash
//! cargo run --example atomic_blocks
//! ```

use rebel::chain_models::{simulate, stationary_distribution, ModelKind, ModelSpec};
use rebel::regeneration::atomic_blocks;

fn main() -> rebel::Result<()> {
    let transition = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
    let pi = stationary_distribution(&transition);
    let kind = ModelKind::FiniteMarkov { transition, initial_state: 0 };
    let path = simulate(&ModelSpec::new(kind, 7), 5000)?;

    let part = atomic_blocks(&path, |x| x[0] == 0.0)?;
    println!("{} visits to the atom, {} complete blocks", part.regeneration_times().len(), part.complete_count());
    println!("expected visits n pi(0) = {:.0}", 5000.0 * pi[0]);

    let mean_len = part.complete_length() as f64 / part.complete_count() as f64;
    println!("mean block length {mean_len:.3}, Kac's return time 1/pi(0) = {:.3}", 1.0 / pi[0]);

    let first = part.first_block();
    println!("dropped first block [{}, {}], last block [{}, {}]", first.start, first.end, part.last_block().start, part.last_block().end);
    for b in part.complete_blocks().take(5) {
        let states: Vec<f64> = b.positions().map(|i| path.state(i)[0]).collect();
        println!("  [{:>3}, {:>3}] {:?}", b.start, b.end, states);
    }
    Ok(())
}

//! Coverage and type-II error for `P(X >= 10)` under the TGARCH process:
//! acceptance rates at `θ_0`, `θ_0 + 5/√n` and `θ_0 + 10/√n`.
//!
//! ```bash
//! cargo run --release --example tgarch_table2 -- [REPS] [N] [SEED]
//! ```

use rebel::mc::{run_coverage, table2};

fn main() -> rebel::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(200, |s| s.parse().expect("REPS"));
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("N"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("SEED"));
    let report = run_coverage(&table2(n, reps, seed))?;
    print!("{}", report.pretty());
    for c in &report.cells {
        let f = &c.failures;
        if f.total() + f.unbounded > 0 {
            println!(
                "{:>6} alt {:>4}: {} no-regeneration, {} too few blocks, {} other, {} outside the hull",
                c.method.name(),
                c.alternative,
                f.no_regeneration,
                f.not_enough_blocks,
                f.not_converged + f.other,
                f.unbounded
            );
        }
    }
    println!("({:.1} s)", report.runtime_secs);
    Ok(())
}

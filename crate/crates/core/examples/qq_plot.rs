//! Replications of `2 r_n(θ_0)` in the TGARCH setting against `χ²_1`.
//! Writes the QQ pairs as CSV when an output path is given.
//!
//! ```bash
//! cargo run --release --example qq_plot -- [REPS] [N] [OUT.csv]
//! ```

use std::fs::File;

use rebel::mc::{qqplot, run_qq};

fn main() -> rebel::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(100, |s| s.parse().expect("REPS"));
    let n: usize = args.next().map_or(2000, |s| s.parse().expect("N"));
    let report = run_qq(&qqplot(n, reps, 1))?;
    println!("{} statistics, {} failed replications", report.statistics.len(), report.failures.total());
    println!("KS distance to chi2(1): {:.4}", report.ks_distance);
    for m in &report.markers {
        println!("  q{:.2}: empirical {:>7.4}  chi2 {:.4}", m.prob, m.empirical, m.reference);
    }
    if let Some(out) = args.next() {
        report.write_csv(File::create(&out)?)?;
        println!("wrote {out}");
    }
    Ok(())
}

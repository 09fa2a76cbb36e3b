//! Coverage of 95% intervals for the AR(1) mean, ReBEL against BEL.
//!
//! ```bash
//! cargo run --release --example coverage_table1 -- [REPS] [SEED]
//! ```

use rebel::mc::{run_coverage, table1};

fn main() -> rebel::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(200, |s| s.parse().expect("REPS"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("SEED"));
    for n in [250, 500, 1000] {
        let report = run_coverage(&table1(n, reps, seed))?;
        print!("{}", report.pretty());
        println!("({:.1} s)\n", report.runtime_secs);
    }
    Ok(())
}

//! The empirical likelihood dual on a handful of block moments.
//!
//! ```bash
//! cargo run --example el_ratio
//! ```

use rebel::el_core::el_ratio;

fn main() -> rebel::Result<()> {
    let y = vec![vec![-1.0], vec![2.0]];
    let s = el_ratio(&y)?;
    println!("Y = {{-1, 2}}: r = {:.12} (log 9/8 = {:.12})", s.ratio, (9.0f64 / 8.0).ln());
    println!("  lambda {:?}, weights {:?}, {} Newton steps", s.lambda, s.weights, s.iterations);
    let balance: f64 = s.weights.iter().zip(&y).map(|(q, v)| q * v[0]).sum();
    println!("  sum q_j Y_j = {balance:.2e}");

    let y2 = vec![vec![1.0, 0.5], vec![-0.5, 0.2], vec![-0.2, -1.0], vec![0.4, 0.6]];
    let s2 = el_ratio(&y2)?;
    println!("bivariate: 2r = {:.5}, status {:?}", s2.statistic(), s2.status);

    let outside = el_ratio(&[vec![1.0], vec![2.0], vec![3.0]])?;
    println!("zero outside the hull: unbounded = {}, 2r = {}", outside.is_unbounded(), outside.statistic());
    Ok(())
}

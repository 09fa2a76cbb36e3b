//! Order heuristic on a TGARCH path: stack to order k, split, and test the
//! lag-one correlation of the block moments until it is not rejected.
//!
//! ```bash
//! cargo run --release --example order_estimation -- [SEED] [N]
//! ```

use rebel::chain_models::{simulate, ModelKind, ModelSpec};
use rebel::el_core::MeanModel;
use rebel::mc::TGARCH_SMALL_SET;
use rebel::regeneration::{estimate_order, OrderContext};

fn main() -> rebel::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("SEED"));
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("N"));
    let path = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), seed), n)?;
    let model = MeanModel::scalar();
    let ctx = OrderContext::new(&model, vec![TGARCH_SMALL_SET], seed);
    let est = estimate_order(&path, 3, &ctx)?;
    for s in &est.steps {
        println!(
            "k = {}: {:>3} visits, {:>3} blocks, rho {:+.3}, t {:+.2}, p {:.3}{}",
            s.order,
            s.visits,
            s.blocks,
            s.rho,
            s.t_stat,
            s.p_value,
            if s.rejected { "  rejected" } else { "" }
        );
    }
    println!("estimated order {}{}", est.order, if est.saturated { " (every order rejected)" } else { "" });
    Ok(())
}

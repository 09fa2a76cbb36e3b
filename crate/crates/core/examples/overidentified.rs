//! More moments than parameters: the over-identification test and a
//! profiled interval for one coordinate of a vector parameter.
//!
//! ```bash
//! cargo run --release --example overidentified
//! ```

use rebel::chain_models::{simulate, ModelKind, ModelSpec};
use rebel::el_core::{PolyTerm, PolynomialMoments};
use rebel::inference::{asymptotic_estimates, mele, overid_test, subvector_interval, SearchBounds};
use rebel::regeneration::atomic_blocks;

fn main() -> rebel::Result<()> {
    // A doubly stochastic chain on {0, 1, 2} has the uniform stationary law,
    // so E x² = 5/3 is known: two moments for the one parameter E x.
    let kind = ModelKind::FiniteMarkov {
        transition: vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]],
        initial_state: 0,
    };
    let path = simulate(&ModelSpec::new(kind, 5), 3000)?;
    let part = atomic_blocks(&path, |x| x[0] == 0.0)?;
    let model = PolynomialMoments::new(
        1,
        vec![
            PolyTerm::Raw { coordinate: 0, power: 1, param: Some(0), offset: 0.0 },
            PolyTerm::Raw { coordinate: 0, power: 2, param: None, offset: 5.0 / 3.0 },
        ],
    )?;
    let t = overid_test(&path, &part, &model, &[1.0])?;
    println!("over-identification: 2r = {:.4} on {} df, p = {:.3}, theta {:.4}", t.statistic, t.df, t.p_value, t.theta[0]);

    // Three states, parameters (E x, E x²); interval for E x with E x² profiled.
    let kind = ModelKind::FiniteMarkov {
        transition: vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]],
        initial_state: 0,
    };
    let path = simulate(&ModelSpec::new(kind, 4), 3000)?;
    let part = atomic_blocks(&path, |x| x[0] == 0.0)?;
    let model = PolynomialMoments::new(
        2,
        vec![
            PolyTerm::Raw { coordinate: 0, power: 1, param: Some(0), offset: 0.0 },
            PolyTerm::Raw { coordinate: 0, power: 2, param: Some(1), offset: 0.0 },
        ],
    )?;
    let est = mele(&path, &part, &model, &[1.0, 1.5], 4000)?;
    let asym = asymptotic_estimates(&path, &part, &model, &est.theta)?;
    println!("MELE {:?}, se {:?}", est.theta, asym.standard_errors());
    let ci = subvector_interval(&path, &part, &model, 0.95, &est.theta, SearchBounds::default())?;
    println!("profiled 95% interval for E x: [{:.4}, {:.4}]", ci.lower, ci.upper);
    Ok(())
}

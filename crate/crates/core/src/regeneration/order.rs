use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{estimate_transition_density, select_small_set, split, Bandwidth, SelectionOptions, SmallSetBox};
use crate::chain_models::{stack, ChainPath};
use crate::el_core::{block_moments, MomentModel};
use crate::error::{invalid, Error, Result};
use crate::inference::mele;

/// Settings for [`estimate_order`].
pub struct OrderContext<'a> {
    pub model: &'a dyn MomentModel,
    /// Candidate intervals `S`; at order `k` the small set is `S^{k d}`.
    pub intervals: Vec<(f64, f64)>,
    pub bandwidth: Bandwidth,
    pub grid: Option<usize>,
    pub seed: u64,
    pub significance: f64,
    pub min_blocks: usize,
    /// Start of the estimate of `θ` for models without a closed form.
    pub theta_init: Vec<f64>,
}

impl<'a> OrderContext<'a> {
    pub fn new(model: &'a dyn MomentModel, intervals: Vec<(f64, f64)>, seed: u64) -> Self {
        Self {
            model,
            intervals,
            bandwidth: Bandwidth::Auto,
            grid: None,
            seed,
            significance: 0.05,
            min_blocks: 10,
            theta_init: vec![0.0; model.param_dim()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStep {
    pub order: usize,
    pub visits: usize,
    pub blocks: usize,
    pub theta: Vec<f64>,
    /// Slope of `Y_j` on `Y_{j-1}` (first moment component, no intercept).
    pub rho: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: usize,
    /// True when every order up to `max_k` was rejected.
    pub saturated: bool,
    pub steps: Vec<OrderStep>,
}

/// Slope, t statistic and two-sided p-value of the no-intercept regression
/// `y_t = ρ x_t + e_t`.
pub(crate) fn lag_one_t_test(series: &[f64]) -> (f64, f64, f64) {
    let x = &series[..series.len() - 1];
    let y = &series[1..];
    let m = x.len() as f64;
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    if sxx == 0.0 || m < 2.0 {
        return (0.0, 0.0, 1.0);
    }
    let rho = sxy / sxx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - rho * a).powi(2)).sum();
    let s2 = sse / (m - 1.0);
    if s2 == 0.0 {
        return (rho, f64::INFINITY, 0.0);
    }
    let t = rho / (s2 / sxx).sqrt();
    let p = 2.0 * StudentsT::new(0.0, 1.0, m - 1.0).unwrap().sf(t.abs());
    (rho, t, p)
}

/// Order heuristic: for `k = 1, 2, ...` stack the path to order `k`, build
/// approximate regeneration blocks, and test the lag-one correlation of the
/// block moments `Y_j = M(B_j, θ)`; the first `k` not rejected is returned.
pub fn estimate_order(path: &ChainPath, max_k: usize, ctx: &OrderContext<'_>) -> Result<OrderEstimate> {
    if max_k == 0 {
        return invalid("max_k must be at least 1");
    }
    if ctx.intervals.is_empty() {
        return invalid("no candidate intervals for the small set");
    }
    let mut steps: Vec<OrderStep> = Vec::new();
    for k in 1..=max_k {
        let stacked = stack(path, k)?;
        let dim = stacked.dim();
        let density = estimate_transition_density(&stacked, &ctx.bandwidth)?;
        let candidates: Vec<SmallSetBox> =
            ctx.intervals.iter().filter_map(|&(lo, hi)| SmallSetBox::cube(lo, hi, dim).ok()).collect();
        let options = SelectionOptions { grid: ctx.grid, ..Default::default() };
        let inconclusive = |blocks: usize, steps: &[OrderStep]| Error::OrderTestInconclusive {
            order: k,
            blocks,
            partial: steps.to_vec(),
        };
        let spec = match select_small_set(&stacked, &density, &candidates, &options) {
            Ok(s) => s,
            Err(Error::NoViableSmallSet { .. }) => return Err(inconclusive(0, &steps)),
            Err(e) => return Err(e),
        };
        let outcome = match split(&stacked, &spec, Some(&density), ctx.seed.wrapping_add(k as u64)) {
            Ok(o) => o,
            Err(Error::NoRegeneration { regenerations, .. }) => {
                return Err(inconclusive(regenerations.saturating_sub(1), &steps))
            }
            Err(e) => return Err(e),
        };
        let blocks = outcome.partition.complete_count();
        if blocks < ctx.min_blocks {
            return Err(inconclusive(blocks, &steps));
        }
        let theta = mele(&stacked, &outcome.partition, ctx.model, &ctx.theta_init, 2000)?.theta;
        let ys = block_moments(&stacked, &outcome.partition, ctx.model, &theta)?;
        let first: Vec<f64> = ys.iter().map(|y| y[0]).collect();
        let (rho, t_stat, p_value) = lag_one_t_test(&first);
        let rejected = p_value < ctx.significance;
        steps.push(OrderStep { order: k, visits: outcome.visits, blocks, theta, rho, t_stat, p_value, rejected });
        if !rejected {
            return Ok(OrderEstimate { order: k, saturated: false, steps });
        }
    }
    Ok(OrderEstimate { order: max_k, saturated: true, steps })
}

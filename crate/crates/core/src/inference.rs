//! Statistics built on the empirical likelihood ratio: confidence regions,
//! the maximum EL estimator, over-identification and subvector tests,
//! asymptotic covariance, and power under local alternatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain_models::ChainPath;
use crate::dist::{chi2_quantile, chi2_sf, noncentral_chi2_cdf};
use crate::el_core::{block_moments, el_ratio_at, jacobian_or_fd, MomentModel};
use crate::error::{invalid, Error, Result};
use crate::optim::NelderMead;
use crate::regeneration::BlockPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticKind {
    /// `2 r(θ)`.
    PlainRatio,
    /// `2 r(θ) - 2 r(θ̃)`.
    Corrected,
    /// `2 inf_β r((γ, β)) - 2 r(θ̃)`.
    Subvector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub level: f64,
    pub critical_value: f64,
    pub kind: StatisticKind,
    /// No parameter value passes the test.
    pub empty: bool,
    /// The statistic stayed below the critical value up to the searched bound.
    pub lower_open: bool,
    pub upper_open: bool,
    /// `(θ, statistic)` pairs evaluated during the search.
    pub evaluations: Vec<(f64, f64)>,
}

impl ConfidenceInterval {
    pub fn contains(&self, theta: f64) -> bool {
        !self.empty && self.lower <= theta && theta <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mele {
    pub theta: Vec<f64>,
    pub ratio: f64,
    pub evaluations: usize,
    pub closed_form: bool,
}

fn ratio_or_inf(path: &ChainPath, partition: &BlockPartition, model: &dyn MomentModel, theta: &[f64]) -> f64 {
    el_ratio_at(path, partition, model, theta).map(|s| s.ratio).unwrap_or(f64::INFINITY)
}

fn initial_steps(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| 0.1 * t.abs().max(0.5)).collect()
}

/// Block-ratio estimate `Σ_{complete blocks} g(X_i) / (τ(l+1) - τ(1))` for
/// location models `m = g(x) - θ`; `None` for other models.
pub fn location_estimate(path: &ChainPath, partition: &BlockPartition, model: &dyn MomentModel) -> Option<Vec<f64>> {
    let r = model.moment_dim();
    if r != model.param_dim() || path.is_empty() {
        return None;
    }
    let mut buf = vec![0.0; r];
    if !model.location_target(path.state(0), &mut buf) {
        return None;
    }
    let mut sum = vec![0.0; r];
    for b in partition.complete_blocks() {
        for i in b.positions() {
            model.location_target(path.state(i), &mut buf);
            for (s, v) in sum.iter_mut().zip(&buf) {
                *s += v;
            }
        }
    }
    let len = partition.complete_length() as f64;
    Some(sum.into_iter().map(|s| s / len).collect())
}

/// Maximum empirical likelihood estimator `θ̃ = arg inf r(θ)`.
///
/// Location models use the closed form (the block-ratio mean); otherwise a
/// Nelder-Mead search from `theta_init` with `budget` ratio evaluations.
pub fn mele(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta_init: &[f64],
    budget: usize,
) -> Result<Mele> {
    let l = partition.complete_count();
    let needed = model.moment_dim().max(1);
    if l < needed {
        return Err(Error::NotEnoughBlocks { blocks: l, needed });
    }
    if theta_init.len() != model.param_dim() {
        return invalid("theta_init has the wrong dimension");
    }
    if let Some(theta) = location_estimate(path, partition, model) {
        let ratio = ratio_or_inf(path, partition, model, &theta);
        return Ok(Mele { theta, ratio, evaluations: 1, closed_form: true });
    }
    let start = ratio_or_inf(path, partition, model, theta_init);
    if !start.is_finite() {
        return Err(Error::EstimateNotConverged { best: theta_init.to_vec(), best_value: start, iterations: 0 });
    }
    let nm = NelderMead { max_evaluations: budget, ..Default::default() };
    let m = nm.minimize(|t| ratio_or_inf(path, partition, model, t), theta_init, &initial_steps(theta_init));
    if !m.converged {
        return Err(Error::EstimateNotConverged { best: m.x, best_value: m.value, iterations: m.evaluations });
    }
    Ok(Mele { theta: m.x, ratio: m.value, evaluations: m.evaluations, closed_form: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverIdTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub theta: Vec<f64>,
}

/// `2 r(θ̃)` against `χ²_{r-p}`.
pub fn overid_test(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta_init: &[f64],
) -> Result<OverIdTest> {
    let (r, p) = (model.moment_dim(), model.param_dim());
    if r <= p {
        return Err(Error::DegreesOfFreedomZero);
    }
    let est = mele(path, partition, model, theta_init, 4000)?;
    let statistic = 2.0 * est.ratio;
    Ok(OverIdTest { statistic, df: r - p, p_value: chi2_sf(statistic, r - p), theta: est.theta })
}

/// `W_1(θ_0) = 2 r(θ_0) - 2 r(θ̃)`, with the estimator searched from `θ_0`.
pub fn w1_statistic(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta0: &[f64],
) -> Result<f64> {
    let at = ratio_or_inf(path, partition, model, theta0);
    if !at.is_finite() {
        return Ok(f64::INFINITY);
    }
    let est = mele(path, partition, model, theta0, 4000)?;
    let inf = est.ratio.min(at);
    Ok(2.0 * (at - inf))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubvectorTest {
    pub statistic: f64,
    /// Profiled nuisance `β̂(γ_0)`.
    pub beta: Vec<f64>,
    pub profile_ratio: f64,
    pub min_ratio: f64,
}

/// `W_2(γ_0) = 2 inf_β r((γ_0, β)) - 2 r(θ̃)` where `γ` is the first
/// `gamma0.len()` parameter coordinates.
pub fn w2_statistic(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    gamma0: &[f64],
    beta_init: &[f64],
) -> Result<SubvectorTest> {
    let p = model.param_dim();
    if gamma0.is_empty() || gamma0.len() + beta_init.len() != p {
        return invalid("gamma and beta dimensions must add up to the parameter dimension");
    }
    let join = |beta: &[f64]| -> Vec<f64> { gamma0.iter().chain(beta).copied().collect() };
    let (beta, profile) = if beta_init.is_empty() {
        (Vec::new(), ratio_or_inf(path, partition, model, gamma0))
    } else {
        let start = ratio_or_inf(path, partition, model, &join(beta_init));
        if !start.is_finite() {
            return Err(Error::EstimateNotConverged { best: beta_init.to_vec(), best_value: start, iterations: 0 });
        }
        let m = NelderMead { max_evaluations: 4000, ..Default::default() }.minimize(
            |b| ratio_or_inf(path, partition, model, &join(b)),
            beta_init,
            &initial_steps(beta_init),
        );
        if !m.converged {
            return Err(Error::EstimateNotConverged { best: m.x, best_value: m.value, iterations: m.evaluations });
        }
        (m.x, m.value)
    };
    if !profile.is_finite() {
        return Ok(SubvectorTest { statistic: f64::INFINITY, beta, profile_ratio: profile, min_ratio: f64::NAN });
    }
    let est = mele(path, partition, model, &join(&beta), 4000)?;
    let min_ratio = est.ratio.min(profile);
    Ok(SubvectorTest { statistic: 2.0 * (profile - min_ratio), beta, profile_ratio: profile, min_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimates {
    /// `Σ̂ = Σ_j Y_j Y_j' / Σ_j ℓ_j`.
    pub sigma: DMatrix<f64>,
    /// `D̂`, the mean of `∂m/∂θ` over observations in complete blocks.
    pub jacobian: DMatrix<f64>,
    /// `(D̂' Σ̂^{-1} D̂)^{-1}`.
    pub covariance: DMatrix<f64>,
    /// `Σ_j ℓ_j`, the effective sample size.
    pub total_length: usize,
}

impl AsymptoticEstimates {
    /// Standard errors of the estimator, `sqrt(diag(cov) / Σℓ)`.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.covariance.diagonal().iter().map(|v| (v / self.total_length as f64).sqrt()).collect()
    }
}

pub fn asymptotic_estimates(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta: &[f64],
) -> Result<AsymptoticEstimates> {
    let l = partition.complete_count();
    if l < 2 {
        return Err(Error::NotEnoughBlocks { blocks: l, needed: 2 });
    }
    let (r, p) = (model.moment_dim(), model.param_dim());
    let ys = block_moments(path, partition, model, theta)?;
    let total = partition.complete_length();
    let mut sigma = DMatrix::zeros(r, r);
    for y in &ys {
        let v = DVector::from_column_slice(y);
        sigma.ger(1.0, &v, &v, 1.0);
    }
    sigma /= total as f64;
    let mut jac = DMatrix::zeros(r, p);
    for b in partition.complete_blocks() {
        for i in b.positions() {
            jac += jacobian_or_fd(model, path.state(i), theta);
        }
    }
    jac /= total as f64;
    let sigma_inv = sigma.clone().cholesky().ok_or(Error::SingularVariance)?.inverse();
    let info = jac.transpose() * sigma_inv * &jac;
    let covariance = info.try_inverse().ok_or(Error::SingularVariance)?;
    Ok(AsymptoticEstimates { sigma, jacobian: jac, covariance, total_length: total })
}

/// `P(χ'²_p(δ'Σ^{-1}δ) > χ²_{p, level})`, the asymptotic power of the
/// level-`level` ratio test when the moment is off by `δ / √n`.
pub fn predicted_power(delta: &[f64], sigma: &DMatrix<f64>, level: f64) -> Result<f64> {
    let p = delta.len();
    if sigma.nrows() != p || sigma.ncols() != p {
        return invalid("sigma must be p × p");
    }
    let d = DVector::from_column_slice(delta);
    let chol = sigma.clone().cholesky().ok_or(Error::SingularVariance)?;
    let ncp = d.dot(&chol.solve(&d));
    let critical = chi2_quantile(level, p);
    Ok(1.0 - noncentral_chi2_cdf(critical, p, ncp))
}

/// Bounds for [`invert_statistic`]; `None` keeps the default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

const BISECTION_TOL: f64 = 1e-6;

/// Inverts a scalar test statistic: finds where `stat` crosses `critical`
/// on each side of `center` by bisection, starting from `bounds` and
/// widening them (doubling the distance to `center`) up to three times.
pub fn invert_statistic(
    mut stat: impl FnMut(f64) -> f64,
    center: f64,
    bounds: (f64, f64),
    critical: f64,
    level: f64,
    kind: StatisticKind,
) -> ConfidenceInterval {
    let mut evaluations = Vec::new();
    let mut g = |t: f64, ev: &mut Vec<(f64, f64)>| {
        let s = stat(t);
        ev.push((t, s));
        s - critical
    };
    let at_center = g(center, &mut evaluations);
    let mut ci = ConfidenceInterval {
        lower: f64::NAN,
        upper: f64::NAN,
        estimate: center,
        level,
        critical_value: critical,
        kind,
        empty: false,
        lower_open: false,
        upper_open: false,
        evaluations: Vec::new(),
    };
    if !(at_center <= 0.0) {
        ci.empty = true;
        ci.evaluations = evaluations;
        return ci;
    }
    let mut endpoint = |bound: f64, ev: &mut Vec<(f64, f64)>| -> (f64, bool) {
        let mut outer = bound;
        let mut g_outer = g(outer, ev);
        let mut widenings = 0;
        while g_outer <= 0.0 && widenings < 3 {
            outer = center + 2.0 * (outer - center);
            g_outer = g(outer, ev);
            widenings += 1;
        }
        if g_outer <= 0.0 {
            return (outer, true);
        }
        let mut inner = center;
        let scale = 1.0 + center.abs().max(outer.abs());
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            let gm = g(mid, ev);
            if gm.abs() < BISECTION_TOL {
                return (mid, false);
            }
            if gm > 0.0 {
                outer = mid;
            } else {
                inner = mid;
            }
            if (outer - inner).abs() < 1e-14 * scale {
                break;
            }
        }
        (inner, false)
    };
    let (lower, lower_open) = endpoint(bounds.0.min(center), &mut evaluations);
    let (upper, upper_open) = endpoint(bounds.1.max(center), &mut evaluations);
    ci.lower = lower;
    ci.upper = upper;
    ci.lower_open = lower_open;
    ci.upper_open = upper_open;
    ci.evaluations = evaluations;
    ci
}

/// Default search half-width: ten standard errors, or a tenth of the
/// estimate's magnitude when the variance cannot be estimated.
fn default_half_width(path: &ChainPath, partition: &BlockPartition, model: &dyn MomentModel, est: &[f64]) -> f64 {
    asymptotic_estimates(path, partition, model, est)
        .ok()
        .and_then(|a| a.standard_errors().first().copied())
        .filter(|s| s.is_finite() && *s > 0.0)
        .map(|s| 10.0 * s)
        .unwrap_or(0.1 * est[0].abs().max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    pub level: f64,
    pub kind: StatisticKind,
    pub bounds: SearchBounds,
    pub theta_init: Option<Vec<f64>>,
}

impl CiOptions {
    pub fn new(level: f64) -> Self {
        Self { level, kind: StatisticKind::PlainRatio, bounds: SearchBounds::default(), theta_init: None }
    }
}

/// Confidence interval for a scalar parameter:
/// `{θ : 2 r(θ) <= χ²_{1, level}}` (or the corrected statistic).
pub fn confidence_interval(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    options: &CiOptions,
) -> Result<ConfidenceInterval> {
    if model.param_dim() != 1 {
        return invalid("confidence_interval needs a scalar parameter; use subvector_interval");
    }
    if !(options.level > 0.0 && options.level < 1.0) {
        return invalid("level must lie in (0, 1)");
    }
    let l = partition.complete_count();
    if l < 2 {
        return Err(Error::NotEnoughBlocks { blocks: l, needed: 2 });
    }
    let init = options.theta_init.clone().unwrap_or_else(|| vec![0.0]);
    let est = mele(path, partition, model, &init, 2000)?;
    if !est.ratio.is_finite() {
        return Err(Error::EmptyRegion);
    }
    let center = est.theta[0];
    let half = default_half_width(path, partition, model, &est.theta);
    let bounds = (options.bounds.lower.unwrap_or(center - half), options.bounds.upper.unwrap_or(center + half));
    let offset = match options.kind {
        StatisticKind::PlainRatio => 0.0,
        _ => 2.0 * est.ratio,
    };
    let critical = chi2_quantile(options.level, 1);
    let ci = invert_statistic(
        |t| 2.0 * ratio_or_inf(path, partition, model, &[t]) - offset,
        center,
        bounds,
        critical,
        options.level,
        options.kind,
    );
    if ci.empty && ci.evaluations.iter().all(|(_, s)| s.is_infinite()) {
        return Err(Error::EmptyRegion);
    }
    Ok(ci)
}

/// Confidence interval for the first parameter coordinate `γ` with the
/// remaining coordinates profiled out (`W_2` inversion).
pub fn subvector_interval(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    level: f64,
    theta_init: &[f64],
    bounds: SearchBounds,
) -> Result<ConfidenceInterval> {
    let p = model.param_dim();
    if p < 2 {
        let mut opts = CiOptions::new(level);
        opts.kind = StatisticKind::Subvector;
        opts.bounds = bounds;
        opts.theta_init = Some(theta_init.to_vec());
        return confidence_interval(path, partition, model, &opts);
    }
    let est = mele(path, partition, model, theta_init, 4000)?;
    let center = est.theta[0];
    let half = default_half_width(path, partition, model, &est.theta);
    let b = (bounds.lower.unwrap_or(center - half), bounds.upper.unwrap_or(center + half));
    let mut beta = est.theta[1..].to_vec();
    let critical = chi2_quantile(level, 1);
    let ci = invert_statistic(
        |g| match w2_statistic(path, partition, model, &[g], &beta) {
            Ok(t) => {
                if t.statistic.is_finite() {
                    beta = t.beta;
                }
                t.statistic
            }
            Err(_) => f64::INFINITY,
        },
        center,
        b,
        critical,
        level,
        StatisticKind::Subvector,
    );
    Ok(ci)
}

/// `(θ, 2 r(θ))` on a grid, for plotting the likelihood curve.
pub fn likelihood_curve(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    grid: &[f64],
) -> Vec<(f64, f64)> {
    grid.iter().map(|&t| (t, 2.0 * ratio_or_inf(path, partition, model, &[t]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_models::{simulate, ModelKind, ModelSpec};
    use crate::el_core::{FnMoment, MeanModel, PolyTerm, PolynomialMoments};
    use crate::regeneration::atomic_blocks;

    fn two_state_path(seed: u64, n: usize) -> ChainPath {
        let kind = ModelKind::FiniteMarkov { transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]], initial_state: 0 };
        simulate(&ModelSpec::new(kind, seed), n).unwrap()
    }

    /// Same moments as `MeanModel` but without the closed form.
    fn opaque_mean() -> FnMoment {
        FnMoment::new(1, 1, |x, t, out| out[0] = x[0] - t[0])
    }

    #[test]
    fn mele_is_block_ratio_mean() {
        let path = two_state_path(3, 2000);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let closed = mele(&path, &part, &MeanModel::scalar(), &[0.0], 100).unwrap();
        assert!(closed.closed_form);
        let sums: f64 = part.complete_blocks().flat_map(|b| b.positions()).map(|i| path.state(i)[0]).sum();
        let expect = sums / part.complete_length() as f64;
        assert!((closed.theta[0] - expect).abs() < 1e-14);
        assert!(closed.ratio < 1e-12);
        let numeric = mele(&path, &part, &opaque_mean(), &[0.5], 4000).unwrap();
        assert!(!numeric.closed_form);
        assert!((numeric.theta[0] - expect).abs() < 1e-8, "{} vs {expect}", numeric.theta[0]);
    }

    #[test]
    fn one_block_zeroes_the_moment() {
        let path = ChainPath::scalar(&[0.0, 1.0, 3.0, 0.0, 2.0]).unwrap();
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let m = mele(&path, &part, &MeanModel::scalar(), &[0.0], 100).unwrap();
        let y = block_moments(&path, &part, &MeanModel::scalar(), &m.theta).unwrap();
        assert!(y[0][0].abs() < 1e-14);
    }

    #[test]
    fn interval_contains_estimate_and_hits_quantile() {
        let path = two_state_path(5, 3000);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let ci = confidence_interval(&path, &part, &MeanModel::scalar(), &CiOptions::new(0.95)).unwrap();
        assert!(!ci.empty && !ci.lower_open && !ci.upper_open);
        assert!(ci.lower < ci.estimate && ci.estimate < ci.upper);
        for t in [ci.lower, ci.upper] {
            let s = 2.0 * el_ratio_at(&path, &part, &MeanModel::scalar(), &[t]).unwrap().ratio;
            assert!((s - 3.841_458_820_694_124).abs() < 1e-5, "statistic {s}");
        }
        // corrected and plain intervals coincide in the just-identified case
        let mut opts = CiOptions::new(0.95);
        opts.kind = StatisticKind::Corrected;
        let c1 = confidence_interval(&path, &part, &MeanModel::scalar(), &opts).unwrap();
        assert!((c1.lower - ci.lower).abs() < 1e-9 && (c1.upper - ci.upper).abs() < 1e-9);
    }

    #[test]
    fn statistic_is_single_crossing_for_the_mean() {
        let path = two_state_path(8, 2000);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let est = mele(&path, &part, &MeanModel::scalar(), &[0.0], 10).unwrap().theta[0];
        let right: Vec<f64> = (0..50).map(|k| est + 0.004 * k as f64).collect();
        let left: Vec<f64> = (0..50).map(|k| est - 0.004 * k as f64).collect();
        for side in [right, left] {
            let curve = likelihood_curve(&path, &part, &MeanModel::scalar(), &side);
            assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-10));
        }
    }

    #[test]
    fn w1_and_w2_identities() {
        let path = two_state_path(9, 2000);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let model = MeanModel::scalar();
        let theta0 = [0.55];
        let plain = 2.0 * el_ratio_at(&path, &part, &model, &theta0).unwrap().ratio;
        let w1 = w1_statistic(&path, &part, &model, &theta0).unwrap();
        assert!((w1 - plain).abs() < 1e-10);
        let w2 = w2_statistic(&path, &part, &model, &theta0, &[]).unwrap();
        assert!((w2.statistic - w1).abs() < 1e-10);
        let est = mele(&path, &part, &model, &[0.0], 10).unwrap().theta;
        assert!(w1_statistic(&path, &part, &model, &est).unwrap().abs() < 1e-10);
    }

    #[test]
    fn w2_vanishes_at_profiled_optimum() {
        let kind = ModelKind::FiniteMarkov {
            transition: vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]],
            initial_state: 0,
        };
        let path = simulate(&ModelSpec::new(kind, 4), 3000).unwrap();
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let model = PolynomialMoments::new(
            2,
            vec![
                PolyTerm::Raw { coordinate: 0, power: 1, param: Some(0), offset: 0.0 },
                PolyTerm::Raw { coordinate: 0, power: 2, param: Some(1), offset: 0.0 },
            ],
        )
        .unwrap();
        let est = mele(&path, &part, &model, &[1.0, 1.5], 4000).unwrap();
        let w2 = w2_statistic(&path, &part, &model, &est.theta[..1], &est.theta[1..]).unwrap();
        assert!(w2.statistic.abs() < 1e-6, "{}", w2.statistic);
        let off = w2_statistic(&path, &part, &model, &[est.theta[0] + 0.1], &est.theta[1..]).unwrap();
        assert!(off.statistic > 1.0);
        let ci = subvector_interval(&path, &part, &model, 0.95, &est.theta, SearchBounds::default()).unwrap();
        assert!(ci.contains(est.theta[0]));
    }

    #[test]
    fn overid_requires_extra_moments() {
        let path = two_state_path(1, 500);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        assert!(matches!(
            overid_test(&path, &part, &MeanModel::scalar(), &[0.5]),
            Err(Error::DegreesOfFreedomZero)
        ));
    }

    #[test]
    fn overid_p_value_inverts_quantile() {
        assert!((chi2_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn iid_length_one_blocks_reduce_to_sample_moments() {
        let xs = [0.3, -1.2, 2.2, 0.7, -0.4, 1.1];
        let path = ChainPath::scalar(&xs).unwrap();
        let part = atomic_blocks(&path, |_| true).unwrap();
        let a = asymptotic_estimates(&path, &part, &MeanModel::scalar(), &[0.0]).unwrap();
        let second: f64 = xs[1..].iter().map(|x| x * x).sum::<f64>() / 5.0;
        assert!((a.sigma[(0, 0)] - second).abs() < 1e-14);
        assert_eq!(a.jacobian[(0, 0)], -1.0);
        assert!((a.covariance[(0, 0)] - second).abs() < 1e-12);
    }

    #[test]
    fn sigma_is_positive_semidefinite() {
        let path = two_state_path(2, 1000);
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let model = PolynomialMoments::new(
            1,
            vec![
                PolyTerm::Raw { coordinate: 0, power: 1, param: Some(0), offset: 0.0 },
                PolyTerm::Raw { coordinate: 0, power: 1, param: None, offset: 0.3 },
            ],
        )
        .unwrap();
        let a = asymptotic_estimates(&path, &part, &model, &[0.5]).unwrap();
        let eig = a.sigma.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v >= -1e-12));
        assert!((a.sigma.clone() - a.sigma.transpose()).amax() < 1e-15);
    }

    #[test]
    fn power_examples() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert!((predicted_power(&[0.0], &one, 0.95).unwrap() - 0.05).abs() < 1e-9);
        let mut prev = 0.0;
        for k in 0..40 {
            let p = predicted_power(&[0.25 * k as f64], &one, 0.95).unwrap();
            assert!(p >= prev - 1e-12);
            prev = p;
        }
        assert!(prev > 0.999_999);
        // two-sided normal test at shift 2: Φ(-3.96) + 1 - Φ(-0.04)
        let p = predicted_power(&[2.0], &one, 0.95).unwrap();
        assert!((p - 0.516).abs() < 5e-4, "{p}");
    }

    /// Independent route: trapezoid integration of the density of
    /// `(Z + μ)²` beyond the critical value.
    #[test]
    fn power_matches_density_quadrature() {
        let mu: f64 = 2.0;
        let q = 3.841_458_820_694_124_f64;
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // substitute x = s², ds: density in s is φ(s - μ) + φ(s + μ) for s > 0
        let (a, b, steps) = (q.sqrt(), 20.0, 200_000);
        let h = (b - a) / steps as f64;
        let mut tail = 0.0;
        for k in 0..=steps {
            let s = a + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            tail += w * (phi(s - mu) + phi(s + mu)) * h;
        }
        let p = predicted_power(&[2.0], &DMatrix::from_element(1, 1, 1.0), 0.95).unwrap();
        assert!((p - tail).abs() < 1e-8, "{p} vs {tail}");
    }
}

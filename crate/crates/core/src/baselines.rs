//! Competing methods: fixed-length block EL (BEL), the sample mean, and the
//! truncated regenerative mean, each with a confidence interval.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain_models::ChainPath;
use crate::dist::{chi2_quantile, normal_quantile};
use crate::el_core::{el_ratio, ElSolution, MomentModel};
use crate::error::{invalid, Error, Result};
use crate::inference::{invert_statistic, ConfidenceInterval, StatisticKind};
use crate::regeneration::BlockPartition;
use crate::rng::{stream_rng, STREAM_BOOTSTRAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rebel")]
    ReBel,
    #[serde(rename = "bel")]
    Bel,
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "trunc")]
    Trunc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ReBel, Method::Bel, Method::Mean, Method::Trunc];

    pub fn name(self) -> &'static str {
        match self {
            Method::ReBel => "ReBEL",
            Method::Bel => "BEL",
            Method::Mean => "mean",
            Method::Trunc => "trunc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rebel" => Ok(Method::ReBel),
            "bel" => Ok(Method::Bel),
            "mean" => Ok(Method::Mean),
            "trunc" => Ok(Method::Trunc),
            other => invalid(format!("unknown method '{other}' (expected rebel, bel, mean or trunc)")),
        }
    }
}

/// Length of the non-overlapping blocks used by BEL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockLength {
    /// `⌊n^{1/3}⌋`.
    #[default]
    Auto,
    Fixed(usize),
}

impl BlockLength {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BlockLength::Auto => integer_cube_root(n).max(1),
            BlockLength::Fixed(l) => l,
        }
    }
}

/// `⌊n^{1/3}⌋`, exact for all `usize`.
pub fn integer_cube_root(n: usize) -> usize {
    let mut r = (n as f64).cbrt().round() as usize;
    while r > 0 && r.saturating_mul(r).saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Sums of `m(X_i, θ)` over the `⌊n/L⌋` consecutive blocks of length `L`;
/// the last `n mod L` observations are discarded.
pub fn bel_moments(path: &ChainPath, model: &dyn MomentModel, theta: &[f64], block_length: usize) -> Result<Vec<Vec<f64>>> {
    if block_length == 0 {
        return invalid("block length must be positive");
    }
    if theta.len() != model.param_dim() {
        return invalid("theta has the wrong dimension");
    }
    let blocks = path.len() / block_length;
    if blocks < 2 {
        return Err(Error::NotEnoughBlocks { blocks, needed: 2 });
    }
    let r = model.moment_dim();
    let mut buf = vec![0.0; r];
    Ok((0..blocks)
        .map(|b| {
            let mut sum = vec![0.0; r];
            for i in b * block_length..(b + 1) * block_length {
                model.eval(path.state(i), theta, &mut buf);
                for (s, v) in sum.iter_mut().zip(&buf) {
                    *s += v;
                }
            }
            sum
        })
        .collect())
}

pub fn bel_ratio(path: &ChainPath, model: &dyn MomentModel, theta: &[f64], block_length: BlockLength) -> Result<ElSolution> {
    let y = bel_moments(path, model, theta, block_length.resolve(path.len()))?;
    el_ratio(&y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: Method,
    pub estimate: f64,
    pub ci: ConfidenceInterval,
    pub variance_estimate: Option<f64>,
}

/// BEL interval for a scalar location moment `m = g(x) - θ`:
/// `{θ : 2 r_BEL(θ) <= χ²_{1, level}}`, centered at the mean of the used
/// observations.
pub fn bel_interval(path: &ChainPath, moment: impl Fn(&[f64]) -> f64, block_length: BlockLength, level: f64) -> Result<BaselineResult> {
    let l = block_length.resolve(path.len());
    let blocks = path.len() / l.max(1);
    if l == 0 || blocks < 2 {
        return Err(Error::NotEnoughBlocks { blocks, needed: 2 });
    }
    let used = blocks * l;
    let g: Vec<f64> = (0..used).map(|i| moment(path.state(i))).collect();
    let sums: Vec<f64> = g.chunks(l).map(|c| c.iter().sum()).collect();
    let estimate = g.iter().sum::<f64>() / used as f64;
    let stat = |t: f64| {
        let y: Vec<Vec<f64>> = sums.iter().map(|s| vec![s - l as f64 * t]).collect();
        el_ratio(&y).map(|s| 2.0 * s.ratio).unwrap_or(f64::INFINITY)
    };
    let var = block_variance(&sums, l);
    let half = 10.0 * var.sqrt().max(1e-8 * estimate.abs().max(1.0));
    let ci = invert_statistic(
        stat,
        estimate,
        (estimate - half, estimate + half),
        chi2_quantile(level, 1),
        level,
        StatisticKind::PlainRatio,
    );
    Ok(BaselineResult { method: Method::Bel, estimate, ci, variance_estimate: Some(var) })
}

/// Variance of the overall mean implied by i.i.d. block sums.
fn block_variance(sums: &[f64], l: usize) -> f64 {
    let b = sums.len() as f64;
    let m = sums.iter().sum::<f64>() / b;
    let s2 = sums.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (b - 1.0).max(1.0);
    s2 / (b * (l * l) as f64)
}

/// `Σ_{complete blocks} g(X_i) / (τ(l+1) - τ(1))`.
pub fn trunc_estimate(path: &ChainPath, partition: &BlockPartition, moment: impl Fn(&[f64]) -> f64) -> Result<f64> {
    if partition.path_len() != path.len() {
        return invalid("partition does not match the path");
    }
    if partition.complete_count() < 1 {
        return Err(Error::NotEnoughBlocks { blocks: 0, needed: 1 });
    }
    let (a, b) = truncated_range(partition);
    Ok((a..b).map(|i| moment(path.state(i))).sum::<f64>() / (b - a) as f64)
}

/// 0-based half-open range covered by the complete blocks.
fn truncated_range(partition: &BlockPartition) -> (usize, usize) {
    let t = partition.regeneration_times();
    (t[0], *t.last().unwrap())
}

pub fn mean_estimate(path: &ChainPath, moment: impl Fn(&[f64]) -> f64) -> Result<f64> {
    if path.is_empty() {
        return invalid("empty path");
    }
    Ok(path.states().map(moment).sum::<f64>() / path.len() as f64)
}

/// Non-overlapping block bootstrap variance of the sample mean of `values`:
/// draws `⌊n/L⌋` of the consecutive length-`L` blocks with replacement,
/// `n_boot` times, and returns the empirical variance of the resampled means.
pub fn block_bootstrap_variance(values: &[f64], block_length: usize, n_boot: usize, seed: u64) -> Result<f64> {
    if block_length == 0 {
        return invalid("block length must be positive");
    }
    if n_boot < 2 {
        return invalid("need at least two bootstrap resamples");
    }
    let b = values.len() / block_length;
    if b < 2 {
        return Err(Error::NotEnoughBlocks { blocks: b, needed: 2 });
    }
    let sums: Vec<f64> = values.chunks_exact(block_length).map(|c| c.iter().sum()).collect();
    let mut rng = stream_rng(seed, STREAM_BOOTSTRAP);
    let denom = (b * block_length) as f64;
    let means: Vec<f64> = (0..n_boot)
        .map(|_| (0..b).map(|_| sums[rng.random_range(0..b)]).sum::<f64>() / denom)
        .collect();
    let m = means.iter().sum::<f64>() / n_boot as f64;
    Ok(means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n_boot - 1) as f64)
}

pub fn bootstrap_variance(
    path: &ChainPath,
    moment: impl Fn(&[f64]) -> f64,
    block_length: BlockLength,
    n_boot: usize,
    seed: u64,
) -> Result<f64> {
    let values: Vec<f64> = path.states().map(moment).collect();
    block_bootstrap_variance(&values, block_length.resolve(values.len()), n_boot, seed)
}

fn gaussian_interval(estimate: f64, variance: f64, level: f64) -> ConfidenceInterval {
    let z = normal_quantile(0.5 + level / 2.0);
    let half = z * variance.max(0.0).sqrt();
    ConfidenceInterval {
        lower: estimate - half,
        upper: estimate + half,
        estimate,
        level,
        critical_value: z,
        kind: StatisticKind::PlainRatio,
        empty: false,
        lower_open: false,
        upper_open: false,
        evaluations: Vec::new(),
    }
}

/// Sample mean with a block-bootstrap Gaussian interval.
pub fn mean_interval(
    path: &ChainPath,
    moment: impl Fn(&[f64]) -> f64,
    block_length: BlockLength,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<BaselineResult> {
    let values: Vec<f64> = path.states().map(&moment).collect();
    if values.is_empty() {
        return invalid("empty path");
    }
    let estimate = values.iter().sum::<f64>() / values.len() as f64;
    let var = block_bootstrap_variance(&values, block_length.resolve(values.len()), n_boot, seed)?;
    Ok(BaselineResult { method: Method::Mean, estimate, ci: gaussian_interval(estimate, var, level), variance_estimate: Some(var) })
}

/// Truncated regenerative mean with a block-bootstrap Gaussian interval;
/// the bootstrap runs on the observations inside the complete blocks.
pub fn trunc_interval(
    path: &ChainPath,
    partition: &BlockPartition,
    moment: impl Fn(&[f64]) -> f64,
    block_length: BlockLength,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<BaselineResult> {
    let estimate = trunc_estimate(path, partition, &moment)?;
    let (a, b) = truncated_range(partition);
    let values: Vec<f64> = (a..b).map(|i| moment(path.state(i))).collect();
    let var = block_bootstrap_variance(&values, block_length.resolve(values.len()), n_boot, seed)?;
    Ok(BaselineResult { method: Method::Trunc, estimate, ci: gaussian_interval(estimate, var, level), variance_estimate: Some(var) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_models::{simulate, ModelKind, ModelSpec};
    use crate::el_core::MeanModel;
    use crate::regeneration::atomic_blocks;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn cube_root_is_exact() {
        assert_eq!(integer_cube_root(1000), 10);
        assert_eq!(integer_cube_root(999), 9);
        assert_eq!(integer_cube_root(250), 6);
        assert_eq!(integer_cube_root(500), 7);
        assert_eq!(integer_cube_root(10_000), 21);
        assert_eq!(integer_cube_root(0), 0);
        for n in 1..5000usize {
            let r = integer_cube_root(n);
            assert!(r * r * r <= n && (r + 1).pow(3) > n);
        }
    }

    #[test]
    fn bel_uses_floor_n_over_l_blocks() {
        let path = ChainPath::scalar(&(0..1000).map(|i| (i % 7) as f64).collect::<Vec<_>>()).unwrap();
        let y = bel_moments(&path, &MeanModel::scalar(), &[0.0], BlockLength::Auto.resolve(1000)).unwrap();
        assert_eq!(y.len(), 100);
        let path = ChainPath::scalar(&[1.0; 1005]).unwrap();
        let y = bel_moments(&path, &MeanModel::scalar(), &[0.0], 10).unwrap();
        assert_eq!(y.len(), 100);
        assert!(matches!(
            bel_moments(&path, &MeanModel::scalar(), &[0.0], 600),
            Err(Error::NotEnoughBlocks { blocks: 1, .. })
        ));
    }

    #[test]
    fn bel_length_one_is_plain_el() {
        let xs = [0.3, -1.2, 2.2, 0.7, -0.4];
        let path = ChainPath::scalar(&xs).unwrap();
        let a = bel_ratio(&path, &MeanModel::scalar(), &[0.1], BlockLength::Fixed(1)).unwrap();
        let b = el_ratio(&xs.iter().map(|x| vec![x - 0.1]).collect::<Vec<_>>()).unwrap();
        assert_eq!(a.ratio, b.ratio);
        assert_eq!(a.lambda, b.lambda);
    }

    #[test]
    fn bel_interval_endpoints_hit_quantile() {
        let kind = ModelKind::AR1Uniform { rho: 0.5 };
        let path = simulate(&ModelSpec::new(kind, 2), 1000).unwrap();
        let r = bel_interval(&path, |s| s[0], BlockLength::Auto, 0.95).unwrap();
        assert!(r.ci.lower < r.estimate && r.estimate < r.ci.upper);
        for t in [r.ci.lower, r.ci.upper] {
            let s = bel_ratio(&path, &MeanModel::scalar(), &[t], BlockLength::Auto).unwrap().statistic();
            assert!((s - 3.841_458_820_694_124).abs() < 1e-5);
        }
    }

    #[test]
    fn trunc_examples() {
        let path = ChainPath::scalar(&[5.0, 0.0, 1.0, 3.0, 0.0, 9.0]).unwrap();
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        // single complete block [3, 5]
        assert_eq!(trunc_estimate(&path, &part, |s| s[0]).unwrap(), 4.0 / 3.0);
        // regenerations at the first and last index drop only X_1
        let path = ChainPath::scalar(&[0.0, 2.0, 4.0, 0.0]).unwrap();
        let part = BlockPartition::from_times(4, vec![1, 4]).unwrap();
        assert_eq!(trunc_estimate(&path, &part, |s| s[0]).unwrap(), 2.0);
    }

    #[test]
    fn trunc_matches_sample_mean_without_truncation() {
        let xs = [0.0, 1.5, 2.5, 3.0, 0.0];
        let path = ChainPath::scalar(&xs).unwrap();
        let part = BlockPartition::from_times(5, vec![1, 5]).unwrap();
        let tail_mean = xs[1..].iter().sum::<f64>() / 4.0;
        assert_eq!(trunc_estimate(&path, &part, |s| s[0]).unwrap(), tail_mean);
    }

    #[test]
    fn mean_examples() {
        let path = ChainPath::scalar(&[2.5; 10]).unwrap();
        assert_eq!(mean_estimate(&path, |s| s[0]).unwrap(), 2.5);
        assert_eq!(mean_estimate(&path, |s| (s[0] >= 10.0) as u8 as f64).unwrap(), 0.0);
        assert!(mean_estimate(&ChainPath::scalar(&[]).unwrap(), |s| s[0]).is_err());
    }

    #[test]
    fn bootstrap_constant_and_iid() {
        let path = ChainPath::scalar(&[1.0; 100]).unwrap();
        assert_eq!(bootstrap_variance(&path, |s| s[0], BlockLength::Fixed(5), 200, 1).unwrap(), 0.0);
        let mut rng = stream_rng(11, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = block_bootstrap_variance(&xs, 1, 500, 3).unwrap();
        assert!((v * 1e4 - 1.0).abs() < 0.2, "{v}");
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let xs: Vec<f64> = (0..300).map(|i| ((i * 37) % 11) as f64).collect();
        let a = block_bootstrap_variance(&xs, 6, 300, 9).unwrap();
        assert_eq!(a, block_bootstrap_variance(&xs, 6, 300, 9).unwrap());
        assert_ne!(a, block_bootstrap_variance(&xs, 6, 300, 10).unwrap());
    }

    /// Expected resampling variance of the AR(1) mean: the variance of a
    /// length-`L` block sum divided by `L`, over `n`.
    #[test]
    fn bootstrap_sees_ar1_dependence() {
        let (rho, n) = (0.9f64, 10_000usize);
        let kind = ModelKind::AR1Uniform { rho };
        let path = simulate(&ModelSpec::new(kind, 5), n).unwrap();
        let v = bootstrap_variance(&path, |s| s[0], BlockLength::Auto, 500, 1).unwrap();
        let gamma0 = 4.0 / (1.0 - rho * rho);
        let l = integer_cube_root(n) as f64;
        let per_obs = gamma0 * ((1.0 + rho) / (1.0 - rho) - 2.0 * rho * (1.0 - rho.powf(l)) / (l * (1.0 - rho).powi(2)));
        let expected = per_obs / n as f64;
        assert!(v > 5.0 * gamma0 / n as f64);
        assert!((v / expected - 1.0).abs() < 0.3, "{v} vs {expected}");
    }

    #[test]
    fn gaussian_intervals_contain_estimate() {
        let kind = ModelKind::FiniteMarkov { transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]], initial_state: 0 };
        let path = simulate(&ModelSpec::new(kind, 1), 2000).unwrap();
        let part = atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let m = mean_interval(&path, |s| s[0], BlockLength::Auto, 500, 0.95, 4).unwrap();
        let t = trunc_interval(&path, &part, |s| s[0], BlockLength::Auto, 500, 0.95, 4).unwrap();
        for r in [m, t] {
            assert!(r.ci.lower <= r.estimate && r.estimate <= r.ci.upper);
            assert!(r.ci.width() > 0.0);
        }
    }
}

//! Distribution helpers: central and noncentral chi-square, normal
//! quantiles, and the Kolmogorov-Smirnov distance.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

fn chi2(df: f64) -> ChiSquared {
    ChiSquared::new(df).expect("degrees of freedom must be positive")
}

/// Quantile `F^{-1}(prob)` of a chi-square with `df` degrees of freedom.
pub fn chi2_quantile(prob: f64, df: usize) -> f64 {
    chi2(df as f64).inverse_cdf(prob)
}

pub fn chi2_cdf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    chi2(df as f64).cdf(x)
}

/// Upper tail `P(X > x)`.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    chi2(df as f64).sf(x)
}

pub fn normal_quantile(prob: f64) -> f64 {
    Normal::standard().inverse_cdf(prob)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Two-sided critical value of Student's t with `df` degrees of freedom.
pub fn student_t_quantile(prob: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(prob)
}

/// CDF of the noncentral chi-square `χ'²_df(ncp)` through its Poisson
/// mixture of central chi-squares. Terms are summed outward from the
/// Poisson mode until the neglected Poisson mass is below `1e-12`.
pub fn noncentral_chi2_cdf(x: f64, df: usize, ncp: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if ncp <= 0.0 {
        return chi2_cdf(x, df);
    }
    let half = ncp / 2.0;
    let log_weight = |j: usize| -half + j as f64 * half.ln() - ln_gamma(j as f64 + 1.0);
    let term = |j: usize| chi2(df as f64 + 2.0 * j as f64).cdf(x);

    // Poisson(half) mass outside mode ± (12 sd + 40) is far below 1e-12.
    let spread = (12.0 * half.sqrt() + 40.0).ceil() as usize;
    let mode = half.floor() as usize;
    let lo = mode.saturating_sub(spread);
    let hi = mode + spread;
    let mut total = 0.0;
    for j in lo..=hi {
        let w = log_weight(j).exp();
        if w == 0.0 {
            continue;
        }
        total += w * term(j);
    }
    total.clamp(0.0, 1.0)
}

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and a
/// continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Empirical quantile with linear interpolation (type 7).
pub fn empirical_quantile(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_reference_quantiles() {
        assert!((chi2_quantile(0.95, 1) - 3.841_458_820_694_124).abs() < 1e-6);
        assert!((chi2_quantile(0.5, 1) - 0.454_936_423_119_572_8).abs() < 1e-6);
        assert!((chi2_quantile(0.9, 1) - 2.705_543_454_095_404).abs() < 1e-6);
        assert!((chi2_quantile(0.95, 2) - 5.991_464_547_107_979).abs() < 1e-6);
    }

    #[test]
    fn noncentral_reduces_to_central() {
        for &x in &[0.1, 1.0, 3.84, 10.0] {
            assert!((noncentral_chi2_cdf(x, 3, 0.0) - chi2_cdf(x, 3)).abs() < 1e-14);
        }
    }

    #[test]
    fn noncentral_df1_matches_shifted_normal() {
        // For df = 1, χ'²(μ²) is the law of (Z + μ)².
        for &mu in &[0.5_f64, 1.0, 2.0, 4.0, 10.0] {
            for &x in &[0.5_f64, 3.84, 20.0, 150.0] {
                let s = x.sqrt();
                let expect = normal_cdf(s - mu) - normal_cdf(-s - mu);
                let got = noncentral_chi2_cdf(x, 1, mu * mu);
                assert!((got - expect).abs() < 1e-10, "mu={mu} x={x}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn noncentral_large_ncp_is_finite() {
        let v = noncentral_chi2_cdf(3000.0, 2, 3000.0);
        assert!(v > 0.4 && v < 0.6);
    }

    #[test]
    fn ks_of_uniform_grid_is_small() {
        let sample: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_distance(&sample, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
    }
}

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain_models::ChainPath;
use crate::error::{invalid, Error, Result};

/// Anything that can play the role of a transition density `p(x, y)`.
pub trait TransitionDensity: Sync {
    fn dim(&self) -> usize;
    fn density(&self, x: &[f64], y: &[f64]) -> f64;

    /// Densities of every pair `(xs[a], ys[b])`; row `a`, column `b`.
    fn density_grid(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), ys.len(), |a, b| self.density(&xs[a], &ys[b]))
    }
}

/// Memo of `p(X_i, X_{i+1})` along one path, filled on demand so that
/// small-set evaluation and splitting share the kernel sums.
#[derive(Debug, Clone)]
pub struct PairDensities {
    values: Vec<f64>,
}

impl PairDensities {
    pub fn new(path_len: usize) -> Self {
        Self { values: vec![f64::NAN; path_len] }
    }

    /// `p(X_i, X_{i+1})` for 0-based `i`.
    pub fn get(&mut self, i: usize, path: &ChainPath, density: &dyn TransitionDensity) -> f64 {
        if self.values[i].is_nan() {
            self.values[i] = density.density(path.state(i), path.state(i + 1));
        }
        self.values[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Silverman's rule per coordinate, `1.06 σ̂ n^{-1/5}`.
    Auto,
    Fixed(f64),
    PerCoordinate(Vec<f64>),
}

/// Nadaraya-Watson estimate of the transition density with product
/// Gaussian kernels:
///
/// `p_n(x, y) = Σ_i K_h(x - X_i) K_h(y - X_{i+1}) / Σ_i K_h(x - X_i)`.
#[derive(Debug, Clone)]
pub struct TransitionDensityEstimate {
    // pair endpoints divided coordinate-wise by the bandwidth
    from: Vec<f64>,
    to: Vec<f64>,
    dim: usize,
    bandwidth: Vec<f64>,
    // log of the y-kernel normalizing constant Π_d 1/(h_d √(2π))
    log_norm: f64,
}

pub fn estimate_transition_density(path: &ChainPath, bandwidth: &Bandwidth) -> Result<TransitionDensityEstimate> {
    let n = path.len();
    if n < 2 {
        return invalid("transition density needs at least two observations");
    }
    let d = path.dim();
    let h: Vec<f64> = match bandwidth {
        Bandwidth::Auto => {
            let mut h = Vec::with_capacity(d);
            for c in 0..d {
                let xs = path.coordinate(c);
                let mean = xs.iter().sum::<f64>() / n as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let sd = var.sqrt();
                if !(sd > 0.0) {
                    return Err(Error::DegenerateDensity { coordinate: c });
                }
                h.push(1.06 * sd * (n as f64).powf(-0.2));
            }
            h
        }
        Bandwidth::Fixed(v) => vec![*v; d],
        Bandwidth::PerCoordinate(v) => {
            if v.len() != d {
                return invalid(format!("{} bandwidths for a {d}-dimensional path", v.len()));
            }
            v.clone()
        }
    };
    if h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("bandwidths must be positive and finite");
    }
    let flat = path.as_flat();
    let scale = |v: &[f64]| -> Vec<f64> { v.chunks_exact(d).flat_map(|s| s.iter().zip(&h).map(|(a, b)| a / b)).collect() };
    let from = scale(&flat[..(n - 1) * d]);
    let to = scale(&flat[d..]);
    let log_norm = -h.iter().map(|v| (v * (2.0 * PI).sqrt()).ln()).sum::<f64>();
    Ok(TransitionDensityEstimate { from, to, dim: d, bandwidth: h, log_norm })
}

impl TransitionDensityEstimate {
    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn pair_count(&self) -> usize {
        self.from.len() / self.dim
    }

    fn scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.bandwidth).map(|(v, h)| v / h).collect()
    }

    /// `-|a - b|² / 2` for already scaled points.
    fn exponent(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for (u, v) in a.iter().zip(b) {
            let t = u - v;
            s += t * t;
        }
        -0.5 * s
    }

    /// `p_n(x, y)`; zero where the kernel weights of `x` underflow. Pairs
    /// whose `x`-weight is below `e^{-40}` times the largest are skipped,
    /// an absolute error below `e^{-40}` times the kernel peak.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let (x, y) = (self.scaled(x), self.scaled(y));
        let ex: Vec<f64> = self.from.chunks_exact(d).map(|f| Self::exponent(&x, f)).collect();
        let shift = ex.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (e, t) in ex.iter().zip(self.to.chunks_exact(d)) {
            let a = e - shift;
            if a < -40.0 {
                continue;
            }
            den += a.exp();
            let b = a + Self::exponent(&y, t);
            if b > -700.0 {
                num += b.exp();
            }
        }
        num / den * self.log_norm.exp()
    }

    /// Evaluates `p_n` on every pair `(xs[a], ys[b])`; row `a`, column `b`.
    pub fn evaluate_grid(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> DMatrix<f64> {
        let d = self.dim;
        let m = self.pair_count();
        // column a holds the normalized x-weights of xs[a]
        let mut weights = DMatrix::<f64>::zeros(m, xs.len());
        for (a, x) in xs.iter().enumerate() {
            let x = self.scaled(x);
            let mut col = weights.column_mut(a);
            for (w, f) in col.iter_mut().zip(self.from.chunks_exact(d)) {
                *w = Self::exponent(&x, f);
            }
            let shift = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for w in col.iter_mut() {
                *w = (*w - shift).exp();
                total += *w;
            }
            if total > 0.0 {
                col /= total;
            }
        }
        let norm = self.log_norm.exp();
        let mut kernels = DMatrix::<f64>::zeros(m, ys.len());
        for (b, y) in ys.iter().enumerate() {
            let y = self.scaled(y);
            for (k, t) in kernels.column_mut(b).iter_mut().zip(self.to.chunks_exact(d)) {
                *k = norm * Self::exponent(&y, t).exp();
            }
        }
        weights.transpose() * kernels
    }
}

impl TransitionDensity for TransitionDensityEstimate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn density(&self, x: &[f64], y: &[f64]) -> f64 {
        self.evaluate(x, y)
    }

    fn density_grid(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> DMatrix<f64> {
        self.evaluate_grid(xs, ys)
    }
}

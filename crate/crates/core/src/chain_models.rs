//! Seeded simulation of the data-generating processes and path utilities.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream_rng, STREAM_SIMULATE};

/// An observed trajectory `X_1..X_n` of a (possibly stacked) chain.
///
/// States are stored row-major in a flat buffer of `len() * dim` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPath {
    values: Vec<f64>,
    dim: usize,
    pub origin: String,
}

impl ChainPath {
    pub fn from_flat(values: Vec<f64>, dim: usize, origin: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return invalid("state dimension must be positive");
        }
        if values.len() % dim != 0 {
            return invalid(format!("{} values do not split into states of dimension {dim}", values.len()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite state component {bad}"));
        }
        Ok(Self { values, dim, origin: origin.into() })
    }

    /// Scalar path from a slice of observations.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1, "data")
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// State at 0-based position `i`.
    pub fn state(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Values of coordinate `c` along the path.
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.states().map(|s| s[c]).collect()
    }

    /// Writes the path as CSV with header `x1,...,xd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((1..=self.dim).map(|j| format!("x{j}")))?;
        for s in self.states() {
            w.write_record(s.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a path written by [`ChainPath::write_csv`]; the dimension is
    /// taken from the header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r.headers()?.len();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != dim {
                return invalid(format!("row has {} columns, header has {dim}", rec.len()));
            }
            for field in rec.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| crate::Error::Validation(format!("cannot parse '{field}' as a number")))?;
                values.push(v);
            }
        }
        Self::from_flat(values, dim, "csv")
    }
}

/// A data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ModelKind {
    /// Finite-state chain on `{0, ..., k-1}` started at `initial_state`;
    /// states are emitted as their index.
    FiniteMarkov { transition: Vec<Vec<f64>>, initial_state: usize },
    /// `X_i = rho X_{i-1} + e_i`, `e_i ~ U[-sqrt 12, sqrt 12]`, `X_0 = 0`.
    AR1Uniform { rho: f64 },
    /// `X_i = ar X_{i-1} + e_i`, `e_i = s_i v_i`, `v_i ~ N(0,1)`,
    /// `s_i = vol_intercept + vol_abs |e_{i-1}| + vol_pos max(e_{i-1}, 0)`,
    /// with `X_0 = 0`, `e_0 = 0`.
    TGarchAR { ar: f64, vol_intercept: f64, vol_abs: f64, vol_pos: f64 },
}

impl ModelKind {
    /// The threshold AR-GARCH process with coefficients 0.97 / 1 / 0.5 / 0.4.
    pub fn tgarch_reference() -> Self {
        ModelKind::TGarchAR { ar: 0.97, vol_intercept: 1.0, vol_abs: 0.5, vol_pos: 0.4 }
    }

    pub fn ar1_reference() -> Self {
        ModelKind::AR1Uniform { rho: 0.9 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelKind::FiniteMarkov { transition, initial_state } => {
                let k = transition.len();
                if k == 0 {
                    return invalid("transition matrix is empty");
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != k {
                        return invalid(format!("transition row {i} has {} entries, expected {k}", row.len()));
                    }
                    if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                        return invalid(format!("transition row {i} has a negative or non-finite entry"));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > 1e-12 {
                        return invalid(format!("transition row {i} sums to {s}, not 1"));
                    }
                }
                if *initial_state >= k {
                    return invalid(format!("initial state {initial_state} out of range 0..{k}"));
                }
            }
            ModelKind::AR1Uniform { rho } => {
                if !(rho.is_finite() && rho.abs() < 1.0) {
                    return invalid(format!("AR(1) coefficient {rho} must lie in (-1, 1)"));
                }
            }
            ModelKind::TGarchAR { ar, vol_intercept, vol_abs, vol_pos } => {
                if !(ar.is_finite() && ar.abs() < 1.0) {
                    return invalid(format!("AR coefficient {ar} must lie in (-1, 1)"));
                }
                if !(*vol_intercept > 0.0 && *vol_abs >= 0.0 && *vol_pos >= 0.0) {
                    return invalid("volatility intercept must be positive and coefficients nonnegative");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Simulates `n` observations `X_1..X_n`. A pure function of `(spec, n)`.
pub fn simulate(spec: &ModelSpec, n: usize) -> Result<ChainPath> {
    spec.kind.validate()?;
    let mut rng = stream_rng(spec.seed, STREAM_SIMULATE);
    let mut out = Vec::with_capacity(n);
    match &spec.kind {
        ModelKind::FiniteMarkov { transition, initial_state } => {
            let mut state = *initial_state;
            for _ in 0..n {
                let u: f64 = rng.random();
                let row = &transition[state];
                let mut acc = 0.0;
                let mut next = row.len() - 1;
                for (j, p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next = j;
                        break;
                    }
                }
                state = next;
                out.push(state as f64);
            }
        }
        ModelKind::AR1Uniform { rho } => {
            let half_width = 12f64.sqrt();
            let mut x = 0.0;
            for _ in 0..n {
                let u: f64 = rng.random();
                x = rho * x + half_width * (2.0 * u - 1.0);
                out.push(x);
            }
        }
        ModelKind::TGarchAR { ar, vol_intercept, vol_abs, vol_pos } => {
            let mut x = 0.0;
            let mut eps: f64 = 0.0;
            for _ in 0..n {
                let sigma = vol_intercept + vol_abs * eps.abs() + vol_pos * eps.max(0.0);
                let v: f64 = rng.sample(StandardNormal);
                eps = sigma * v;
                x = ar * x + eps;
                out.push(x);
            }
        }
    }
    ChainPath::from_flat(out, 1, format!("{:?}", spec.kind))
}

/// Stacks `k` consecutive states: the new state at position `i` is
/// `(X_{i+k-1}, X_{i+k-2}, ..., X_i)`, most recent first. The result has
/// `n - k + 1` states of dimension `d * k`.
pub fn stack(path: &ChainPath, k: usize) -> Result<ChainPath> {
    if k == 0 {
        return invalid("stacking order must be at least 1");
    }
    if k > path.len() {
        return invalid(format!("stacking order {k} exceeds path length {}", path.len()));
    }
    if k == 1 {
        return Ok(path.clone());
    }
    let d = path.dim();
    let m = path.len() - k + 1;
    let mut values = Vec::with_capacity(m * d * k);
    for i in 0..m {
        for lag in 0..k {
            values.extend_from_slice(path.state(i + k - 1 - lag));
        }
    }
    ChainPath::from_flat(values, d * k, format!("{}|stack({k})", path.origin))
}

/// Stationary distribution of a stochastic matrix by power iteration.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Vec<f64> {
    let k = transition.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for (i, row) in transition.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                next[j] += pi[i] * p;
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> ModelKind {
        ModelKind::FiniteMarkov { transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]], initial_state: 0 }
    }

    #[test]
    fn empty_path_for_every_model() {
        for kind in [two_state(), ModelKind::ar1_reference(), ModelKind::tgarch_reference()] {
            let p = simulate(&ModelSpec::new(kind, 3), 0).unwrap();
            assert!(p.is_empty());
            assert_eq!(p.len(), 0);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        for kind in [two_state(), ModelKind::ar1_reference(), ModelKind::tgarch_reference()] {
            let a = simulate(&ModelSpec::new(kind.clone(), 11), 500).unwrap();
            let b = simulate(&ModelSpec::new(kind.clone(), 11), 500).unwrap();
            let c = simulate(&ModelSpec::new(kind, 12), 500).unwrap();
            assert_eq!(a.as_flat(), b.as_flat());
            assert_ne!(a.as_flat(), c.as_flat());
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad_rows = ModelKind::FiniteMarkov { transition: vec![vec![0.5, 0.4], vec![0.5, 0.5]], initial_state: 0 };
        assert!(simulate(&ModelSpec::new(bad_rows, 0), 10).is_err());
        let negative = ModelKind::FiniteMarkov { transition: vec![vec![1.2, -0.2], vec![0.5, 0.5]], initial_state: 0 };
        assert!(simulate(&ModelSpec::new(negative, 0), 10).is_err());
        assert!(simulate(&ModelSpec::new(ModelKind::AR1Uniform { rho: 1.0 }, 0), 10).is_err());
        assert!(simulate(&ModelSpec::new(ModelKind::AR1Uniform { rho: -1.5 }, 0), 10).is_err());
    }

    #[test]
    fn ar1_stationary_variance() {
        let p = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 2024), 1_000_000).unwrap();
        let xs = p.as_flat();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        // innovation variance 12/3 = 4
        assert!((var - 4.0 / (1.0 - 0.81)).abs() < 0.3, "variance {var}");
    }

    #[test]
    fn ar1_innovations_are_bounded_uniform() {
        let p = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 5), 10_000).unwrap();
        let mut prev = 0.0;
        let h = 12f64.sqrt();
        for &x in p.as_flat() {
            let e: f64 = x - 0.9 * prev;
            assert!(e.abs() <= h + 1e-12);
            prev = x;
        }
    }

    #[test]
    fn tgarch_volatility_at_least_intercept() {
        let p = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), 9), 20_000).unwrap();
        let mut prev_x = 0.0;
        let mut prev_eps: f64 = 0.0;
        for &x in p.as_flat() {
            let sigma = 1.0 + 0.5 * prev_eps.abs() + 0.4 * prev_eps.max(0.0);
            assert!(sigma >= 1.0);
            prev_eps = x - 0.97 * prev_x;
            prev_x = x;
        }
    }

    #[test]
    fn finite_markov_visits_match_stationary_law() {
        let transition = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]];
        let pi = stationary_distribution(&transition);
        let kind = ModelKind::FiniteMarkov { transition, initial_state: 2 };
        let p = simulate(&ModelSpec::new(kind, 77), 100_000).unwrap();
        let mut counts = [0.0; 3];
        for &x in p.as_flat() {
            counts[x as usize] += 1.0;
        }
        let tv: f64 = counts.iter().zip(&pi).map(|(c, q)| (c / 1e5 - q).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01, "total variation {tv}");
    }

    #[test]
    fn stack_layout_is_most_recent_first() {
        let p = ChainPath::scalar(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(stack(&p, 1).unwrap().as_flat(), &[1.0, 2.0, 3.0]);
        let s2 = stack(&p, 2).unwrap();
        assert_eq!(s2.dim(), 2);
        assert_eq!(s2.as_flat(), &[2.0, 1.0, 3.0, 2.0]);
        let q = ChainPath::scalar(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(stack(&q, 3).unwrap().as_flat(), &[3.0, 2.0, 1.0, 4.0, 3.0, 2.0]);
        assert!(stack(&p, 4).is_err());
        assert!(stack(&p, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 1), 50).unwrap();
        let s = stack(&p, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x1,x2\n"));
        let back = ChainPath::read_csv(&buf[..]).unwrap();
        assert_eq!(back.as_flat(), s.as_flat());
        assert_eq!(back.dim(), 2);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ModelSpec::new(ModelKind::tgarch_reference(), 99);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("TGarchAR"));
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}

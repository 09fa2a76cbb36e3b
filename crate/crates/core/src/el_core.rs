//! Block moments and the empirical log-likelihood ratio.
//!
//! For block moments `Y_1..Y_l` the ratio is computed through its dual,
//! `r(θ) = sup_λ Σ_j log(1 + λ'Y_j)`, maximized by damped Newton with a
//! backtracking (Armijo) line search that never leaves the domain
//! `1 + λ'Y_j > 0`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};

use crate::chain_models::ChainPath;
use crate::error::{invalid, Error, Result};
use crate::regeneration::BlockPartition;

/// An estimating function `m(x, θ) ∈ R^r` with `θ ∈ R^p`, `r >= p`.
pub trait MomentModel: Send + Sync {
    fn param_dim(&self) -> usize;
    fn moment_dim(&self) -> usize;
    fn eval(&self, state: &[f64], theta: &[f64], out: &mut [f64]);

    /// Analytic `∂m/∂θ` (`r × p`), if known.
    fn jacobian(&self, _state: &[f64], _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// For models of the form `m(x, θ) = g(x) - θ`, writes `g(x)` and
    /// returns true. Such models have a closed-form maximum EL estimate.
    fn location_target(&self, _state: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// `∂m/∂θ` from the model when available, else by central differences.
pub fn jacobian_or_fd(model: &dyn MomentModel, state: &[f64], theta: &[f64]) -> DMatrix<f64> {
    if let Some(j) = model.jacobian(state, theta) {
        return j;
    }
    finite_difference_jacobian(model, state, theta)
}

pub fn finite_difference_jacobian(model: &dyn MomentModel, state: &[f64], theta: &[f64]) -> DMatrix<f64> {
    let (r, p) = (model.moment_dim(), model.param_dim());
    let mut jac = DMatrix::zeros(r, p);
    let mut plus = vec![0.0; r];
    let mut minus = vec![0.0; r];
    let mut t = theta.to_vec();
    for k in 0..p {
        let h = 1e-6 * theta[k].abs().max(1.0);
        t[k] = theta[k] + h;
        model.eval(state, &t, &mut plus);
        t[k] = theta[k] - h;
        model.eval(state, &t, &mut minus);
        t[k] = theta[k];
        for i in 0..r {
            jac[(i, k)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// `m(x, θ) = x_c - θ_k` for the listed coordinates `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanModel {
    pub coordinates: Vec<usize>,
}

impl MeanModel {
    pub fn scalar() -> Self {
        Self { coordinates: vec![0] }
    }

    pub fn of_dim(d: usize) -> Self {
        Self { coordinates: (0..d).collect() }
    }
}

impl MomentModel for MeanModel {
    fn param_dim(&self) -> usize {
        self.coordinates.len()
    }
    fn moment_dim(&self) -> usize {
        self.coordinates.len()
    }
    fn eval(&self, state: &[f64], theta: &[f64], out: &mut [f64]) {
        for (k, &c) in self.coordinates.iter().enumerate() {
            out[k] = state[c] - theta[k];
        }
    }
    fn jacobian(&self, _: &[f64], _: &[f64]) -> Option<DMatrix<f64>> {
        let p = self.coordinates.len();
        Some(-DMatrix::identity(p, p))
    }
    fn location_target(&self, state: &[f64], out: &mut [f64]) -> bool {
        for (k, &c) in self.coordinates.iter().enumerate() {
            out[k] = state[c];
        }
        true
    }
}

/// `m(x, θ) = 1{x_c >= threshold} - θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGe {
    pub threshold: f64,
    pub coordinate: usize,
}

impl IndicatorGe {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, coordinate: 0 }
    }

    pub fn indicator(&self, state: &[f64]) -> f64 {
        if state[self.coordinate] >= self.threshold {
            1.0
        } else {
            0.0
        }
    }
}

impl MomentModel for IndicatorGe {
    fn param_dim(&self) -> usize {
        1
    }
    fn moment_dim(&self) -> usize {
        1
    }
    fn eval(&self, state: &[f64], theta: &[f64], out: &mut [f64]) {
        out[0] = self.indicator(state) - theta[0];
    }
    fn jacobian(&self, _: &[f64], _: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, -1.0))
    }
    fn location_target(&self, state: &[f64], out: &mut [f64]) -> bool {
        out[0] = self.indicator(state);
        true
    }
}

/// One component of a [`PolynomialMoments`] model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolyTerm {
    /// `x_c^power - θ_param - offset` (`param` optional).
    Raw { coordinate: usize, power: i32, param: Option<usize>, offset: f64 },
    /// `(x_c - θ_param)^power - offset`.
    Central { coordinate: usize, power: i32, param: usize, offset: f64 },
}

/// Vector of polynomial moment conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMoments {
    pub params: usize,
    pub terms: Vec<PolyTerm>,
}

impl PolynomialMoments {
    pub fn new(params: usize, terms: Vec<PolyTerm>) -> Result<Self> {
        if terms.len() < params || params == 0 {
            return invalid("need at least as many moment terms as parameters, and one parameter");
        }
        for t in &terms {
            let p = match t {
                PolyTerm::Raw { param, .. } => *param,
                PolyTerm::Central { param, .. } => Some(*param),
            };
            if p.is_some_and(|p| p >= params) {
                return invalid("moment term refers to a parameter out of range");
            }
        }
        Ok(Self { params, terms })
    }

    /// Plug-in starting value: each parameter solves the sample mean of the
    /// first term that uses it, with the other parameters ignored.
    pub fn plug_in<'a>(&self, states: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
        let states: Vec<&[f64]> = states.collect();
        let mean = |f: &dyn Fn(&[f64]) -> f64| states.iter().map(|s| f(s)).sum::<f64>() / states.len().max(1) as f64;
        (0..self.params)
            .map(|p| {
                self.terms
                    .iter()
                    .find_map(|t| match *t {
                        PolyTerm::Raw { coordinate, power, param: Some(q), offset } if q == p => {
                            Some(mean(&|x| x[coordinate].powi(power)) - offset)
                        }
                        PolyTerm::Central { coordinate, param, .. } if param == p => Some(mean(&|x| x[coordinate])),
                        _ => None,
                    })
                    .unwrap_or(0.0)
            })
            .collect()
    }
}

impl MomentModel for PolynomialMoments {
    fn param_dim(&self) -> usize {
        self.params
    }
    fn moment_dim(&self) -> usize {
        self.terms.len()
    }
    fn eval(&self, state: &[f64], theta: &[f64], out: &mut [f64]) {
        for (k, t) in self.terms.iter().enumerate() {
            out[k] = match *t {
                PolyTerm::Raw { coordinate, power, param, offset } => {
                    state[coordinate].powi(power) - param.map_or(0.0, |p| theta[p]) - offset
                }
                PolyTerm::Central { coordinate, power, param, offset } => {
                    (state[coordinate] - theta[param]).powi(power) - offset
                }
            };
        }
    }
    fn jacobian(&self, state: &[f64], theta: &[f64]) -> Option<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.terms.len(), self.params);
        for (k, t) in self.terms.iter().enumerate() {
            match *t {
                PolyTerm::Raw { param: Some(p), .. } => j[(k, p)] = -1.0,
                PolyTerm::Raw { param: None, .. } => {}
                PolyTerm::Central { coordinate, power, param, .. } => {
                    j[(k, param)] = -(power as f64) * (state[coordinate] - theta[param]).powi(power - 1)
                }
            }
        }
        Some(j)
    }
}

type MomentFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type JacobianFn = dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync;

/// A moment model built from closures.
#[derive(Clone)]
pub struct FnMoment {
    params: usize,
    moments: usize,
    m: Arc<MomentFn>,
    jac: Option<Arc<JacobianFn>>,
}

impl FnMoment {
    pub fn new(params: usize, moments: usize, m: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self { params, moments, m: Arc::new(m), jac: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }
}

impl MomentModel for FnMoment {
    fn param_dim(&self) -> usize {
        self.params
    }
    fn moment_dim(&self) -> usize {
        self.moments
    }
    fn eval(&self, state: &[f64], theta: &[f64], out: &mut [f64]) {
        (self.m)(state, theta, out)
    }
    fn jacobian(&self, state: &[f64], theta: &[f64]) -> Option<DMatrix<f64>> {
        self.jac.as_ref().map(|j| j(state, theta))
    }
}

/// `Y_j = Σ_{i ∈ B_j} m(X_i, θ)` over the complete blocks.
pub fn block_moments(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if partition.path_len() != path.len() {
        return invalid(format!("partition covers {} observations, path has {}", partition.path_len(), path.len()));
    }
    if theta.len() != model.param_dim() {
        return invalid(format!("theta has {} components, model expects {}", theta.len(), model.param_dim()));
    }
    let r = model.moment_dim();
    let mut buf = vec![0.0; r];
    Ok(partition
        .complete_blocks()
        .map(|b| {
            let mut sum = vec![0.0; r];
            for i in b.positions() {
                model.eval(path.state(i), theta, &mut buf);
                for (s, v) in sum.iter_mut().zip(&buf) {
                    *s += v;
                }
            }
            sum
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElStatus {
    Converged,
    /// Zero lies outside the convex hull of the `Y_j`: the ratio is +∞.
    Unbounded,
    /// Iteration budget exhausted before the gradient tolerance was met.
    MaxIterations,
}

fn serialize_ratio<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElSolution {
    pub lambda: Vec<f64>,
    /// `Σ log(1 + λ'Y_j)`; `f64::INFINITY` when `status` is `Unbounded`.
    #[serde(serialize_with = "serialize_ratio")]
    pub ratio: f64,
    /// Implied weights `q_j = 1 / (l (1 + λ'Y_j))`; empty when unbounded.
    pub weights: Vec<f64>,
    pub status: ElStatus,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl ElSolution {
    pub fn is_unbounded(&self) -> bool {
        self.status == ElStatus::Unbounded
    }

    /// `2 r`, the statistic compared with chi-square quantiles.
    pub fn statistic(&self) -> f64 {
        2.0 * self.ratio
    }

    fn unbounded(r: usize, iterations: usize) -> Self {
        Self {
            lambda: vec![f64::NAN; r],
            ratio: f64::INFINITY,
            weights: Vec::new(),
            status: ElStatus::Unbounded,
            iterations,
            gradient_norm: f64::NAN,
        }
    }
}

const MAX_ITER: usize = 100;
const ARMIJO: f64 = 1e-4;
const DOMAIN_EPS: f64 = 1e-10;
const LAMBDA_LIMIT: f64 = 1e8;

fn objective(ys: &[DVector<f64>], lambda: &DVector<f64>) -> Option<f64> {
    let mut f = 0.0;
    for y in ys {
        let w = 1.0 + lambda.dot(y);
        if !(w >= DOMAIN_EPS) {
            return None;
        }
        f += w.ln();
    }
    Some(f)
}

/// Maximizes the dual `f(λ) = Σ log(1 + λ'Y_j)`.
pub fn el_ratio(y: &[Vec<f64>]) -> Result<ElSolution> {
    let l = y.len();
    if l == 0 {
        return Err(Error::NotEnoughBlocks { blocks: 0, needed: 1 });
    }
    let r = y[0].len();
    if r == 0 || y.iter().any(|v| v.len() != r) {
        return invalid("block moments must share a positive dimension");
    }
    if r > l {
        return Err(Error::NotEnoughBlocks { blocks: l, needed: r });
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite block moment".into()));
    }
    if r == 1 {
        let lo = y.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = y.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        if (lo >= 0.0 && hi > 0.0) || (hi <= 0.0 && lo < 0.0) {
            return Ok(ElSolution::unbounded(1, 0));
        }
    }
    let ys: Vec<DVector<f64>> = y.iter().map(|v| DVector::from_column_slice(v)).collect();
    let scale = (ys.iter().map(|v| v.norm()).sum::<f64>() / l as f64).max(1.0);
    let tol = 1e-10 * scale;

    let mut lambda = DVector::zeros(r);
    let mut f: f64 = 0.0;
    let mut iterations = 0;
    let mut status = ElStatus::MaxIterations;
    let mut gnorm = f64::INFINITY;
    while iterations < MAX_ITER {
        let mut grad = DVector::zeros(r);
        let mut hess = DMatrix::zeros(r, r);
        for v in &ys {
            let w = 1.0 + lambda.dot(v);
            grad.axpy(1.0 / w, v, 1.0);
            hess.ger(1.0 / (w * w), v, v, 1.0);
        }
        gnorm = grad.norm();
        if gnorm < tol {
            status = ElStatus::Converged;
            break;
        }
        iterations += 1;
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => {
                let svd = hess.svd(true, true);
                svd.solve(&grad, 1e-14 * svd.singular_values.max()).map_err(|e| Error::Numerical(e.to_string()))?
            }
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        // predicted gain below rounding of f: the objective cannot rank the
        // step, take it whole
        if slope <= 1e-13 * (1.0 + f.abs()) {
            let cand = &lambda + &step;
            if let Some(fc) = objective(&ys, &cand) {
                lambda = cand;
                f = fc;
                continue;
            }
        }
        while t > 1e-30 {
            let cand = &lambda + &step * t;
            if let Some(fc) = objective(&ys, &cand) {
                if fc >= f + ARMIJO * t * slope {
                    lambda = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if lambda.norm() > LAMBDA_LIMIT {
            return Ok(ElSolution::unbounded(r, iterations));
        }
        if !accepted {
            // no ascent possible at machine precision
            if gnorm < 1e-6 * scale {
                status = ElStatus::Converged;
            }
            break;
        }
    }
    let weights = ys.iter().map(|v| 1.0 / (l as f64 * (1.0 + lambda.dot(v)))).collect();
    Ok(ElSolution { lambda: lambda.iter().copied().collect(), ratio: f.max(0.0), weights, status, iterations, gradient_norm: gnorm })
}

/// `r_n(θ)` for the complete blocks of `partition`.
pub fn el_ratio_at(
    path: &ChainPath,
    partition: &BlockPartition,
    model: &dyn MomentModel,
    theta: &[f64],
) -> Result<ElSolution> {
    el_ratio(&block_moments(path, partition, model, theta)?)
}

/// `l Ȳ' S^{-2} Ȳ` with `S² = l^{-1} Σ Y_j Y_j'`, the quadratic
/// approximation of `2 r`.
pub fn self_normalized_stat(y: &[Vec<f64>]) -> Result<f64> {
    let l = y.len();
    if l == 0 {
        return Err(Error::NotEnoughBlocks { blocks: 0, needed: 1 });
    }
    let r = y[0].len();
    let mut mean = DVector::zeros(r);
    let mut s2 = DMatrix::zeros(r, r);
    for v in y {
        let v = DVector::from_column_slice(v);
        mean += &v;
        s2.ger(1.0, &v, &v, 1.0);
    }
    mean /= l as f64;
    s2 /= l as f64;
    let chol = s2.cholesky().ok_or(Error::SingularVariance)?;
    let sol = chol.solve(&mean);
    Ok(l as f64 * mean.dot(&sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ys(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn centered_pair_has_zero_ratio() {
        let s = el_ratio(&ys(&[1.0, -1.0])).unwrap();
        assert_eq!(s.status, ElStatus::Converged);
        assert!(s.lambda[0].abs() < 1e-12);
        assert!(s.ratio.abs() < 1e-15);
        assert!((s.weights[0] - 0.5).abs() < 1e-12 && (s.weights[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_closed_form() {
        // −1/(1−λ) + 2/(1+2λ) = 0  ⇒  λ = 1/4, r = log(9/8)
        let s = el_ratio(&ys(&[-1.0, 2.0])).unwrap();
        assert_eq!(s.status, ElStatus::Converged);
        assert!((s.lambda[0] - 0.25).abs() < 1e-12);
        assert!((s.ratio - (9.0f64 / 8.0).ln()).abs() < 1e-12);
        assert!((s.weights[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_outside_hull_is_unbounded() {
        let s = el_ratio(&ys(&[1.0, 2.0, 3.0])).unwrap();
        assert!(s.is_unbounded());
        assert!(s.ratio.is_infinite());
        assert_eq!(serde_json::to_value(&s).unwrap()["ratio"], "inf");
        assert!(el_ratio(&ys(&[0.0, 2.0])).unwrap().is_unbounded());
        let planar = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![1.0, -1.0], vec![3.0, 0.5]];
        assert!(el_ratio(&planar).unwrap().is_unbounded());
    }

    #[test]
    fn too_few_blocks() {
        assert!(matches!(el_ratio(&[]), Err(Error::NotEnoughBlocks { .. })));
        assert!(matches!(el_ratio(&[vec![1.0, -1.0]]), Err(Error::NotEnoughBlocks { blocks: 1, needed: 2 })));
    }

    #[test]
    fn self_normalized_examples() {
        assert!((self_normalized_stat(&ys(&[-1.0, 2.0])).unwrap() - 0.2).abs() < 1e-14);
        assert!(self_normalized_stat(&ys(&[-1.0, 1.0])).unwrap().abs() < 1e-15);
        assert!(matches!(self_normalized_stat(&ys(&[0.0, 0.0])), Err(Error::SingularVariance)));
        let y = ys(&[-1.0, 2.0, 0.5, -0.3]);
        let scaled: Vec<Vec<f64>> = y.iter().map(|v| vec![-7.5 * v[0]]).collect();
        let a = self_normalized_stat(&y).unwrap();
        let b = self_normalized_stat(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn block_moments_sum_over_complete_blocks() {
        let path = ChainPath::scalar(&[1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 5.0]).unwrap();
        let part = crate::regeneration::atomic_blocks(&path, |s| s[0] == 0.0).unwrap();
        let y = block_moments(&path, &part, &MeanModel::scalar(), &[0.0]).unwrap();
        assert_eq!(y, vec![vec![2.0], vec![1.0]]);
        let total: f64 = y.iter().map(|v| v[0]).sum();
        let direct: f64 = (part.regeneration_times()[0]..*part.regeneration_times().last().unwrap())
            .map(|i| path.state(i)[0])
            .sum();
        assert_eq!(total, direct);
    }

    #[test]
    fn single_observation_blocks() {
        let path = ChainPath::scalar(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        let part = crate::regeneration::atomic_blocks(&path, |_| true).unwrap();
        let y = block_moments(&path, &part, &MeanModel::scalar(), &[0.5]).unwrap();
        assert_eq!(y, vec![vec![-0.5]; 3]);
    }

    #[test]
    fn fd_jacobian_agrees_with_analytic() {
        let model = PolynomialMoments::new(
            2,
            vec![
                PolyTerm::Central { coordinate: 0, power: 3, param: 0, offset: 0.2 },
                PolyTerm::Raw { coordinate: 1, power: 2, param: Some(1), offset: 0.0 },
                PolyTerm::Raw { coordinate: 0, power: 1, param: None, offset: 1.0 },
            ],
        )
        .unwrap();
        let state = [0.7, -1.3];
        let theta = [0.2, 1.1];
        let a = model.jacobian(&state, &theta).unwrap();
        let f = finite_difference_jacobian(&model, &state, &theta);
        assert!((a - f).amax() < 1e-5);
    }

    fn primal_value(y: &[f64], q: &[f64]) -> f64 {
        let l = y.len() as f64;
        q.iter().map(|&w| (l * w).ln()).sum()
    }

    proptest! {
        #[test]
        fn weights_lie_on_simplex_and_balance(values in proptest::collection::vec(-5.0f64..5.0, 3..40)) {
            let mut y = ys(&values);
            y.push(vec![-1.0]);
            y.push(vec![1.0]);
            let s = el_ratio(&y).unwrap();
            prop_assert_eq!(s.status, ElStatus::Converged);
            let total: f64 = s.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            prop_assert!(s.weights.iter().all(|&w| w >= 0.0));
            let balance: f64 = s.weights.iter().zip(&y).map(|(w, v)| w * v[0]).sum();
            prop_assert!(balance.abs() < 1e-8);
            prop_assert!(s.ratio >= 0.0);
            let flat: Vec<f64> = y.iter().map(|v| v[0]).collect();
            prop_assert!((primal_value(&flat, &s.weights) + s.ratio).abs() < 1e-8);
        }

        #[test]
        fn affine_invariance(
            pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 6..30),
            a in (0.5f64..2.0, -1.0f64..1.0, -1.0f64..1.0, 0.5f64..2.0),
        ) {
            let mut y: Vec<Vec<f64>> = pts.iter().map(|&(u, v)| vec![u, v]).collect();
            y.extend([vec![-2.0, -1.0], vec![2.0, -1.0], vec![0.0, 2.0]]);
            let m = DMatrix::from_row_slice(2, 2, &[a.0, a.1, a.2, a.3]);
            prop_assume!(m.determinant().abs() > 0.1);
            let ay: Vec<Vec<f64>> = y.iter().map(|v| {
                let w = &m * DVector::from_column_slice(v);
                vec![w[0], w[1]]
            }).collect();
            let s = el_ratio(&y).unwrap();
            let t = el_ratio(&ay).unwrap();
            prop_assert_eq!(s.status, ElStatus::Converged);
            prop_assert_eq!(t.status, ElStatus::Converged);
            prop_assert!((s.ratio - t.ratio).abs() < 1e-8 * (1.0 + s.ratio));
            for (p, q) in s.weights.iter().zip(&t.weights) {
                prop_assert!((p - q).abs() < 1e-8);
            }
            let mapped = m.transpose().try_inverse().unwrap() * DVector::from_column_slice(&s.lambda);
            prop_assert!((mapped[0] - t.lambda[0]).abs() < 1e-6 * (1.0 + mapped.norm()));
            prop_assert!((mapped[1] - t.lambda[1]).abs() < 1e-6 * (1.0 + mapped.norm()));
        }

        #[test]
        fn ratio_zero_iff_centered(values in proptest::collection::vec(-5.0f64..5.0, 2..30)) {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
            prop_assume!(centered.iter().any(|v| v.abs() > 1e-3));
            let s = el_ratio(&ys(&centered)).unwrap();
            prop_assert!(s.ratio < 1e-12);
            let shifted: Vec<f64> = centered.iter().map(|v| v + 0.1).collect();
            let t = el_ratio(&ys(&shifted)).unwrap();
            prop_assert!(t.ratio > 1e-6);
        }
    }
}

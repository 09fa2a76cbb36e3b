use serde::{Deserialize, Serialize};

use super::density::{PairDensities, TransitionDensity};
use crate::chain_models::ChainPath;
use crate::error::{invalid, Error, Result};

/// Floor applied to density values inside the small set.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Axis-aligned box `Π_k [lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSetBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SmallSetBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("box bounds must be nonempty and of equal length");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return invalid("box bounds must be finite with lo <= hi");
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Cartesian grid with `g` equispaced points per axis, endpoints included.
    pub fn grid_points(&self, g: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| {
                if g < 2 || a == b {
                    vec![0.5 * (a + b)]
                } else {
                    (0..g).map(|k| a + (b - a) * k as f64 / (g - 1) as f64).collect()
                }
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Minorizing measure on the small set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phi {
    /// Uniform density `1 / volume(S)` on the box.
    Uniform,
    /// Point mass for an exact atom: the Bernoulli parameter is `δ` itself.
    Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSetSpec {
    #[serde(rename = "box")]
    pub bounds: SmallSetBox,
    pub delta: f64,
    pub phi: Phi,
    /// Points per axis of the grid on which `δ` was minimized.
    pub grid: usize,
    #[serde(default)]
    pub visits: usize,
    #[serde(default)]
    pub expected_regenerations: f64,
}

impl SmallSetSpec {
    /// An exact atom: every visit to `bounds` regenerates.
    pub fn atom(bounds: SmallSetBox) -> Self {
        Self { bounds, delta: 1.0, phi: Phi::Atom, grid: 0, visits: 0, expected_regenerations: 0.0 }
    }

    pub fn phi_density(&self, y: &[f64]) -> f64 {
        match self.phi {
            Phi::Atom => 1.0,
            Phi::Uniform if self.bounds.contains(y) => 1.0 / self.bounds.volume(),
            Phi::Uniform => 0.0,
        }
    }

    /// Unclamped Bernoulli parameter `δ φ(y) / p_n(x, y)` for a visit at `x`
    /// followed by `y`.
    pub fn raw_parameter(&self, p_xy: f64) -> f64 {
        self.delta / (self.bounds.volume() * p_xy.max(DENSITY_FLOOR))
    }

    /// Empirical minorization check on the evaluation grid: the smallest
    /// value of `p_n(x, y) - δ φ(y)`.
    pub fn minorization_gap(&self, density: &dyn TransitionDensity) -> f64 {
        let pts = self.bounds.grid_points(self.grid.max(2));
        let values = density.density_grid(&pts, &pts);
        let phi = 1.0 / self.bounds.volume();
        values.iter().map(|p| p.max(DENSITY_FLOOR) - self.delta * phi).fold(f64::INFINITY, f64::min)
    }
}

/// Points per axis for the `δ` grid in dimension `d`.
pub fn default_grid(d: usize) -> usize {
    match d {
        1 => 50,
        2 => 15,
        3 => 8,
        _ => 5,
    }
}

/// `[-a, a]^dim` for each half-width `a`.
pub fn symmetric_candidates(half_widths: &[f64], dim: usize) -> Vec<SmallSetBox> {
    half_widths.iter().filter_map(|&a| SmallSetBox::cube(-a, a, dim).ok()).collect()
}

/// Central boxes spanning the `[0.5 - c/2, 0.5 + c/2]` sample quantile range
/// of every coordinate, for coverages `c = 0.1, 0.2, ..., 0.9`.
pub fn default_candidates(path: &ChainPath) -> Vec<SmallSetBox> {
    let d = path.dim();
    let sorted: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let mut v = path.coordinate(c);
            v.sort_by(|a, b| a.total_cmp(b));
            v
        })
        .collect();
    if sorted[0].is_empty() {
        return Vec::new();
    }
    (1..=9)
        .filter_map(|k| {
            let c = k as f64 / 10.0;
            let lo = sorted.iter().map(|s| crate::dist::empirical_quantile(s, 0.5 - c / 2.0)).collect();
            let hi = sorted.iter().map(|s| crate::dist::empirical_quantile(s, 0.5 + c / 2.0)).collect();
            SmallSetBox::new(lo, hi).ok()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOptions {
    /// Points per axis; `None` uses [`default_grid`].
    pub grid: Option<usize>,
    /// Candidates with fewer expected regenerations are not viable.
    pub min_expected: f64,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self { grid: None, min_expected: 2.0 }
    }
}

/// Computes `δ = volume(S) · min_grid p_n` and the visit count and expected
/// number of regenerations for one box.
pub(crate) fn evaluate_candidate(
    path: &ChainPath,
    density: &dyn TransitionDensity,
    bounds: &SmallSetBox,
    grid: usize,
    pairs: &mut PairDensities,
) -> SmallSetSpec {
    let pts = bounds.grid_points(grid);
    let values = density.density_grid(&pts, &pts);
    let min_p = values.iter().cloned().fold(f64::INFINITY, f64::min).max(DENSITY_FLOOR);
    let delta = (bounds.volume() * min_p).min(1.0);
    let mut spec = SmallSetSpec {
        bounds: bounds.clone(),
        delta,
        phi: Phi::Uniform,
        grid,
        visits: 0,
        expected_regenerations: 0.0,
    };
    let n = path.len();
    for i in 0..n {
        if !bounds.contains(path.state(i)) {
            continue;
        }
        spec.visits += 1;
        if i + 1 < n && bounds.contains(path.state(i + 1)) {
            spec.expected_regenerations += spec.raw_parameter(pairs.get(i, path, density)).min(1.0);
        }
    }
    spec
}

/// `δ`, visits and expected regenerations for a fixed box.
pub fn evaluate_small_set(
    path: &ChainPath,
    density: &dyn TransitionDensity,
    bounds: &SmallSetBox,
    grid: Option<usize>,
    pairs: &mut PairDensities,
) -> Result<SmallSetSpec> {
    if bounds.dim() != path.dim() {
        return invalid(format!("box of dimension {} for a {}-dimensional path", bounds.dim(), path.dim()));
    }
    let grid = grid.unwrap_or_else(|| default_grid(path.dim()));
    Ok(evaluate_candidate(path, density, bounds, grid, pairs))
}

/// Picks the candidate box with the largest expected number of
/// regenerations `Σ_{X_i ∈ S} δ φ(X_{i+1}) / p_n(X_i, X_{i+1})`; ties go to
/// the smaller volume.
pub fn select_small_set(
    path: &ChainPath,
    density: &dyn TransitionDensity,
    candidates: &[SmallSetBox],
    options: &SelectionOptions,
) -> Result<SmallSetSpec> {
    select_small_set_with(path, density, candidates, options, &mut PairDensities::new(path.len()))
}

/// [`select_small_set`] reusing (and filling) a pair-density memo.
pub fn select_small_set_with(
    path: &ChainPath,
    density: &dyn TransitionDensity,
    candidates: &[SmallSetBox],
    options: &SelectionOptions,
    pairs: &mut PairDensities,
) -> Result<SmallSetSpec> {
    if candidates.is_empty() {
        return invalid("no small-set candidates");
    }
    if let Some(c) = candidates.iter().find(|c| c.dim() != path.dim()) {
        return invalid(format!("candidate of dimension {} for a {}-dimensional path", c.dim(), path.dim()));
    }
    let grid = options.grid.unwrap_or_else(|| default_grid(path.dim()));
    let mut best: Option<SmallSetSpec> = None;
    for c in candidates {
        let spec = evaluate_candidate(path, density, c, grid, pairs);
        if spec.visits < 2 || !(spec.delta > DENSITY_FLOOR) || spec.expected_regenerations < options.min_expected {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                spec.expected_regenerations > b.expected_regenerations
                    || (spec.expected_regenerations == b.expected_regenerations
                        && spec.bounds.volume() < b.bounds.volume())
            }
        };
        if better {
            best = Some(spec);
        }
    }
    best.ok_or(Error::NoViableSmallSet { candidates: candidates.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_models::{simulate, ModelKind, ModelSpec};
    use crate::regeneration::{estimate_transition_density, Bandwidth};

    pub(crate) struct Constant(pub f64, pub usize);

    impl TransitionDensity for Constant {
        fn dim(&self) -> usize {
            self.1
        }
        fn density(&self, _: &[f64], _: &[f64]) -> f64 {
            self.0
        }
    }

    #[test]
    fn constant_density_gives_c_times_volume() {
        let path = ChainPath::scalar(&[0.1, 0.2, 0.3, 0.1, 0.4]).unwrap();
        let b = SmallSetBox::cube(0.0, 0.5, 1).unwrap();
        let spec = select_small_set(&path, &Constant(1.2, 1), &[b], &SelectionOptions::default()).unwrap();
        assert!((spec.delta - 0.6).abs() < 1e-15);
        // every step stays inside S and δφ/p = 0.6 · 2 / 1.2 = 1
        assert!((spec.expected_regenerations - 4.0).abs() < 1e-12);
        assert_eq!(spec.visits, 5);
    }

    #[test]
    fn singleton_candidate_is_returned() {
        let path = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 1), 400).unwrap();
        let est = estimate_transition_density(&path, &Bandwidth::Auto).unwrap();
        let b = SmallSetBox::cube(-1.0, 1.0, 1).unwrap();
        let spec = select_small_set(&path, &est, std::slice::from_ref(&b), &SelectionOptions::default()).unwrap();
        assert_eq!(spec.bounds, b);
        assert!(spec.delta > 0.0 && spec.delta <= 1.0);
        assert!(spec.minorization_gap(&est) >= -1e-12);
    }

    #[test]
    fn unvisited_candidates_are_not_viable() {
        let path = ChainPath::scalar(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let b = SmallSetBox::cube(10.0, 11.0, 1).unwrap();
        assert!(matches!(
            select_small_set(&path, &Constant(0.3, 1), &[b], &SelectionOptions::default()),
            Err(Error::NoViableSmallSet { candidates: 1 })
        ));
    }

    #[test]
    fn grid_has_corners() {
        let b = SmallSetBox::cube(-1.0, 2.0, 2).unwrap();
        let g = b.grid_points(3);
        assert_eq!(g.len(), 9);
        assert!(g.contains(&vec![-1.0, 2.0]));
        assert!(g.contains(&vec![0.5, 0.5]));
        assert_eq!(b.volume(), 9.0);
    }

    #[test]
    fn default_candidates_are_nested() {
        let path = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 1), 400).unwrap();
        let c = default_candidates(&path);
        assert_eq!(c.len(), 9);
        assert!(c.windows(2).all(|w| w[0].volume() <= w[1].volume()));
    }

    #[test]
    fn json_layout() {
        let spec = SmallSetSpec {
            bounds: SmallSetBox::cube(-1.3, 4.7, 2).unwrap(),
            delta: 0.01,
            phi: Phi::Uniform,
            grid: 15,
            visits: 231,
            expected_regenerations: 18.0,
        };
        let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["phi"], "uniform");
        assert_eq!(v["box"]["lo"][1], -1.3);
        assert_eq!(v["grid"], 15);
    }
}

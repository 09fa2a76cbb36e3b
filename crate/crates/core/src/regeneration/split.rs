use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::{PairDensities, TransitionDensity};
use super::small_set::{Phi, SmallSetSpec};
use super::BlockPartition;
use crate::chain_models::ChainPath;
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, STREAM_SPLIT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub partition: BlockPartition,
    /// Number of `i` with `X_i ∈ S`.
    pub visits: usize,
    /// Bernoulli parameters that exceeded 1 and were clamped.
    pub clamped: usize,
}

/// Approximate Nummelin splitting. At each visit `X_i ∈ S` (with `i < n`) a
/// mark `W_i ~ Bernoulli(δ φ(X_{i+1}) / p(X_i, X_{i+1}))` is drawn and `i`
/// is a regeneration time when `W_i = 1`. With [`Phi::Atom`] the parameter
/// is `δ` and the last observation may also regenerate.
///
/// `density` may be `None` only for [`Phi::Atom`]. One uniform is drawn
/// per visit, in path order, from the split stream of `seed`.
pub fn split(
    path: &ChainPath,
    small_set: &SmallSetSpec,
    density: Option<&dyn TransitionDensity>,
    seed: u64,
) -> Result<SplitOutcome> {
    split_with(path, small_set, density, seed, &mut PairDensities::new(path.len()))
}

/// [`split`] reusing (and filling) a pair-density memo.
pub fn split_with(
    path: &ChainPath,
    small_set: &SmallSetSpec,
    density: Option<&dyn TransitionDensity>,
    seed: u64,
    pairs: &mut PairDensities,
) -> Result<SplitOutcome> {
    let n = path.len();
    if n < 2 {
        return invalid("splitting needs a path of length at least 2");
    }
    if !(small_set.delta > 0.0 && small_set.delta <= 1.0) {
        return invalid(format!("delta = {} must lie in (0, 1]", small_set.delta));
    }
    if small_set.bounds.dim() != path.dim() {
        return invalid("small set and path dimensions differ");
    }
    let density = match (small_set.phi, density) {
        (Phi::Uniform, None) => return invalid("a uniform minorizing measure needs a transition density"),
        (_, d) => d,
    };
    let mut rng = stream_rng(seed, STREAM_SPLIT);
    let mut times = Vec::new();
    let mut visits = 0;
    let mut clamped = 0;
    for i in 0..n {
        let x = path.state(i);
        if !small_set.bounds.contains(x) {
            continue;
        }
        visits += 1;
        let u: f64 = rng.random();
        let param = match small_set.phi {
            Phi::Atom => small_set.delta,
            Phi::Uniform => {
                if i + 1 >= n {
                    continue;
                }
                let y = path.state(i + 1);
                if !small_set.bounds.contains(y) {
                    0.0
                } else {
                    let raw = small_set.raw_parameter(pairs.get(i, path, density.unwrap()));
                    if raw > 1.0 {
                        clamped += 1;
                    }
                    raw.min(1.0)
                }
            }
        };
        if u < param {
            times.push(i + 1);
        }
    }
    if times.len() < 2 {
        return Err(Error::NoRegeneration { visits, regenerations: times.len() });
    }
    Ok(SplitOutcome { partition: BlockPartition::from_times(n, times)?, visits, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_models::{simulate, stack, ModelKind, ModelSpec};
    use crate::regeneration::{atomic_blocks, estimate_transition_density, Bandwidth, SmallSetBox};

    struct Constant(f64);

    impl TransitionDensity for Constant {
        fn dim(&self) -> usize {
            1
        }
        fn density(&self, _: &[f64], _: &[f64]) -> f64 {
            self.0
        }
    }

    fn uniform_spec(lo: f64, hi: f64, delta: f64) -> SmallSetSpec {
        SmallSetSpec {
            bounds: SmallSetBox::cube(lo, hi, 1).unwrap(),
            delta,
            phi: Phi::Uniform,
            grid: 50,
            visits: 0,
            expected_regenerations: 0.0,
        }
    }

    #[test]
    fn perfect_minorization_regenerates_at_every_visit() {
        // p = φ = 1 on S = [0, 1], δ = 1
        let path = ChainPath::scalar(&[0.2, 0.5, 3.0, 0.1, 0.9, 0.4, 2.0]).unwrap();
        let out = split(&path, &uniform_spec(0.0, 1.0, 1.0), Some(&Constant(1.0)), 5).unwrap();
        // visits followed by another visit: positions 1, 4, 5
        assert_eq!(out.partition.regeneration_times(), &[1, 4, 5]);
        assert_eq!(out.visits, 5);
        assert_eq!(out.clamped, 0);
    }

    #[test]
    fn half_parameter_gives_binomial_count() {
        let values: Vec<f64> = (0..232).map(|i| 0.001 * i as f64).collect();
        let path = ChainPath::scalar(&values).unwrap();
        let spec = uniform_spec(0.0, 1.0, 0.5);
        let counts: Vec<f64> = (0..300)
            .map(|seed| split(&path, &spec, Some(&Constant(1.0)), seed).unwrap().partition.regeneration_times().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        // Binomial(231, 0.5): mean 115.5, variance 57.75
        assert!((mean - 115.5).abs() < 3.0 * (57.75f64 / 300.0).sqrt() + 0.5, "mean {mean}");
        assert!((var / 57.75 - 1.0).abs() < 0.3, "var {var}");
    }

    #[test]
    fn exact_atom_matches_atomic_blocks() {
        let kind = ModelKind::FiniteMarkov {
            transition: vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]],
            initial_state: 2,
        };
        let path = simulate(&ModelSpec::new(kind, 12), 3000).unwrap();
        let exact = atomic_blocks(&path, |s| s[0] == 1.0).unwrap();
        let spec = SmallSetSpec::atom(SmallSetBox::cube(1.0, 1.0, 1).unwrap());
        let out = split(&path, &spec, None, 99).unwrap();
        assert_eq!(out.partition, exact);
    }

    #[test]
    fn deterministic_and_leaves_path_untouched() {
        let path = simulate(&ModelSpec::new(ModelKind::ar1_reference(), 6), 1000).unwrap();
        let before = path.clone();
        let est = estimate_transition_density(&path, &Bandwidth::Auto).unwrap();
        let spec = uniform_spec(-1.5, 1.5, 0.3);
        let a = split(&path, &spec, Some(&est), 17).unwrap();
        let b = split(&path, &spec, Some(&est), 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(path, before);
    }

    #[test]
    fn tgarch_reference_small_set_visits_and_renewals() {
        let box2 = SmallSetBox::cube(-1.3, 4.7, 2).unwrap();
        let mut visits = Vec::new();
        let mut renewals = Vec::new();
        for seed in 0..20 {
            let raw = simulate(&ModelSpec::new(ModelKind::tgarch_reference(), seed), 1000).unwrap();
            let path = stack(&raw, 2).unwrap();
            let est = estimate_transition_density(&path, &Bandwidth::Auto).unwrap();
            let mut pairs = PairDensities::new(path.len());
            let spec = crate::regeneration::evaluate_small_set(&path, &est, &box2, Some(15), &mut pairs).unwrap();
            match split_with(&path, &spec, Some(&est), seed, &mut pairs) {
                Ok(out) => {
                    visits.push(out.visits as f64);
                    renewals.push(out.partition.regeneration_times().len() as f64);
                }
                Err(Error::NoRegeneration { visits: v, regenerations }) => {
                    visits.push(v as f64);
                    renewals.push(regenerations as f64);
                }
                Err(e) => panic!("{e}"),
            }
        }
        let mv = visits.iter().sum::<f64>() / 20.0;
        let mr = renewals.iter().sum::<f64>() / 20.0;
        assert!((mv - 231.0).abs() <= 80.0, "mean visits {mv}");
        assert!((mr - 18.0).abs() <= 12.0, "mean renewals {mr}");
    }
}

//! Monte Carlo replication engine: coverage and type-II error tables,
//! QQ data for the Wilks approximation, and empirical versus predicted
//! local power.
//!
//! Replication `i` runs on the seed [`replication_seed`]`(seed, i)` and
//! results are reduced in index order, so a report depends only on the
//! experiment, not on the number of workers.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bel_moments, block_bootstrap_variance, BlockLength, Method};
use crate::chain_models::{simulate, stack, ChainPath, ModelKind, ModelSpec};
use crate::dist::{chi2_cdf, chi2_quantile, empirical_quantile, ks_distance, normal_quantile};
use crate::el_core::{el_ratio, IndicatorGe, MeanModel, MomentModel};
use crate::error::{invalid, Error, Result};
use crate::inference::predicted_power;
use crate::regeneration::{
    atomic_blocks, estimate_transition_density, evaluate_small_set, select_small_set_with, split_with, Bandwidth,
    BlockPartition, PairDensities, SelectionOptions, SmallSetBox,
};
use crate::rng::replication_seed;

/// Scalar estimating function `m(x, θ) = g(x) - θ`, with `g` read from the
/// first coordinate of the (possibly stacked) state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MomentPreset {
    Mean,
    IndicatorGe { threshold: f64 },
}

impl MomentPreset {
    pub fn g(&self, state: &[f64]) -> f64 {
        match *self {
            MomentPreset::Mean => state[0],
            MomentPreset::IndicatorGe { threshold } => (state[0] >= threshold) as u8 as f64,
        }
    }

    pub fn model(&self) -> Box<dyn MomentModel> {
        match *self {
            MomentPreset::Mean => Box::new(MeanModel::scalar()),
            MomentPreset::IndicatorGe { threshold } => Box::new(IndicatorGe::new(threshold)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SmallSetPolicy {
    /// Select, in every replication, the candidate interval (as a cube in
    /// the stacked dimension) with the most expected regenerations.
    PerReplication { candidates: Vec<(f64, f64)> },
    /// Use one box in every replication; `δ` is recomputed from each
    /// replication's density estimate.
    Frozen { interval: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockScheme {
    /// Exact blocks at visits to the state `atom`.
    Atomic { atom: f64 },
    /// Nummelin splitting of the path stacked to order `stack`.
    Split { stack: usize, policy: SmallSetPolicy, bandwidth: Bandwidth, grid: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelKind,
    pub n: usize,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub level: f64,
    /// Offsets `a`: the tested value is `θ_0 + a / √n`.
    pub alternatives: Vec<f64>,
    pub theta0: f64,
    pub moment: MomentPreset,
    pub blocks: BlockScheme,
    pub bel_block: BlockLength,
    pub n_boot: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Never changes results.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replications == 0 {
            return invalid("replications must be at least 1");
        }
        if self.methods.is_empty() {
            return invalid("no methods selected");
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return invalid("level must lie in (0, 1)");
        }
        if self.alternatives.is_empty() || self.alternatives.iter().any(|a| !a.is_finite()) {
            return invalid("alternatives must be a nonempty list of finite offsets");
        }
        if self.n < 2 {
            return invalid("n must be at least 2");
        }
        if self.methods.iter().any(|m| matches!(m, Method::Mean | Method::Trunc)) && self.n_boot < 2 {
            return invalid("n_boot must be at least 2");
        }
        if let BlockScheme::Split { stack, policy, .. } = &self.blocks {
            if *stack == 0 {
                return invalid("stacking order must be at least 1");
            }
            if let SmallSetPolicy::PerReplication { candidates } = policy {
                if candidates.is_empty() {
                    return invalid("no small-set candidates");
                }
            }
        }
        Ok(())
    }

    /// Tested parameter values, one per alternative.
    pub fn thetas(&self) -> Vec<f64> {
        let root = (self.n as f64).sqrt();
        self.alternatives.iter().map(|a| self.theta0 + a / root).collect()
    }

    fn needs_blocks(&self) -> bool {
        self.methods.iter().any(|m| matches!(m, Method::ReBel | Method::Trunc))
    }
}

/// AR(1) with uniform innovations, mean moment, ReBEL against BEL; the small
/// set `[-a, a]` is chosen per replication from `a ∈ {0.5, 1, ..., 4}`.
pub fn table1(n: usize, replications: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: "table1".into(),
        model: ModelKind::ar1_reference(),
        n,
        replications,
        methods: vec![Method::ReBel, Method::Bel],
        level: 0.95,
        alternatives: vec![0.0],
        theta0: 0.0,
        moment: MomentPreset::Mean,
        blocks: BlockScheme::Split {
            stack: 1,
            policy: SmallSetPolicy::PerReplication { candidates: (1..=8).map(|k| (-0.5 * k as f64, 0.5 * k as f64)).collect() },
            bandwidth: Bandwidth::Auto,
            grid: None,
        },
        bel_block: BlockLength::Auto,
        n_boot: 500,
        seed,
        workers: None,
    }
}

/// `P(X >= 10)` under the stationary law of the reference TGARCH process.
pub const TGARCH_THETA0: f64 = 0.1479;
/// The interval `S` whose square is the small set of the stacked TGARCH chain.
pub const TGARCH_SMALL_SET: (f64, f64) = (-1.3, 4.7);

/// TGARCH threshold-exceedance probability: all four methods at
/// `θ_0, θ_0 + 5/√n, θ_0 + 10/√n`, stacked to order 2 with the frozen small
/// set `[-1.3, 4.7]²`.
pub fn table2(n: usize, replications: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: "table2".into(),
        model: ModelKind::tgarch_reference(),
        n,
        replications,
        methods: Method::ALL.to_vec(),
        level: 0.95,
        alternatives: vec![0.0, 5.0, 10.0],
        theta0: TGARCH_THETA0,
        moment: MomentPreset::IndicatorGe { threshold: 10.0 },
        blocks: BlockScheme::Split {
            stack: 2,
            policy: SmallSetPolicy::Frozen { interval: TGARCH_SMALL_SET },
            bandwidth: Bandwidth::Auto,
            grid: None,
        },
        bel_block: BlockLength::Auto,
        n_boot: 500,
        seed,
        workers: None,
    }
}

/// ReBEL statistic at `θ_0` in the TGARCH setting.
pub fn qqplot(n: usize, replications: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: "qqplot".into(),
        methods: vec![Method::ReBel],
        alternatives: vec![0.0],
        ..table2(n, replications, seed)
    }
}

/// Two-state chain with transition matrix `[[0.7, 0.3], [0.2, 0.8]]`,
/// atom `{0}`, mean moment; `θ_0 = π(1) = 0.6`.
pub fn two_state(n: usize, replications: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: "two_state".into(),
        model: ModelKind::FiniteMarkov { transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]], initial_state: 0 },
        n,
        replications,
        methods: vec![Method::ReBel],
        level: 0.95,
        alternatives: vec![0.0],
        theta0: 0.6,
        moment: MomentPreset::Mean,
        blocks: BlockScheme::Atomic { atom: 0.0 },
        bel_block: BlockLength::Auto,
        n_boot: 500,
        seed,
        workers: None,
    }
}

/// Per-replication block diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockDiagnostics {
    pub visits: usize,
    pub blocks: usize,
    pub delta: f64,
    pub clamped: usize,
}

/// Regenerative blocks of one replication: the path they partition and the
/// block sums of `g` with block lengths.
struct RegenBlocks {
    path: ChainPath,
    partition: BlockPartition,
    sums: Vec<f64>,
    lengths: Vec<f64>,
    diag: BlockDiagnostics,
}

fn regen_blocks(spec: &ExperimentSpec, path: &ChainPath, seed: u64) -> Result<RegenBlocks> {
    let (stacked, partition, diag) = match &spec.blocks {
        BlockScheme::Atomic { atom } => {
            let part = atomic_blocks(path, |s| s[0] == *atom)?;
            let visits = part.regeneration_times().len();
            let diag = BlockDiagnostics { visits, blocks: part.complete_count(), delta: 1.0, clamped: 0 };
            (path.clone(), part, diag)
        }
        BlockScheme::Split { stack: k, policy, bandwidth, grid } => {
            let stacked = stack(path, *k)?;
            let density = estimate_transition_density(&stacked, bandwidth)?;
            let dim = stacked.dim();
            let mut pairs = PairDensities::new(stacked.len());
            let small = match policy {
                SmallSetPolicy::PerReplication { candidates } => {
                    let boxes: Vec<SmallSetBox> =
                        candidates.iter().filter_map(|&(lo, hi)| SmallSetBox::cube(lo, hi, dim).ok()).collect();
                    let options = SelectionOptions { grid: *grid, ..Default::default() };
                    select_small_set_with(&stacked, &density, &boxes, &options, &mut pairs)?
                }
                SmallSetPolicy::Frozen { interval } => {
                    let b = SmallSetBox::cube(interval.0, interval.1, dim)?;
                    let s = evaluate_small_set(&stacked, &density, &b, *grid, &mut pairs)?;
                    if s.visits == 0 {
                        return Err(Error::NoRegeneration { visits: 0, regenerations: 0 });
                    }
                    s
                }
            };
            let out = split_with(&stacked, &small, Some(&density), seed, &mut pairs)?;
            let diag = BlockDiagnostics {
                visits: out.visits,
                blocks: out.partition.complete_count(),
                delta: small.delta,
                clamped: out.clamped,
            };
            (stacked, out.partition, diag)
        }
    };
    let mut sums = Vec::with_capacity(partition.complete_count());
    let mut lengths = Vec::with_capacity(partition.complete_count());
    for b in partition.complete_blocks() {
        sums.push(b.positions().map(|i| spec.moment.g(stacked.state(i))).sum());
        lengths.push(b.len() as f64);
    }
    Ok(RegenBlocks { path: stacked, partition, sums, lengths, diag })
}

/// Outcome of one method in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// Test statistic per alternative (`+∞` when `θ` is outside the hull).
    Statistics(Vec<f64>),
    /// The method could not be applied; the error kind is recorded.
    Failed(FailureKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    NoRegeneration,
    NotEnoughBlocks,
    NotConverged,
    Other,
}

impl From<&Error> for FailureKind {
    fn from(e: &Error) -> Self {
        match e {
            Error::NoRegeneration { .. } | Error::NoViableSmallSet { .. } => FailureKind::NoRegeneration,
            Error::NotEnoughBlocks { .. } => FailureKind::NotEnoughBlocks,
            Error::EstimateNotConverged { .. } => FailureKind::NotConverged,
            _ => FailureKind::Other,
        }
    }
}

/// Everything one replication produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    /// One entry per method of the experiment, in the same order.
    pub outcomes: Vec<Outcome>,
    pub blocks: Option<BlockDiagnostics>,
    /// `Σ̂` of the regenerative blocks at `θ_0`, when available.
    pub sigma: Option<f64>,
}

fn el_statistic(y: Vec<Vec<f64>>) -> Result<f64> {
    Ok(2.0 * el_ratio(&y)?.ratio)
}

/// Runs replication `index` of `spec`.
pub fn replicate(spec: &ExperimentSpec, index: usize) -> Replication {
    let seed = replication_seed(spec.seed, index as u64);
    let thetas = spec.thetas();
    let fail_all = |e: &Error, blocks| Replication {
        index,
        seed,
        outcomes: spec.methods.iter().map(|_| Outcome::Failed(e.into())).collect(),
        blocks,
        sigma: None,
    };
    let path = match simulate(&ModelSpec::new(spec.model.clone(), seed), spec.n) {
        Ok(p) => p,
        Err(e) => return fail_all(&e, None),
    };
    let regen = if spec.needs_blocks() { Some(regen_blocks(spec, &path, seed)) } else { None };
    let z = normal_quantile(0.5 + spec.level / 2.0);
    let mut sigma = None;
    let outcomes = spec
        .methods
        .iter()
        .map(|method| {
            let result: Result<Vec<f64>> = match method {
                Method::ReBel => match regen.as_ref().unwrap() {
                    Ok(rb) => {
                        let total: f64 = rb.lengths.iter().sum();
                        if rb.sums.len() >= 2 {
                            let s2: f64 = rb.sums.iter().zip(&rb.lengths).map(|(s, l)| (s - spec.theta0 * l).powi(2)).sum();
                            sigma = Some(s2 / total);
                        }
                        thetas
                            .iter()
                            .map(|t| {
                                let y = rb.sums.iter().zip(&rb.lengths).map(|(s, l)| vec![s - t * l]).collect();
                                el_statistic(y)
                            })
                            .collect()
                    }
                    Err(e) => Err(clone_error(e)),
                },
                Method::Bel => {
                    let l = spec.bel_block.resolve(path.len());
                    let model = spec.moment.model();
                    thetas.iter().map(|t| el_statistic(bel_moments(&path, model.as_ref(), &[*t], l)?)).collect()
                }
                Method::Mean => {
                    let values: Vec<f64> = path.states().map(|s| spec.moment.g(s)).collect();
                    gaussian_statistics(&values, spec, seed, &thetas, z)
                }
                Method::Trunc => match regen.as_ref().unwrap() {
                    Ok(rb) => {
                        let t = rb.partition.regeneration_times();
                        let values: Vec<f64> = (t[0]..*t.last().unwrap()).map(|i| spec.moment.g(rb.path.state(i))).collect();
                        gaussian_statistics(&values, spec, seed, &thetas, z)
                    }
                    Err(e) => Err(clone_error(e)),
                },
            };
            match result {
                Ok(s) => Outcome::Statistics(s),
                Err(e) => Outcome::Failed((&e).into()),
            }
        })
        .collect();
    let blocks = regen.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.diag);
    Replication { index, seed, outcomes, blocks, sigma }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::NoRegeneration { visits, regenerations } => {
            Error::NoRegeneration { visits: *visits, regenerations: *regenerations }
        }
        Error::NoViableSmallSet { candidates } => Error::NoViableSmallSet { candidates: *candidates },
        Error::NotEnoughBlocks { blocks, needed } => Error::NotEnoughBlocks { blocks: *blocks, needed: *needed },
        other => Error::Numerical(other.to_string()),
    }
}

/// Gaussian-interval test on the EL scale: `χ²_{1,level} · (|est - θ| / (z se))²`,
/// which is below `χ²_{1,level}` exactly when `θ` lies in `est ± z se`.
fn gaussian_statistics(values: &[f64], spec: &ExperimentSpec, seed: u64, thetas: &[f64], z: f64) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::NotEnoughBlocks { blocks: 0, needed: 2 });
    }
    let est = values.iter().sum::<f64>() / values.len() as f64;
    let l = spec.bel_block.resolve(values.len());
    let var = block_bootstrap_variance(values, l, spec.n_boot, seed)?;
    let crit = chi2_quantile(spec.level, 1);
    Ok(thetas
        .iter()
        .map(|t| {
            let d = (est - t).abs();
            if var > 0.0 {
                crit * (d / (z * var.sqrt())).powi(2)
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// Per-replication results in index order.
pub fn run_replications(spec: &ExperimentSpec) -> Result<Vec<Replication>> {
    spec.validate()?;
    let work = || (0..spec.replications).into_par_iter().map(|i| replicate(spec, i)).collect::<Vec<_>>();
    Ok(match spec.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?
            .install(work),
        None => work(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FailureCounts {
    pub no_regeneration: usize,
    pub not_enough_blocks: usize,
    pub not_converged: usize,
    pub other: usize,
    /// Statistics that were `+∞` (tested value outside the convex hull).
    /// These count as rejections, not failures.
    pub unbounded: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.no_regeneration + self.not_enough_blocks + self.not_converged + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    pub n: usize,
    pub alternative: f64,
    pub theta: f64,
    pub accepted: usize,
    pub successes: usize,
    /// Acceptance rate over successful replications: coverage at offset 0,
    /// type-II error otherwise.
    pub rate: f64,
    /// `sqrt(rate (1 - rate) / successes)`.
    pub se: f64,
    pub failures: FailureCounts,
    /// More than 5% of replications failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticSummary {
    pub replications: usize,
    pub mean_visits: f64,
    pub mean_blocks: f64,
    pub min_blocks: usize,
    pub max_blocks: usize,
    pub mean_delta: f64,
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub spec: ExperimentSpec,
    pub cells: Vec<Cell>,
    pub diagnostics: Option<DiagnosticSummary>,
    pub runtime_secs: f64,
}

impl McReport {
    pub fn cell(&self, method: Method, alternative: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.method == method && c.alternative == alternative)
    }

    /// CSV with columns `method,n,alternative,theta,rate,se,successes,failures,unbounded,flagged`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "n", "alternative", "theta", "rate", "se", "successes", "failures", "unbounded", "flagged"])?;
        for c in &self.cells {
            w.write_record([
                c.method.name().to_string(),
                c.n.to_string(),
                c.alternative.to_string(),
                c.theta.to_string(),
                c.rate.to_string(),
                c.se.to_string(),
                c.successes.to_string(),
                c.failures.total().to_string(),
                c.failures.unbounded.to_string(),
                c.flagged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Text table: one row per method, one column per alternative, rates
    /// in percent with the MC standard error.
    pub fn pretty(&self) -> String {
        let mut out = format!(
            "{} (n = {}, {} replications, level {})\n",
            self.spec.name, self.spec.n, self.spec.replications, self.spec.level
        );
        out.push_str(&format!("{:<8}", "method"));
        for a in &self.spec.alternatives {
            let head = if *a == 0.0 { "θ0".to_string() } else { format!("θ0+{a}/√n") };
            out.push_str(&format!("{head:>18}"));
        }
        out.push_str(&format!("{:>10}\n", "failures"));
        for m in &self.spec.methods {
            out.push_str(&format!("{:<8}", m.name()));
            let mut failures = 0;
            for a in &self.spec.alternatives {
                let c = self.cell(*m, *a).unwrap();
                failures = c.failures.total();
                let mark = if c.flagged { "!" } else { " " };
                out.push_str(&format!("{:>11.1} ±{:>4.1}{mark}", 100.0 * c.rate, 100.0 * c.se));
            }
            out.push_str(&format!("{failures:>10}\n"));
        }
        if let Some(d) = &self.diagnostics {
            out.push_str(&format!(
                "blocks: mean visits {:.1}, mean complete blocks {:.1} (min {}, max {}), mean δ {:.3e}, clamped {}\n",
                d.mean_visits, d.mean_blocks, d.min_blocks, d.max_blocks, d.mean_delta, d.clamped
            ));
        }
        out
    }
}

/// Tallies acceptance of every method at every alternative.
pub fn summarize(spec: &ExperimentSpec, reps: &[Replication], runtime_secs: f64) -> McReport {
    let crit = chi2_quantile(spec.level, 1);
    let thetas = spec.thetas();
    let mut cells = Vec::new();
    for (mi, method) in spec.methods.iter().enumerate() {
        for (ai, alt) in spec.alternatives.iter().enumerate() {
            let mut failures = FailureCounts::default();
            let (mut accepted, mut successes) = (0, 0);
            for r in reps {
                match &r.outcomes[mi] {
                    Outcome::Statistics(s) => {
                        successes += 1;
                        if s[ai].is_infinite() {
                            failures.unbounded += 1;
                        } else if s[ai] <= crit {
                            accepted += 1;
                        }
                    }
                    Outcome::Failed(FailureKind::NoRegeneration) => failures.no_regeneration += 1,
                    Outcome::Failed(FailureKind::NotEnoughBlocks) => failures.not_enough_blocks += 1,
                    Outcome::Failed(FailureKind::NotConverged) => failures.not_converged += 1,
                    Outcome::Failed(FailureKind::Other) => failures.other += 1,
                }
            }
            let rate = if successes > 0 { accepted as f64 / successes as f64 } else { f64::NAN };
            let se = if successes > 0 { (rate * (1.0 - rate) / successes as f64).sqrt() } else { f64::NAN };
            cells.push(Cell {
                method: *method,
                n: spec.n,
                alternative: *alt,
                theta: thetas[ai],
                accepted,
                successes,
                rate,
                se,
                failures,
                flagged: failures.total() as f64 > 0.05 * reps.len() as f64,
            });
        }
    }
    let diag: Vec<BlockDiagnostics> = reps.iter().filter_map(|r| r.blocks).collect();
    let diagnostics = (!diag.is_empty()).then(|| {
        let k = diag.len() as f64;
        DiagnosticSummary {
            replications: diag.len(),
            mean_visits: diag.iter().map(|d| d.visits as f64).sum::<f64>() / k,
            mean_blocks: diag.iter().map(|d| d.blocks as f64).sum::<f64>() / k,
            min_blocks: diag.iter().map(|d| d.blocks).min().unwrap(),
            max_blocks: diag.iter().map(|d| d.blocks).max().unwrap(),
            mean_delta: diag.iter().map(|d| d.delta).sum::<f64>() / k,
            clamped: diag.iter().map(|d| d.clamped).sum(),
        }
    });
    McReport { spec: spec.clone(), cells, diagnostics, runtime_secs }
}

pub fn run_coverage(spec: &ExperimentSpec) -> Result<McReport> {
    let start = Instant::now();
    let reps = run_replications(spec)?;
    Ok(summarize(spec, &reps, start.elapsed().as_secs_f64()))
}

/// Quantile markers compared on QQ plots: the 50%, 90% and 95% points.
pub const QQ_MARKERS: [f64; 3] = [0.5, 0.9, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqMarker {
    pub prob: f64,
    pub empirical: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqReport {
    /// Sorted ReBEL statistics `2 r_n(θ_0)` (may end with `+∞`).
    pub statistics: Vec<f64>,
    /// `(empirical quantile, χ²_1 quantile)` at plotting positions `(i - 0.5) / m`.
    pub pairs: Vec<(f64, f64)>,
    pub markers: Vec<QqMarker>,
    pub ks_distance: f64,
    pub failures: FailureCounts,
    pub runtime_secs: f64,
}

impl QqReport {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["empirical", "chi2"])?;
        for (e, r) in &self.pairs {
            w.write_record([fmt_inf(*e), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a float for CSV output, writing `inf` for infinities.
pub fn fmt_inf(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

/// Sorted sample of `2 r_n(θ_0)` with χ²_1 reference quantiles.
pub fn qq_from_statistics(mut statistics: Vec<f64>, failures: FailureCounts, runtime_secs: f64) -> QqReport {
    statistics.sort_by(|a, b| a.total_cmp(b));
    let m = statistics.len();
    let pairs = statistics
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, chi2_quantile((i as f64 + 0.5) / m as f64, 1)))
        .collect();
    let markers = QQ_MARKERS
        .iter()
        .map(|&p| QqMarker {
            prob: p,
            empirical: if m > 0 { empirical_quantile(&statistics, p) } else { f64::NAN },
            reference: chi2_quantile(p, 1),
        })
        .collect();
    let ks = ks_distance(&statistics, |x| if x.is_infinite() { 1.0 } else { chi2_cdf(x, 1) });
    QqReport { statistics, pairs, markers, ks_distance: ks, failures, runtime_secs }
}

pub fn run_qq(spec: &ExperimentSpec) -> Result<QqReport> {
    let spec = ExperimentSpec { methods: vec![Method::ReBel], alternatives: vec![0.0], ..spec.clone() };
    let start = Instant::now();
    let reps = run_replications(&spec)?;
    let mut failures = FailureCounts::default();
    let mut stats = Vec::with_capacity(reps.len());
    for r in &reps {
        match &r.outcomes[0] {
            Outcome::Statistics(s) => {
                if s[0].is_infinite() {
                    failures.unbounded += 1;
                }
                stats.push(s[0]);
            }
            Outcome::Failed(FailureKind::NoRegeneration) => failures.no_regeneration += 1,
            Outcome::Failed(FailureKind::NotEnoughBlocks) => failures.not_enough_blocks += 1,
            Outcome::Failed(FailureKind::NotConverged) => failures.not_converged += 1,
            Outcome::Failed(FailureKind::Other) => failures.other += 1,
        }
    }
    Ok(qq_from_statistics(stats, failures, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub alternative: f64,
    pub empirical_acceptance: f64,
    pub se: f64,
    /// `1 - predicted_power(a, Σ, level)`.
    pub predicted_acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerComparison {
    /// `Σ` used for the prediction.
    pub sigma: f64,
    /// True when `Σ` was estimated (mean of the per-replication `Σ̂`).
    pub sigma_estimated: bool,
    pub rows: Vec<PowerRow>,
    pub report: McReport,
}

/// Empirical ReBEL acceptance at each offset beside the noncentral-χ²
/// prediction. `sigma` defaults to the average `Σ̂` over replications.
pub fn run_power_comparison(spec: &ExperimentSpec, sigma: Option<f64>) -> Result<PowerComparison> {
    let spec = ExperimentSpec { methods: vec![Method::ReBel], ..spec.clone() };
    let start = Instant::now();
    let reps = run_replications(&spec)?;
    let report = summarize(&spec, &reps, start.elapsed().as_secs_f64());
    let (sigma, estimated) = match sigma {
        Some(s) => (s, false),
        None => {
            let s: Vec<f64> = reps.iter().filter_map(|r| r.sigma).collect();
            if s.is_empty() {
                return Err(Error::NotEnoughBlocks { blocks: 0, needed: 2 });
            }
            (s.iter().sum::<f64>() / s.len() as f64, true)
        }
    };
    let sig = DMatrix::from_element(1, 1, sigma);
    let rows = spec
        .alternatives
        .iter()
        .map(|&a| {
            let c = report.cell(Method::ReBel, a).unwrap();
            Ok(PowerRow {
                alternative: a,
                empirical_acceptance: c.rate,
                se: c.se,
                predicted_acceptance: 1.0 - predicted_power(&[a], &sig, spec.level)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerComparison { sigma, sigma_estimated: estimated, rows, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for s in [table1(250, 10, 1), table2(1000, 10, 1), qqplot(1000, 10, 1), two_state(500, 10, 1)] {
            s.validate().unwrap();
        }
        let mut bad = two_state(500, 0, 1);
        assert!(bad.validate().is_err());
        bad.replications = 1;
        bad.alternatives = vec![f64::NAN];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_replication_rate_is_zero_or_one() {
        let r = run_coverage(&two_state(400, 1, 3)).unwrap();
        let c = &r.cells[0];
        assert!(c.rate == 0.0 || c.rate == 1.0);
        assert_eq!(c.successes, 1);
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let mut spec = table2(600, 6, 11);
        spec.n_boot = 100;
        spec.workers = Some(1);
        let a = run_replications(&spec).unwrap();
        spec.workers = Some(3);
        let b = run_replications(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn harness_self_consistency_on_exact_chi2_draws() {
        use crate::rng::stream_rng;
        use rand_distr::{ChiSquared, Distribution};
        let mut rng = stream_rng(7, 0);
        let m = 4000;
        let draws: Vec<f64> = (0..m).map(|_| ChiSquared::new(1.0).unwrap().sample(&mut rng)).collect();
        let q = qq_from_statistics(draws, FailureCounts::default(), 0.0);
        // 1.36 / sqrt(m) is the 95% Kolmogorov bound
        assert!(q.ks_distance < 1.36 / (m as f64).sqrt());
        assert!((q.markers[0].empirical - 0.455).abs() < 0.05);
    }

    #[test]
    fn infinite_statistics_print_as_inf() {
        assert_eq!(fmt_inf(f64::INFINITY), "inf");
        let q = qq_from_statistics(vec![0.1, f64::INFINITY], FailureCounts::default(), 0.0);
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("inf,"));
    }

    #[test]
    fn failures_are_counted_not_dropped() {
        // too short for any regeneration: every replication fails
        let spec = two_state(2, 5, 1);
        let r = run_coverage(&spec).unwrap();
        let c = &r.cells[0];
        assert_eq!(c.successes + c.failures.total(), 5);
        assert!(c.flagged);
    }
}

//! Command-line front end: `simulate`, `split`, `el-ci`, `mc` and `qq`.
//!
//! Every command accepts `--config FILE` (a JSON object keyed by the long
//! flag names in snake case, or a `manifest.json` from an earlier run);
//! flags given on the command line override the file. Each run writes
//! `manifest.json` with the fully resolved configuration into the output
//! directory, so `rebel <cmd> --config out/manifest.json` repeats it.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::baselines::{bel_interval, mean_interval, trunc_interval, BaselineResult, BlockLength, Method};
use crate::chain_models::{simulate, stack, ChainPath, ModelKind, ModelSpec};
use crate::el_core::{IndicatorGe, MeanModel, MomentModel, PolynomialMoments};
use crate::error::{Error, Result};
use crate::inference::{
    asymptotic_estimates, confidence_interval, likelihood_curve, mele, overid_test, subvector_interval, CiOptions,
    ConfidenceInterval, SearchBounds, StatisticKind,
};
use crate::mc::{self, ExperimentSpec, MomentPreset};
use crate::regeneration::{
    atomic_blocks, default_candidates, estimate_order, estimate_transition_density, evaluate_small_set,
    select_small_set_with, split_with, Bandwidth, BlockPartition, OrderContext, PairDensities, SelectionOptions,
    SmallSetBox, SmallSetSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_REGENERATION: i32 = 3;
pub const EXIT_EMPTY_REGION: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "rebel", version, about = "Regenerative block empirical likelihood for Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a chain and write path.csv.
    Simulate(SimulateArgs),
    /// Cut a path into regeneration blocks (exact atom or Nummelin splitting).
    Split(SplitArgs),
    /// Point estimate and confidence interval per method.
    #[command(name = "el-ci")]
    ElCi(ElCiArgs),
    /// Monte Carlo coverage / type-II table.
    Mc(McArgs),
    /// Replications of 2 r_n(θ_0) against the χ²₁ law.
    Qq(QqArgs),
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoRegeneration { .. }
        | Error::NoViableSmallSet { .. }
        | Error::NotEnoughBlocks { .. }
        | Error::OrderTestInconclusive { .. } => EXIT_NO_REGENERATION,
        Error::EmptyRegion => EXIT_EMPTY_REGION,
        Error::Numerical(_)
        | Error::SingularVariance
        | Error::EstimateNotConverged { .. }
        | Error::DegenerateDensity { .. } => EXIT_NUMERICAL,
        Error::Validation(_) | Error::DegreesOfFreedomZero | Error::Io(_) | Error::Csv(_) | Error::Json(_) => {
            EXIT_USAGE
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(resolve(&a, a.config.as_deref(), "simulate")?),
        Command::Split(a) => cmd_split(resolve(&a, a.config.as_deref(), "split")?),
        Command::ElCi(a) => cmd_el_ci(resolve(&a, a.config.as_deref(), "el-ci")?),
        Command::Mc(a) => cmd_mc(resolve(&a, a.config.as_deref(), "mc")?),
        Command::Qq(a) => cmd_qq(resolve(&a, a.config.as_deref(), "qq")?),
    }
}

/// Overlays the flags that were given onto the config file.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>, command: &str) -> Result<T> {
    let mut base = match config {
        Some(p) => {
            let v: Value = serde_json::from_reader(BufReader::new(File::open(p)?))?;
            let v = match v {
                Value::Object(mut m) if m.contains_key("config") && m.contains_key("command") => {
                    if m["command"] != command {
                        return Err(Error::Validation(format!(
                            "manifest {} is for command {}, not {command}",
                            p.display(),
                            m["command"]
                        )));
                    }
                    m.remove("config").unwrap()
                }
                v => v,
            };
            match v {
                Value::Object(m) => m,
                _ => return Err(Error::Validation(format!("config {} is not a JSON object", p.display()))),
            }
        }
        None => Map::new(),
    };
    base.remove("config");
    if let Value::Object(m) = serde_json::to_value(flags)? {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| Error::Validation(format!("bad configuration: {e}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad number {t:?} in {s:?}"))))
        .collect()
}

fn parse_interval(s: &str) -> Result<(f64, f64)> {
    match parse_list(s)?.as_slice() {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(Error::Validation(format!("expected LO,HI with LO < HI, got {s:?}"))),
    }
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(parse_list).collect()
}

fn output_dir(out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, config: &impl Serialize, outputs: &[&str]) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "outputs": outputs,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

fn read_path(input: &Option<PathBuf>) -> Result<ChainPath> {
    let p = input.as_ref().ok_or_else(|| Error::Validation("--input is required".into()))?;
    ChainPath::read_csv(BufReader::new(File::open(p)?))
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// JSON config file or manifest.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// ar1 | tgarch | finite
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// AR coefficient (ar1: default 0.9, tgarch: default 0.97).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Row-stochastic matrix for `finite`, rows separated by `;`.
    #[arg(long)]
    pub transition: Option<String>,
    #[arg(long)]
    pub initial_state: Option<usize>,
    #[arg(long)]
    pub vol_intercept: Option<f64>,
    #[arg(long)]
    pub vol_abs: Option<f64>,
    #[arg(long)]
    pub vol_pos: Option<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn model_kind(a: &SimulateArgs) -> Result<ModelKind> {
    let kind = match a.model.as_deref().unwrap_or("ar1") {
        "ar1" => ModelKind::AR1Uniform { rho: a.rho.unwrap_or(0.9) },
        "tgarch" => {
            let ModelKind::TGarchAR { ar, vol_intercept, vol_abs, vol_pos } = ModelKind::tgarch_reference() else {
                unreachable!()
            };
            ModelKind::TGarchAR {
                ar: a.rho.unwrap_or(ar),
                vol_intercept: a.vol_intercept.unwrap_or(vol_intercept),
                vol_abs: a.vol_abs.unwrap_or(vol_abs),
                vol_pos: a.vol_pos.unwrap_or(vol_pos),
            }
        }
        "finite" => ModelKind::FiniteMarkov {
            transition: parse_matrix(a.transition.as_deref().unwrap_or("0.7,0.3;0.2,0.8"))?,
            initial_state: a.initial_state.unwrap_or(0),
        },
        other => return Err(Error::Validation(format!("unknown model {other:?} (ar1, tgarch, finite)"))),
    };
    kind.validate()?;
    Ok(kind)
}

fn cmd_simulate(mut a: SimulateArgs) -> Result<()> {
    let n = a.n.ok_or_else(|| Error::Validation("--n is required".into()))?;
    let kind = model_kind(&a)?;
    a.model.get_or_insert_with(|| "ar1".into());
    a.seed.get_or_insert(0);
    match &kind {
        ModelKind::AR1Uniform { rho } => a.rho = Some(*rho),
        ModelKind::TGarchAR { ar, vol_intercept, vol_abs, vol_pos } => {
            a.rho = Some(*ar);
            a.vol_intercept = Some(*vol_intercept);
            a.vol_abs = Some(*vol_abs);
            a.vol_pos = Some(*vol_pos);
        }
        ModelKind::FiniteMarkov { transition, initial_state } => {
            let rows: Vec<String> =
                transition.iter().map(|r| r.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")).collect();
            a.transition = Some(rows.join(";"));
            a.initial_state = Some(*initial_state);
        }
    }
    let dir = output_dir(&a.out)?;
    let path = simulate(&ModelSpec::new(kind, a.seed.unwrap()), n)?;
    path.write_csv(BufWriter::new(File::create(dir.join("path.csv"))?))?;
    a.out = Some(dir.clone());
    write_manifest(&dir, "simulate", &a, &["path.csv"])?;
    eprintln!("wrote {} observations to {}", path.len(), dir.join("path.csv").display());
    Ok(())
}

// ------------------------------------------------------------------- split

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Path CSV written by `simulate` (or any one-column-per-coordinate CSV).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Exact blocks at the visits of this state (scalar paths).
    #[arg(long, allow_hyphen_values = true)]
    pub atom_value: Option<f64>,
    /// Small set `[LO, HI]^{k d}` as `LO,HI`; without it the candidate with
    /// the most expected regenerations among central quantile boxes is used.
    #[arg(long, allow_hyphen_values = true)]
    pub small_set: Option<String>,
    /// Candidate intervals `LO,HI;LO,HI;...` for the small-set search.
    #[arg(long, allow_hyphen_values = true)]
    pub candidates: Option<String>,
    /// Stacking order `k` as a number, or `auto` for the lag-correlation test.
    #[arg(long)]
    pub order: Option<String>,
    /// Largest order tried by `--order auto`.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Moment used by the order test: block means, or indicator of `X >= T`.
    #[arg(long, allow_hyphen_values = true)]
    pub indicator_ge: Option<f64>,
    /// Kernel bandwidth; Silverman's rule when absent.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Grid points per axis for `δ`.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Summary written next to the blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSummary {
    pub order: usize,
    pub order_test: Option<crate::regeneration::OrderEstimate>,
    pub path_len: usize,
    pub stacked_len: usize,
    pub visits: usize,
    pub regenerations: usize,
    pub complete_blocks: usize,
    pub clamped: usize,
    pub small_set: Option<SmallSetSpec>,
}

fn split_candidates(a: &SplitArgs, path: &ChainPath) -> Result<Vec<(f64, f64)>> {
    if let Some(s) = &a.small_set {
        return Ok(vec![parse_interval(s)?]);
    }
    if let Some(c) = &a.candidates {
        return c.split(';').map(parse_interval).collect();
    }
    let scalar = ChainPath::scalar(&path.coordinate(0))?;
    Ok(default_candidates(&scalar).iter().map(|b| (b.lo[0], b.hi[0])).collect())
}

fn cmd_split(mut a: SplitArgs) -> Result<()> {
    let path = read_path(&a.input)?;
    let seed = *a.seed.get_or_insert(0);
    let dir = output_dir(&a.out)?;
    a.out = Some(dir.clone());
    let bandwidth = a.bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed);

    if let Some(v) = a.atom_value {
        if path.dim() != 1 {
            return Err(Error::Validation("--atom-value needs a scalar path".into()));
        }
        let partition = atomic_blocks(&path, |s| s[0] == v)?;
        let lo = vec![v];
        let spec = SmallSetSpec::atom(SmallSetBox::new(lo.clone(), lo)?);
        let visits = path.states().filter(|s| s[0] == v).count();
        let summary = SplitSummary {
            order: 1,
            order_test: None,
            path_len: path.len(),
            stacked_len: path.len(),
            visits,
            regenerations: partition.regeneration_times().len(),
            complete_blocks: partition.complete_count(),
            clamped: 0,
            small_set: Some(spec.clone()),
        };
        a.order = Some("1".into());
        return finish_split(&dir, &a, &partition, &spec, &summary);
    }

    let intervals = split_candidates(&a, &path)?;
    let mut order_test = None;
    let order = match a.order.as_deref().unwrap_or("1") {
        "auto" => {
            let model: Box<dyn MomentModel> = match a.indicator_ge {
                Some(t) => Box::new(IndicatorGe::new(t)),
                None => Box::new(MeanModel::scalar()),
            };
            let mut ctx = OrderContext::new(model.as_ref(), intervals.clone(), seed);
            ctx.bandwidth = bandwidth.clone();
            ctx.grid = a.grid;
            let est = estimate_order(&path, *a.max_order.get_or_insert(3), &ctx)?;
            let k = est.order;
            order_test = Some(est);
            k
        }
        k => k.parse::<usize>().map_err(|_| Error::Validation(format!("--order must be a number or auto, got {k:?}")))?,
    };
    a.order = Some(order.to_string());
    let stacked = stack(&path, order)?;
    let density = estimate_transition_density(&stacked, &bandwidth)?;
    let mut pairs = PairDensities::new(stacked.len());
    let dim = stacked.dim();
    let spec = if a.small_set.is_some() {
        let (lo, hi) = intervals[0];
        evaluate_small_set(&stacked, &density, &SmallSetBox::cube(lo, hi, dim)?, a.grid, &mut pairs)?
    } else {
        let boxes: Vec<SmallSetBox> = intervals.iter().filter_map(|&(lo, hi)| SmallSetBox::cube(lo, hi, dim).ok()).collect();
        let options = SelectionOptions { grid: a.grid, ..Default::default() };
        select_small_set_with(&stacked, &density, &boxes, &options, &mut pairs)?
    };
    let outcome = split_with(&stacked, &spec, Some(&density), seed, &mut pairs)?;
    let summary = SplitSummary {
        order,
        order_test,
        path_len: path.len(),
        stacked_len: stacked.len(),
        visits: outcome.visits,
        regenerations: outcome.partition.regeneration_times().len(),
        complete_blocks: outcome.partition.complete_count(),
        clamped: outcome.clamped,
        small_set: Some(spec.clone()),
    };
    finish_split(&dir, &a, &outcome.partition, &spec, &summary)
}

fn finish_split(dir: &Path, a: &SplitArgs, p: &BlockPartition, spec: &SmallSetSpec, s: &SplitSummary) -> Result<()> {
    p.write_csv(BufWriter::new(File::create(dir.join("blocks.csv"))?))?;
    write_json(&dir.join("smallset.json"), spec)?;
    write_json(&dir.join("split.json"), s)?;
    write_manifest(dir, "split", a, &["blocks.csv", "smallset.json", "split.json"])?;
    eprintln!(
        "order {}: {} visits, {} regenerations, {} complete blocks, delta {:.4e}",
        s.order, s.visits, s.regenerations, s.complete_blocks, spec.delta
    );
    Ok(())
}

// ------------------------------------------------------------------- el-ci

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct ElCiArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// blocks.csv from `split`; needed by rebel and trunc.
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Stacking order the blocks were built at.
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated subset of rebel, bel, mean, trunc.
    #[arg(long)]
    pub methods: Option<String>,
    /// Threshold moment `1{X >= T} - θ` instead of the mean.
    #[arg(long, allow_hyphen_values = true)]
    pub indicator_ge: Option<f64>,
    /// JSON file with a polynomial moment model (rebel only).
    #[arg(long)]
    pub moments: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    /// Invert `2 r(θ) - 2 r(θ̂)` instead of `2 r(θ)`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub corrected: Option<bool>,
    /// Also write curve.csv with `(θ, 2 r_n(θ))`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub curve: Option<bool>,
    #[arg(long)]
    pub curve_points: Option<usize>,
    /// BEL / bootstrap block length; `⌊n^{1/3}⌋` when absent.
    #[arg(long)]
    pub block_length: Option<usize>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RebelResult {
    pub estimate: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub complete_blocks: usize,
    pub ci: ConfidenceInterval,
    pub overid: Option<crate::inference::OverIdTest>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CiReport {
    pub rebel: Option<RebelResult>,
    pub bel: Option<BaselineResult>,
    pub mean: Option<BaselineResult>,
    pub trunc: Option<BaselineResult>,
}

fn cmd_el_ci(mut a: ElCiArgs) -> Result<()> {
    let path = read_path(&a.input)?;
    let methods: Vec<Method> = a
        .methods
        .get_or_insert_with(|| "rebel".into())
        .split(',')
        .map(|m| m.trim().parse())
        .collect::<Result<_>>()?;
    let level = *a.level.get_or_insert(0.95);
    let order = *a.order.get_or_insert(1);
    let n_boot = *a.n_boot.get_or_insert(500);
    let seed = *a.seed.get_or_insert(0);
    let corrected = *a.corrected.get_or_insert(false);
    let want_curve = *a.curve.get_or_insert(false);
    let curve_points = *a.curve_points.get_or_insert(201);
    let block_length = a.block_length.map_or(BlockLength::Auto, BlockLength::Fixed);
    let dir = output_dir(&a.out)?;
    a.out = Some(dir.clone());

    let preset = match a.indicator_ge {
        Some(t) => MomentPreset::IndicatorGe { threshold: t },
        None => MomentPreset::Mean,
    };
    let poly: Option<PolynomialMoments> = match &a.moments {
        Some(p) => {
            let m: PolynomialMoments = serde_json::from_reader(BufReader::new(File::open(p)?))?;
            Some(PolynomialMoments::new(m.params, m.terms)?)
        }
        None => None,
    };
    let model: Box<dyn MomentModel> = match &poly {
        Some(m) => Box::new(m.clone()),
        None => preset.model(),
    };
    if poly.is_some() && methods.iter().any(|m| *m != Method::ReBel) {
        return Err(Error::Validation("--moments is only supported with --methods rebel".into()));
    }

    let needs_blocks = methods.iter().any(|m| matches!(m, Method::ReBel | Method::Trunc));
    let blocked = if needs_blocks {
        let p = a.blocks.as_ref().ok_or_else(|| Error::Validation("--blocks is required by rebel and trunc".into()))?;
        let stacked = stack(&path, order)?;
        let partition = BlockPartition::read_csv(BufReader::new(File::open(p)?))?;
        if partition.path_len() != stacked.len() {
            return Err(Error::Validation(format!(
                "blocks cover {} states but the path stacked to order {order} has {}",
                partition.path_len(),
                stacked.len()
            )));
        }
        Some((stacked, partition))
    } else {
        None
    };

    let mut report = CiReport::default();
    let mut curve: Option<Vec<(f64, f64)>> = None;
    for method in &methods {
        match method {
            Method::ReBel => {
                let (stacked, partition) = blocked.as_ref().unwrap();
                let p = model.param_dim();
                let init = match &poly {
                    Some(m) => m.plug_in(partition.complete_blocks().flat_map(|b| b.positions()).map(|i| stacked.state(i))),
                    None => vec![0.0; p],
                };
                let est = mele(stacked, partition, model.as_ref(), &init, 4000)?;
                let ses = asymptotic_estimates(stacked, partition, model.as_ref(), &est.theta)
                    .map(|e| e.standard_errors())
                    .unwrap_or_else(|_| vec![f64::NAN; p]);
                let ci = if p == 1 {
                    let mut opts = CiOptions::new(level);
                    if corrected {
                        opts.kind = StatisticKind::Corrected;
                    }
                    opts.theta_init = Some(est.theta.clone());
                    confidence_interval(stacked, partition, model.as_ref(), &opts)?
                } else {
                    subvector_interval(stacked, partition, model.as_ref(), level, &est.theta, SearchBounds::default())?
                };
                if ci.empty {
                    return Err(Error::EmptyRegion);
                }
                let overid = if model.moment_dim() > p {
                    Some(overid_test(stacked, partition, model.as_ref(), &est.theta)?)
                } else {
                    None
                };
                if want_curve && p == 1 {
                    curve = Some(likelihood_curve(stacked, partition, model.as_ref(), &curve_grid(&ci, curve_points)));
                }
                report.rebel = Some(RebelResult {
                    estimate: est.theta,
                    standard_errors: ses,
                    complete_blocks: partition.complete_count(),
                    ci,
                    overid,
                });
            }
            Method::Bel => report.bel = Some(bel_interval(&path, |s| preset.g(s), block_length, level)?),
            Method::Mean => report.mean = Some(mean_interval(&path, |s| preset.g(s), block_length, n_boot, level, seed)?),
            Method::Trunc => {
                let (stacked, partition) = blocked.as_ref().unwrap();
                report.trunc = Some(trunc_interval(stacked, partition, |s| preset.g(s), block_length, n_boot, level, seed)?);
            }
        }
    }
    write_json(&dir.join("ci.json"), &report)?;
    let mut outputs = vec!["ci.json"];
    if let Some(c) = curve {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("curve.csv"))?));
        w.write_record(["theta", "stat"])?;
        for (t, s) in c {
            w.write_record([t.to_string(), mc::fmt_inf(s)])?;
        }
        w.flush()?;
        outputs.push("curve.csv");
    }
    write_manifest(&dir, "el-ci", &a, &outputs)?;
    for (name, ci) in [
        ("rebel", report.rebel.as_ref().map(|r| &r.ci)),
        ("bel", report.bel.as_ref().map(|r| &r.ci)),
        ("mean", report.mean.as_ref().map(|r| &r.ci)),
        ("trunc", report.trunc.as_ref().map(|r| &r.ci)),
    ] {
        if let Some(ci) = ci {
            eprintln!("{name:>6}: {:.6} [{:.6}, {:.6}]", ci.estimate, ci.lower, ci.upper);
        }
    }
    Ok(())
}

/// Grid spanning twice the interval around the estimate.
fn curve_grid(ci: &ConfidenceInterval, points: usize) -> Vec<f64> {
    let left = if ci.lower.is_finite() { ci.estimate - ci.lower } else { 1.0 };
    let right = if ci.upper.is_finite() { ci.upper - ci.estimate } else { 1.0 };
    let (lo, hi) = (ci.estimate - 2.0 * left.max(1e-8), ci.estimate + 2.0 * right.max(1e-8));
    let m = points.max(2);
    (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
}

// ---------------------------------------------------------------------- mc

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct McArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// table1 | table2 | two-state
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample sizes; repeat the flag or separate by commas.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

pub fn preset_spec(name: &str, n: usize, reps: usize, seed: u64) -> Result<ExperimentSpec> {
    Ok(match name {
        "table1" => mc::table1(n, reps, seed),
        "table2" => mc::table2(n, reps, seed),
        "two-state" | "two_state" => mc::two_state(n, reps, seed),
        "qqplot" | "tgarch" => mc::qqplot(n, reps, seed),
        other => return Err(Error::Validation(format!("unknown preset {other:?}"))),
    })
}

fn default_sizes(preset: &str) -> Vec<usize> {
    match preset {
        "table1" => vec![250, 500, 1000],
        "table2" => vec![1000, 5000, 10000],
        "qqplot" | "tgarch" => vec![10000],
        _ => vec![2000],
    }
}

fn cmd_mc(mut a: McArgs) -> Result<()> {
    let preset = a.preset.get_or_insert_with(|| "table1".into()).clone();
    let sizes = a.n.get_or_insert_with(|| default_sizes(&preset)).clone();
    let reps = *a.reps.get_or_insert(1000);
    let seed = *a.seed.get_or_insert(0);
    let dir = output_dir(&a.out)?;
    a.out = Some(dir.clone());
    let mut reports = Vec::new();
    let mut text = String::new();
    let mut csv_out = csv::Writer::from_writer(Vec::new());
    for (k, &n) in sizes.iter().enumerate() {
        let mut spec = preset_spec(&preset, n, reps, seed)?;
        spec.workers = a.workers;
        if let Some(b) = a.n_boot {
            spec.n_boot = b;
        }
        if let Some(l) = a.level {
            spec.level = l;
        }
        let report = mc::run_coverage(&spec)?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        let body = String::from_utf8_lossy(&buf).into_owned();
        let skip = if k == 0 { 0 } else { 1 };
        for line in body.lines().skip(skip) {
            csv_out.write_record(line.split(','))?;
        }
        text.push_str(&report.pretty());
        text.push('\n');
        eprint!("{}", report.pretty());
        reports.push(report);
    }
    fs::write(dir.join("report.csv"), csv_out.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    fs::write(dir.join("report.txt"), text)?;
    write_json(&dir.join("report.json"), &reports)?;
    write_manifest(&dir, "mc", &a, &["report.csv", "report.txt", "report.json"])
}

// ---------------------------------------------------------------------- qq

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct QqArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// tgarch (the TGARCH threshold setting at θ_0)
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn cmd_qq(mut a: QqArgs) -> Result<()> {
    let preset = a.preset.get_or_insert_with(|| "tgarch".into()).clone();
    let n = *a.n.get_or_insert(10_000);
    let reps = *a.reps.get_or_insert(1000);
    let seed = *a.seed.get_or_insert(0);
    let dir = output_dir(&a.out)?;
    a.out = Some(dir.clone());
    let mut spec = preset_spec(&preset, n, reps, seed)?;
    spec.methods = vec![Method::ReBel];
    spec.alternatives = vec![0.0];
    spec.workers = a.workers;
    let report = mc::run_qq(&spec)?;
    report.write_csv(BufWriter::new(File::create(dir.join("qq.csv"))?))?;
    write_json(&dir.join("qq.json"), &report)?;
    write_manifest(&dir, "qq", &a, &["qq.csv", "qq.json"])?;
    eprintln!("KS distance {:.4}", report.ks_distance);
    for m in &report.markers {
        eprintln!("q{:.2}: empirical {:.4}  reference {:.4}", m.prob, m.empirical, m.reference);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(exit_code(&Error::NoRegeneration { visits: 0, regenerations: 0 }), EXIT_NO_REGENERATION);
        assert_eq!(exit_code(&Error::NoViableSmallSet { candidates: 3 }), EXIT_NO_REGENERATION);
        assert_eq!(exit_code(&Error::EmptyRegion), EXIT_EMPTY_REGION);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::SingularVariance), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Validation("x".into())), EXIT_USAGE);
    }

    #[test]
    fn resolve_overlays_flags_on_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"command": "qq", "config": {"n": 500, "reps": 7, "preset": "tgarch"}}"#).unwrap();
        let flags = QqArgs { reps: Some(9), ..Default::default() };
        let r = resolve(&flags, Some(&cfg), "qq").unwrap();
        assert_eq!(r.n, Some(500));
        assert_eq!(r.reps, Some(9));
        assert!(resolve(&flags, Some(&cfg), "mc").is_err());
    }

    #[test]
    fn parses_lists() {
        assert_eq!(parse_interval("-1.3,4.7").unwrap(), (-1.3, 4.7));
        assert!(parse_interval("2,1").is_err());
        assert_eq!(parse_matrix("0.5,0.5;1,0").unwrap(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

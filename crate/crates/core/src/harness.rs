//! Seeded Monte Carlo experiments over a list of graph sizes.
//!
//! A run writes three files: the per-trial CSV at `output`, a long-format summary
//! next to it (`<stem>.summary.csv`) and wall-clock timings (`<stem>.timing.csv`).
//! Timings live in their own file so the first two are byte-identical across
//! repeated runs with the same master seed.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SeriationError};
use crate::graph::{sample_graph, SampledGraph};
use crate::graphon::{key_line, toml_error, Graphon, GraphonSpec};
use crate::order::{kendall_tau, l1_distance, linf_distance, Ordering};
use crate::postproc::{default_alpha_beta_grid, full_postprocess, learn_alpha_beta, SplitConfig};
use crate::rng::{derive_seed, stream};
use crate::spectral::{spectral_seriation_detailed, DEFAULT_TOLERANCE};
use crate::validate::median;

/// Version of the per-trial and summary CSV layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Fresh graphs drawn for a trial whose sample is disconnected, before giving up.
pub const MAX_RESAMPLES: u32 = 20;

const TAG_PARTITION: u64 = 0x7061_7274;
const TAG_LEARN: u64 = 0x6c65_6172;
const TAG_LABELS: u64 = 0x6c61_6265;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Spectral,
    Postprocessed,
    Both,
}

impl Algorithm {
    fn runs(self) -> &'static [RunKind] {
        match self {
            Algorithm::Spectral => &[RunKind::Spectral],
            Algorithm::Postprocessed => &[RunKind::Postprocessed],
            Algorithm::Both => &[RunKind::Spectral, RunKind::Postprocessed],
        }
    }
}

impl FromStr for Algorithm {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Algorithm::Spectral),
            "postprocessed" => Ok(Algorithm::Postprocessed),
            "both" => Ok(Algorithm::Both),
            other => Err(SeriationError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// A single algorithm as it appears in result rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Spectral,
    Postprocessed,
}

impl RunKind {
    fn tag(self) -> u64 {
        match self {
            RunKind::Spectral => 1,
            RunKind::Postprocessed => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunKind::Spectral => "spectral",
            RunKind::Postprocessed => "postprocessed",
        }
    }
}

/// Fixed `(alpha, beta)` or `"learn"` to search the default grid on every graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamChoice {
    Fixed(SplitConfig),
    Learn(LearnTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnTag {
    Learn,
}

impl Default for ParamChoice {
    fn default() -> Self {
        ParamChoice::Fixed(SplitConfig::default())
    }
}

fn default_trials() -> usize {
    1
}

fn default_gamma() -> f64 {
    1.1
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_delta() -> f64 {
    0.01
}

fn default_true() -> bool {
    true
}

/// Experiment description, usually read from a TOML file.
///
/// ```toml
/// graphon = "affine-distance:a=0.8,b=1"
/// n_list = [200, 400, 800]
/// trials = 20
/// rho_exponent = 0.0
/// algorithm = "both"            # spectral | postprocessed | both
/// params = { alpha = 0.05, beta = 0.31 }   # or params = "learn"
/// gamma = 1.1
/// seed = 42
/// output = "results.csv"
/// threads = 4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Inline graphon spec, e.g. `rbf:s=0.3`.
    pub graphon: String,
    pub n_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub rho_exponent: f64,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub params: ParamChoice,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub seed: u64,
    pub output: PathBuf,
    /// Worker threads; `0` uses every available core.
    #[serde(default)]
    pub threads: usize,
    /// Use the deterministic graph with an edge wherever `P_ij >= 1/2`.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Margin for the parameter search when `params = "learn"`.
    #[serde(default = "default_delta")]
    pub learn_delta: f64,
    /// Hand the algorithms a randomly relabelled copy of each graph, so that
    /// tie-breaking by vertex label cannot reveal the latent order.
    #[serde(default = "default_true")]
    pub shuffle_labels: bool,
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(graphon: impl Into<String>, n_list: Vec<usize>, algorithm: Algorithm, seed: u64, output: PathBuf) -> Self {
        ExperimentConfig {
            graphon: graphon.into(),
            n_list,
            trials: default_trials(),
            rho_exponent: 0.0,
            algorithm,
            params: ParamChoice::default(),
            gamma: default_gamma(),
            seed,
            output,
            threads: 0,
            noiseless: false,
            tolerance: default_tolerance(),
            learn_delta: default_delta(),
            shuffle_labels: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        cfg.validate().map_err(|e| match e {
            SeriationError::Config(msg) => {
                let key = msg.split('`').nth(1).unwrap_or("");
                SeriationError::Parse { line: key_line(text, key), message: msg }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn graphon_spec(&self) -> Result<GraphonSpec> {
        self.graphon.parse().map_err(|e: SeriationError| SeriationError::Config(format!("`graphon`: {e}")))
    }

    /// Checks the invariants; messages name the offending key in backticks.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(SeriationError::Config(format!("`{key}` {msg}")));
        self.graphon_spec()?;
        if self.n_list.is_empty() {
            return bad("n_list", "must not be empty".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_list", "must be strictly increasing".into());
        }
        if self.n_list[0] < 2 {
            return bad("n_list", "entries must be at least 2".into());
        }
        if self.trials < 1 {
            return bad("trials", "must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.rho_exponent) {
            return bad("rho_exponent", format!("must lie in [0, 1), got {}", self.rho_exponent));
        }
        if !(self.gamma > 1.0) {
            return bad("gamma", format!("must exceed 1, got {}", self.gamma));
        }
        if self.algorithm != Algorithm::Spectral && self.rho_exponent != 0.0 {
            return bad("rho_exponent", "must be 0 when the post-processed algorithm runs".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance", "must be positive".into());
        }
        if !(self.learn_delta >= 0.0) {
            return bad("learn_delta", "must be nonnegative".into());
        }
        Ok(())
    }

    pub fn summary_path(&self) -> PathBuf {
        sibling(&self.output, "summary")
    }

    pub fn timing_path(&self) -> PathBuf {
        sibling(&self.output, "timing")
    }
}

fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.csv"))
}

/// One algorithm on one sampled graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema_version: u32,
    pub n: usize,
    pub trial: usize,
    /// Seed of the graph actually used (after any resampling).
    pub seed: u64,
    pub algorithm: RunKind,
    /// `ok`, or the error kind of a failed trial.
    pub status: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Symmetrised `‖σ - id‖₁`.
    pub l1_error: Option<f64>,
    /// Symmetrised `‖σ - id‖∞`.
    pub linf_error: Option<f64>,
    pub l1_normalized: Option<f64>,
    pub linf_normalized: Option<f64>,
    /// `linf_error / sqrt(n log^γ n)`.
    pub linf_scaled: Option<f64>,
    /// Discordant pairs of the raw output against the identity.
    pub kendall_tau_raw: Option<u64>,
    pub l1_raw: Option<f64>,
    pub linf_raw: Option<f64>,
    /// `D(σ) <= ‖σ - id‖₁ <= 2 D(σ)` on the raw output.
    pub sandwich_ok: Option<bool>,
    pub disconnected_resamples: u32,
    pub degenerate: bool,
}

impl TrialRecord {
    fn failed(n: usize, trial: usize, seed: u64, algorithm: RunKind, resamples: u32, err: &SeriationError) -> Self {
        TrialRecord {
            schema_version: SCHEMA_VERSION,
            n,
            trial,
            seed,
            algorithm,
            status: err.kind().to_string(),
            alpha: None,
            beta: None,
            l1_error: None,
            linf_error: None,
            l1_normalized: None,
            linf_normalized: None,
            linf_scaled: None,
            kendall_tau_raw: None,
            l1_raw: None,
            linf_raw: None,
            sandwich_ok: None,
            disconnected_resamples: resamples,
            degenerate: false,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Metrics of `sigma` against the identity.
fn score(sigma: &Ordering, n: usize) -> Result<(f64, f64, u64, f64, f64)> {
    let id = Ordering::identity(n);
    let l1 = l1_distance(sigma, &id, true)?;
    let linf = linf_distance(sigma, &id, true)?;
    let l1_raw = l1_distance(sigma, &id, false)?;
    let linf_raw = linf_distance(sigma, &id, false)?;
    Ok((l1, linf, kendall_tau(sigma), l1_raw, linf_raw))
}

fn record(
    n: usize,
    trial: usize,
    seed: u64,
    kind: RunKind,
    resamples: u32,
    gamma: f64,
    sigma: &Ordering,
    params: Option<SplitConfig>,
    degenerate: bool,
) -> Result<TrialRecord> {
    let (l1, linf, kt, l1_raw, linf_raw) = score(sigma, n)?;
    let nf = n as f64;
    Ok(TrialRecord {
        schema_version: SCHEMA_VERSION,
        n,
        trial,
        seed,
        algorithm: kind,
        status: "ok".into(),
        alpha: params.map(|p| p.alpha()),
        beta: params.map(|p| p.beta()),
        l1_error: Some(l1),
        linf_error: Some(linf),
        l1_normalized: Some(l1 / (nf * nf)),
        linf_normalized: Some(linf / nf),
        linf_scaled: Some(linf / (nf * nf.ln().powf(gamma)).sqrt()),
        kendall_tau_raw: Some(kt),
        l1_raw: Some(l1_raw),
        linf_raw: Some(linf_raw),
        sandwich_ok: Some(kt as f64 <= l1_raw && l1_raw <= 2.0 * kt as f64),
        disconnected_resamples: resamples,
        degenerate,
    })
}

/// Wall time of one record, written to the timing sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub n: usize,
    pub trial: usize,
    pub algorithm: RunKind,
    pub wall_seconds: f64,
}

/// Long-format summary row: `kind` is `median`, `slope` or `count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub kind: String,
    pub algorithm: RunKind,
    pub n: Option<usize>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutcome {
    /// Median of `metric` for one algorithm and size, if present in the summary.
    pub fn median(&self, algorithm: RunKind, n: usize, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.kind == "median" && r.algorithm == algorithm && r.n == Some(n) && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn slope(&self, algorithm: RunKind, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.kind == "slope" && r.algorithm == algorithm && r.metric == metric)
            .map(|r| r.value)
    }
}

/// Graph for trial `(n, trial)`, redrawn with a new seed while disconnected.
fn trial_graph(cfg: &ExperimentConfig, graphon: &Graphon, n: usize, trial: usize) -> Result<(SampledGraph, u64, u32)> {
    if cfg.noiseless {
        return Ok((SampledGraph::noiseless(graphon, n)?, 0, 0));
    }
    let rho = (n as f64).powf(-cfg.rho_exponent);
    for attempt in 0..=MAX_RESAMPLES {
        let seed = derive_seed(cfg.seed, &[n as u64, trial as u64, attempt as u64]);
        let g = sample_graph(graphon, n, rho, seed)?;
        if g.is_connected() {
            return Ok((g, seed, attempt));
        }
    }
    Err(SeriationError::Disconnected(format!(
        "{} consecutive samples at n = {n} were disconnected",
        MAX_RESAMPLES + 1
    )))
}

fn run_trial(cfg: &ExperimentConfig, graphon: &Graphon, n: usize, trial: usize) -> Vec<(TrialRecord, TimingRecord)> {
    let kinds = cfg.algorithm.runs();
    let (g, seed, resamples) = match trial_graph(cfg, graphon, n, trial) {
        Ok(x) => x,
        Err(e) => {
            return kinds
                .iter()
                .map(|&k| {
                    let t = TimingRecord { n, trial, algorithm: k, wall_seconds: 0.0 };
                    (TrialRecord::failed(n, trial, 0, k, MAX_RESAMPLES, &e), t)
                })
                .collect()
        }
    };
    let labels = cfg.shuffle_labels.then(|| {
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut stream(derive_seed(cfg.seed, &[n as u64, trial as u64, TAG_LABELS])));
        order
    });
    let g = match &labels {
        Some(order) => g.induced(order).expect("a permutation of the vertices"),
        None => g,
    };
    kinds
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let outcome = run_algorithm(cfg, &g, n, trial, kind)
                .and_then(|(sigma, params, degenerate)| match &labels {
                    Some(order) => Ok((sigma.relabel(order)?, params, degenerate)),
                    None => Ok((sigma, params, degenerate)),
                })
                .and_then(|(sigma, params, degenerate)| {
                    record(n, trial, seed, kind, resamples, cfg.gamma, &sigma, params, degenerate)
                })
                .unwrap_or_else(|e| {
                    log::warn!("trial n={n} #{trial} {} failed: {e}", kind.name());
                    TrialRecord::failed(n, trial, seed, kind, resamples, &e)
                });
            let timing = TimingRecord { n, trial, algorithm: kind, wall_seconds: start.elapsed().as_secs_f64() };
            (outcome, timing)
        })
        .collect()
}

fn run_algorithm(
    cfg: &ExperimentConfig,
    g: &SampledGraph,
    n: usize,
    trial: usize,
    kind: RunKind,
) -> Result<(Ordering, Option<SplitConfig>, bool)> {
    match kind {
        RunKind::Spectral => {
            let (sigma, res) = spectral_seriation_detailed(g, cfg.tolerance)?;
            Ok((sigma, None, res.degenerate))
        }
        RunKind::Postprocessed => {
            let params = match cfg.params {
                ParamChoice::Fixed(p) => p,
                ParamChoice::Learn(_) => {
                    let seed = derive_seed(cfg.seed, &[n as u64, trial as u64, TAG_LEARN]);
                    learn_alpha_beta(g, &default_alpha_beta_grid(), cfg.learn_delta, seed, cfg.tolerance)?
                        .ok_or_else(|| SeriationError::arg("no (alpha, beta) on the grid passed the test"))?
                }
            };
            let seed = derive_seed(cfg.seed, &[n as u64, trial as u64, TAG_PARTITION, kind.tag()]);
            Ok((full_postprocess(g, params, seed, cfg.tolerance)?, Some(params), false))
        }
    }
}

/// Runs every `(n, trial)` pair and writes the CSV, summary and timing files.
///
/// The output files are created before any sampling, so an unwritable path fails fast.
/// Individual trial failures are recorded in the `status` column.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let graphon = Graphon::from_spec(&cfg.graphon_spec()?)?;
    let main_file = File::create(&cfg.output)?;
    let summary_file = File::create(cfg.summary_path())?;
    let timing_file = File::create(cfg.timing_path())?;

    let jobs: Vec<(usize, usize)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| SeriationError::Config(format!("`threads`: {e}")))?;
    let results: Vec<Vec<(TrialRecord, TimingRecord)>> =
        pool.install(|| jobs.par_iter().map(|&(n, t)| run_trial(cfg, &graphon, n, t)).collect());
    let (records, timings): (Vec<TrialRecord>, Vec<TimingRecord>) = results.into_iter().flatten().unzip();

    let summary = summarize(cfg, &records)?;
    write_csv(main_file, &records)?;
    write_csv(summary_file, &summary)?;
    write_csv(timing_file, &timings)?;
    Ok(ExperimentOutcome { records, summary })
}

fn write_csv<T: Serialize>(file: File, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const SUMMARY_METRICS: [&str; 6] =
    ["l1_error", "linf_error", "l1_normalized", "linf_normalized", "linf_scaled", "kendall_tau_raw"];

fn metric(r: &TrialRecord, name: &str) -> Option<f64> {
    match name {
        "l1_error" => r.l1_error,
        "linf_error" => r.linf_error,
        "l1_normalized" => r.l1_normalized,
        "linf_normalized" => r.linf_normalized,
        "linf_scaled" => r.linf_scaled,
        "kendall_tau_raw" => r.kendall_tau_raw.map(|k| k as f64),
        _ => None,
    }
}

fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    let row = |kind: &str, algorithm, n, metric: &str, value| SummaryRow {
        schema_version: SCHEMA_VERSION,
        kind: kind.into(),
        algorithm,
        n,
        metric: metric.into(),
        value,
    };
    for &kind in cfg.algorithm.runs() {
        let mut medians: Vec<Vec<(f64, f64)>> = vec![Vec::new(); SUMMARY_METRICS.len()];
        for &n in &cfg.n_list {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.algorithm == kind && r.n == n).collect();
            let ok = group.iter().filter(|r| r.is_ok()).count();
            rows.push(row("count", kind, Some(n), "ok_trials", ok as f64));
            rows.push(row("count", kind, Some(n), "failed_trials", (group.len() - ok) as f64));
            let resamples: u32 = group.iter().map(|r| r.disconnected_resamples).sum();
            rows.push(row("count", kind, Some(n), "disconnected_resamples", resamples as f64));
            for (m, name) in SUMMARY_METRICS.iter().enumerate() {
                let mut v: Vec<f64> = group.iter().filter_map(|r| metric(r, name)).collect();
                if v.is_empty() {
                    continue;
                }
                let med = median(&mut v);
                rows.push(row("median", kind, Some(n), name, med));
                medians[m].push((n as f64, med));
            }
        }
        for (m, name) in SUMMARY_METRICS.iter().enumerate() {
            let pts = &medians[m];
            if pts.len() >= 3 && pts.iter().all(|p| p.1 > 0.0) {
                rows.push(row("slope", kind, None, name, fit_slope(pts)?));
            }
        }
    }
    Ok(rows)
}

/// Reads a per-trial CSV written by [`run_experiment`].
pub fn read_trial_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let rec: TrialRecord = row?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(SeriationError::parse(
                out.len() + 2,
                format!("schema version {} is not {SCHEMA_VERSION}", rec.schema_version),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Reads a summary CSV written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(SeriationError::from)).collect()
}

/// Least-squares slope of `log value` against `log n`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(SeriationError::arg(format!("slope fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(SeriationError::arg(format!("slope fit needs positive coordinates, got ({}, {})", p.0, p.1)));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SeriationError::arg("slope fit needs at least two distinct n"));
    }
    Ok(sxy / sxx)
}

/// Writes `sigma` in the one-line ordering format.
pub fn write_ordering<W: Write>(mut w: W, sigma: &Ordering) -> Result<()> {
    writeln!(w, "{}", sigma.to_line())?;
    Ok(())
}

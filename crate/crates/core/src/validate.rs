//! Grid-based checks that a graphon meets the regularity conditions behind the
//! consistency guarantees, plus numerical studies of how the discretised
//! Laplacian and the sampled Fiedler vector converge.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SeriationError};
use crate::graph::sample_graph;
use crate::graphon::{midpoint, Graphon};
use crate::harness::fit_slope;
use crate::postproc::SplitConfig;
use crate::rng::derive_seed;
use crate::spectral::{
    discretized_graphon_laplacian, fiedler_pair, mean_zero_min_eigenvalue, operator_norm_diff, LaplacianMatrix,
    DEFAULT_TOLERANCE,
};

/// Largest grid used for checks over triples of points.
pub const TRIPLE_GRID: usize = 150;
/// Minimum fraction of off-diagonal grid points with a non-vanishing partial derivative.
pub const DERIVATIVE_FRACTION: f64 = 0.99;
/// Partial derivatives at or below this magnitude count as zero.
pub const DERIVATIVE_ZERO: f64 = 1e-8;
/// Degree derivatives below this magnitude count as zero.
pub const DEGREE_DERIVATIVE_ZERO: f64 = 1e-6;
/// Largest tolerated fraction of grid points with a vanishing degree derivative.
pub const DEGREE_ZERO_FRACTION: f64 = 0.01;
/// Strict inequalities are tested with this margin.
pub const STRICT_MARGIN: f64 = 1e-12;

const LIPSCHITZ_GROWTH: f64 = 1.5;
const GAP_FLOOR: f64 = 1e-8;

/// Outcome of every assumption check. A failed flag comes with the grid point that witnesses it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub resolution: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Largest finite-difference slope on the grid.
    pub lipschitz_estimate: f64,
    /// Same estimate at twice the resolution; a jump makes it grow in proportion.
    pub lipschitz_estimate_fine: f64,
    pub lipschitz_ok: bool,
    pub lipschitz_witness: Option<Vec<f64>>,
    pub robinsonian_ok: bool,
    /// Largest `w(x,z) - min(w(x,y), w(y,z))` over `x < y < z`.
    pub robinsonian_worst_violation: f64,
    pub robinsonian_witness: Option<Vec<f64>>,
    /// Fraction of off-diagonal grid points with `|∂w/∂x| > DERIVATIVE_ZERO`.
    pub derivative_nonzero_fraction: f64,
    pub derivative_nonzero_ok: bool,
    pub derivative_witness: Option<Vec<f64>>,
    /// Sign changes plus zero runs of `d'` on the grid.
    pub degree_critical_points: usize,
    pub degree_zero_fraction: f64,
    pub degree_ok: bool,
    pub degree_witness: Option<Vec<f64>>,
    /// Smallest eigenvalue of the discretised operator on mean-zero vectors.
    pub lambda2: f64,
    pub min_degree: f64,
    pub gap_ok: bool,
    pub gap_witness: Option<Vec<f64>>,
    /// `inf_{x >= 1-alpha} Ψ_R(x) - Ψ_R(1-beta)`.
    pub mdi_margin_right: f64,
    /// `inf_{x <= alpha} Ψ_L(x) - Ψ_L(beta)`.
    pub mdi_margin_left: f64,
    pub mdi_ok: bool,
    pub mdi_witness: Option<Vec<f64>>,
    /// Smallest `|w(y,z) - w(x,z)| / |x - y|` over admissible same-side triples.
    pub distinguishability_d1: f64,
    pub distinguishability_ok: bool,
    pub distinguishability_witness: Option<Vec<f64>>,
    /// Smallest forward difference of the sign-normalised discretised Fiedler vector.
    pub fiedler_min_slope: f64,
    pub fiedler_monotone_ok: bool,
    pub fiedler_witness: Option<Vec<f64>>,
    /// `λ3 - λ2` of the discretised operator.
    pub fiedler_gap: f64,
    pub fiedler_gap_ok: bool,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.failures().is_empty()
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("lipschitz", self.lipschitz_ok),
            ("robinsonian", self.robinsonian_ok),
            ("derivative_nonzero", self.derivative_nonzero_ok),
            ("degree_critical_points", self.degree_ok),
            ("spectral_gap", self.gap_ok),
            ("mean_distance", self.mdi_ok),
            ("distinguishability", self.distinguishability_ok),
            ("fiedler_monotone", self.fiedler_monotone_ok),
            ("fiedler_gap", self.fiedler_gap_ok),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let w = |o: &Option<Vec<f64>>| match o {
            None => String::new(),
            Some(p) => p.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" "),
        };
        vec![
            ("resolution", self.resolution.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("lipschitz_estimate", self.lipschitz_estimate.to_string()),
            ("lipschitz_estimate_fine", self.lipschitz_estimate_fine.to_string()),
            ("lipschitz_ok", self.lipschitz_ok.to_string()),
            ("lipschitz_witness", w(&self.lipschitz_witness)),
            ("robinsonian_ok", self.robinsonian_ok.to_string()),
            ("robinsonian_worst_violation", self.robinsonian_worst_violation.to_string()),
            ("robinsonian_witness", w(&self.robinsonian_witness)),
            ("derivative_nonzero_fraction", self.derivative_nonzero_fraction.to_string()),
            ("derivative_nonzero_ok", self.derivative_nonzero_ok.to_string()),
            ("derivative_witness", w(&self.derivative_witness)),
            ("degree_critical_points", self.degree_critical_points.to_string()),
            ("degree_zero_fraction", self.degree_zero_fraction.to_string()),
            ("degree_ok", self.degree_ok.to_string()),
            ("degree_witness", w(&self.degree_witness)),
            ("lambda2", self.lambda2.to_string()),
            ("min_degree", self.min_degree.to_string()),
            ("gap_ok", self.gap_ok.to_string()),
            ("gap_witness", w(&self.gap_witness)),
            ("mdi_margin_right", self.mdi_margin_right.to_string()),
            ("mdi_margin_left", self.mdi_margin_left.to_string()),
            ("mdi_ok", self.mdi_ok.to_string()),
            ("mdi_witness", w(&self.mdi_witness)),
            ("distinguishability_d1", self.distinguishability_d1.to_string()),
            ("distinguishability_ok", self.distinguishability_ok.to_string()),
            ("distinguishability_witness", w(&self.distinguishability_witness)),
            ("fiedler_min_slope", self.fiedler_min_slope.to_string()),
            ("fiedler_monotone_ok", self.fiedler_monotone_ok.to_string()),
            ("fiedler_witness", w(&self.fiedler_witness)),
            ("fiedler_gap", self.fiedler_gap.to_string()),
            ("fiedler_gap_ok", self.fiedler_gap_ok.to_string()),
            ("all_ok", self.all_ok().to_string()),
        ]
    }

    /// Flat `key = value` block, one line per field.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn csv_header() -> Vec<&'static str> {
        AssumptionReport::dummy().fields().into_iter().map(|(k, _)| k).collect()
    }

    pub fn csv_record(&self) -> Vec<String> {
        self.fields().into_iter().map(|(_, v)| v).collect()
    }

    /// Header plus one record.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(Self::csv_header())?;
        w.write_record(self.csv_record())?;
        w.flush()?;
        Ok(())
    }

    fn dummy() -> Self {
        AssumptionReport {
            resolution: 0,
            alpha: 0.0,
            beta: 0.0,
            lipschitz_estimate: 0.0,
            lipschitz_estimate_fine: 0.0,
            lipschitz_ok: true,
            lipschitz_witness: None,
            robinsonian_ok: true,
            robinsonian_worst_violation: 0.0,
            robinsonian_witness: None,
            derivative_nonzero_fraction: 0.0,
            derivative_nonzero_ok: true,
            derivative_witness: None,
            degree_critical_points: 0,
            degree_zero_fraction: 0.0,
            degree_ok: true,
            degree_witness: None,
            lambda2: 0.0,
            min_degree: 0.0,
            gap_ok: true,
            gap_witness: None,
            mdi_margin_right: 0.0,
            mdi_margin_left: 0.0,
            mdi_ok: true,
            mdi_witness: None,
            distinguishability_d1: 0.0,
            distinguishability_ok: true,
            distinguishability_witness: None,
            fiedler_min_slope: 0.0,
            fiedler_monotone_ok: true,
            fiedler_witness: None,
            fiedler_gap: 0.0,
            fiedler_gap_ok: true,
        }
    }
}

/// Runs every check on a grid of `resolution` points per axis.
pub fn check_assumptions(graphon: &Graphon, cfg: SplitConfig, resolution: usize) -> Result<AssumptionReport> {
    if resolution < 100 {
        return Err(SeriationError::arg(format!("resolution must be at least 100, got {resolution}")));
    }
    let mut r = AssumptionReport::dummy();
    r.resolution = resolution;
    r.alpha = cfg.alpha();
    r.beta = cfg.beta();

    let (k1, _) = lipschitz_estimate(graphon, resolution);
    let (k2, at2) = lipschitz_estimate(graphon, 2 * resolution);
    r.lipschitz_estimate = k1;
    r.lipschitz_estimate_fine = k2;
    r.lipschitz_ok = k2.is_finite() && k2 <= LIPSCHITZ_GROWTH * k1 + 1e-9;
    if !r.lipschitz_ok {
        r.lipschitz_witness = Some(at2.to_vec());
    }

    let m = resolution.min(TRIPLE_GRID);
    let grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let w: Vec<f64> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| graphon.kernel(x, y))).collect();
    let wk = |i: usize, j: usize| w[i * m + j];

    let (worst, at) = robinsonian_violation(&wk, m);
    r.robinsonian_worst_violation = worst;
    r.robinsonian_ok = worst <= STRICT_MARGIN;
    if !r.robinsonian_ok {
        r.robinsonian_witness = Some(at.iter().map(|&k| grid[k]).collect());
    }

    let (fraction, zero_at) = derivative_fraction(graphon, resolution);
    r.derivative_nonzero_fraction = fraction;
    r.derivative_nonzero_ok = fraction >= DERIVATIVE_FRACTION;
    if !r.derivative_nonzero_ok {
        r.derivative_witness = zero_at.map(|p| p.to_vec());
    }

    let degree = degree_profile(graphon, resolution);
    let (critical, zero_fraction, zero_x) = degree_critical_points(&degree, resolution);
    r.degree_critical_points = critical;
    r.degree_zero_fraction = zero_fraction;
    r.degree_ok = zero_fraction < DEGREE_ZERO_FRACTION;
    if !r.degree_ok {
        r.degree_witness = zero_x.map(|x| vec![x]);
    }

    let lap = discretized_graphon_laplacian(graphon, resolution)?;
    r.lambda2 = mean_zero_min_eigenvalue(&lap);
    let (argmin, &min_degree) =
        degree.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty grid");
    r.min_degree = min_degree;
    r.gap_ok = r.lambda2 < min_degree - STRICT_MARGIN;
    if !r.gap_ok {
        r.gap_witness = Some(vec![argmin as f64 / (degree.len() - 1) as f64]);
    }

    let mdi = mean_distance(graphon, cfg, resolution)?;
    r.mdi_margin_right = mdi.0;
    r.mdi_margin_left = mdi.1;
    r.mdi_ok = mdi.0 > STRICT_MARGIN && mdi.1 > STRICT_MARGIN;
    if !r.mdi_ok {
        r.mdi_witness = Some(if mdi.0 <= STRICT_MARGIN { vec![mdi.2, 1.0 - cfg.beta()] } else { vec![mdi.3, cfg.beta()] });
    }

    let (d1, at) = distinguishability(&wk, &grid, (cfg.beta() - cfg.alpha()) / 2.0);
    r.distinguishability_d1 = d1;
    r.distinguishability_ok = d1 > STRICT_MARGIN;
    if !r.distinguishability_ok {
        r.distinguishability_witness = at.map(|t| t.to_vec());
    }

    match fiedler_pair(&lap, DEFAULT_TOLERANCE) {
        Ok(res) => {
            let (slope, at) = min_forward_difference(&res.fiedler);
            r.fiedler_min_slope = slope;
            r.fiedler_monotone_ok = slope > 0.0;
            if !r.fiedler_monotone_ok {
                r.fiedler_witness = Some(vec![(at + 1) as f64 / resolution as f64]);
            }
            r.fiedler_gap = res.gap3;
            r.fiedler_gap_ok = !res.degenerate && res.gap3 > GAP_FLOOR;
        }
        Err(e) => {
            log::info!("discretised operator has no simple Fiedler pair: {e}");
            r.fiedler_min_slope = f64::NAN;
            r.fiedler_monotone_ok = false;
            r.fiedler_gap = 0.0;
            r.fiedler_gap_ok = false;
        }
    }
    Ok(r)
}

/// Largest `|w(x + h, y) - w(x, y)| / h` on the grid `i/res`, with its location.
fn lipschitz_estimate(graphon: &Graphon, res: usize) -> (f64, [f64; 2]) {
    let h = 1.0 / res as f64;
    let mut best = (0.0, [0.0, 0.0]);
    for j in 0..=res {
        let y = j as f64 * h;
        let mut prev = graphon.kernel(0.0, y);
        for i in 1..=res {
            let x = i as f64 * h;
            let cur = graphon.kernel(x, y);
            let slope = (cur - prev).abs() / h;
            if slope > best.0 {
                best = (slope, [x - h, y]);
            }
            prev = cur;
        }
    }
    best
}

/// Largest violation of `w(x,z) <= min(w(x,y), w(y,z))` over grid triples `x < y < z`.
fn robinsonian_violation(w: &impl Fn(usize, usize) -> f64, m: usize) -> (f64, [usize; 3]) {
    let mut worst = (f64::NEG_INFINITY, [0, 0, 0]);
    for x in 0..m {
        for z in x + 2..m {
            let wxz = w(x, z);
            for y in x + 1..z {
                let v = wxz - w(x, y).min(w(y, z));
                if v > worst.0 {
                    worst = (v, [x, y, z]);
                }
            }
        }
    }
    if m < 3 {
        worst.0 = 0.0;
    }
    worst
}

/// Fraction of off-diagonal interior grid points where the central difference of `w` in `x` is non-zero.
fn derivative_fraction(graphon: &Graphon, res: usize) -> (f64, Option<[f64; 2]>) {
    let h = 1.0 / res as f64;
    let mut total = 0usize;
    let mut nonzero = 0usize;
    let mut first_zero = None;
    for i in 1..res {
        let x = i as f64 * h;
        for j in 0..=res {
            if i == j {
                continue;
            }
            let y = j as f64 * h;
            let d = (graphon.kernel(x + h, y) - graphon.kernel(x - h, y)) / (2.0 * h);
            total += 1;
            if d.abs() > DERIVATIVE_ZERO {
                nonzero += 1;
            } else if first_zero.is_none() {
                first_zero = Some([x, y]);
            }
        }
    }
    (nonzero as f64 / total as f64, first_zero)
}

/// `d(i/res)` for `i` in `0..=res`, integrating separately on each side of the diagonal.
fn degree_profile(graphon: &Graphon, res: usize) -> Vec<f64> {
    let panels = 4 * res;
    (0..=res)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / res as f64;
            let lo = ((panels as f64 * x).round() as usize).max(1);
            let hi = panels.saturating_sub(lo).max(1);
            let f = |y: f64| graphon.kernel(x, y);
            let left = if x > 0.0 { midpoint(0.0, x, lo, f) } else { 0.0 };
            let right = if x < 1.0 { midpoint(x, 1.0, hi, f) } else { 0.0 };
            left + right
        })
        .collect()
}

/// Critical points of `d` from central differences on the interior grid:
/// `(sign changes + zero runs, fraction of near-zero points, first near-zero x)`.
fn degree_critical_points(degree: &[f64], res: usize) -> (usize, f64, Option<f64>) {
    let h = 1.0 / res as f64;
    let deriv: Vec<f64> = (1..degree.len() - 1).map(|i| (degree[i + 1] - degree[i - 1]) / (2.0 * h)).collect();
    let mut critical = 0;
    let mut zeros = 0;
    let mut first_zero = None;
    let mut last_sign = 0i8;
    let mut in_zero_run = false;
    for (k, &d) in deriv.iter().enumerate() {
        if d.abs() < DEGREE_DERIVATIVE_ZERO {
            zeros += 1;
            first_zero.get_or_insert((k + 1) as f64 * h);
            if !in_zero_run {
                critical += 1;
                in_zero_run = true;
            }
            continue;
        }
        let sign = if d > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign && !in_zero_run {
            critical += 1;
        }
        in_zero_run = false;
        last_sign = sign;
    }
    (critical, zeros as f64 / deriv.len() as f64, first_zero)
}

/// `(right margin, left margin, argmin x for Ψ_R, argmin x for Ψ_L)` of the mean-distance inequality.
fn mean_distance(graphon: &Graphon, cfg: SplitConfig, res: usize) -> Result<(f64, f64, f64, f64)> {
    let (a, b) = (cfg.alpha(), cfg.beta());
    let q = res;
    let points = 200;
    let mut inf_r = (f64::INFINITY, 1.0);
    let mut inf_l = (f64::INFINITY, 0.0);
    for k in 0..=points {
        let t = a * k as f64 / points as f64;
        let (r, _) = graphon.psi_functions(a, 1.0 - t, q)?;
        if r < inf_r.0 {
            inf_r = (r, 1.0 - t);
        }
        let (_, l) = graphon.psi_functions(a, t, q)?;
        if l < inf_l.0 {
            inf_l = (l, t);
        }
    }
    let (r_at_beta, _) = graphon.psi_functions(a, 1.0 - b, q)?;
    let (_, l_at_beta) = graphon.psi_functions(a, b, q)?;
    Ok((inf_r.0 - r_at_beta, inf_l.0 - l_at_beta, inf_r.1, inf_l.1))
}

/// Smallest `|w(y,z) - w(x,z)| / |x - y|` over grid triples with `x`, `y` on the same
/// side of `z` and both at distance at least `sep` from it.
///
/// Opposite-side pairs are excluded: for a kernel of `|x - y|` they can be
/// equidistant from `z`, where the ratio is zero for every kernel.
fn distinguishability(w: &impl Fn(usize, usize) -> f64, grid: &[f64], sep: f64) -> (f64, Option<[f64; 3]>) {
    let m = grid.len();
    let mut best = (f64::INFINITY, None);
    for z in 0..m {
        let far: Vec<usize> = (0..m).filter(|&k| (grid[k] - grid[z]).abs() >= sep - 1e-12).collect();
        for (p, &x) in far.iter().enumerate() {
            for &y in &far[p + 1..] {
                if (grid[x] < grid[z]) != (grid[y] < grid[z]) {
                    continue;
                }
                let ratio = (w(y, z) - w(x, z)).abs() / (grid[y] - grid[x]).abs();
                if ratio < best.0 {
                    best = (ratio, Some([grid[x], grid[y], grid[z]]));
                }
            }
        }
    }
    if best.0.is_infinite() {
        best.0 = 0.0;
    }
    best
}

/// Smallest `v[i+1] - v[i]` and the index `i` attaining it.
pub fn min_forward_difference(v: &[f64]) -> (f64, usize) {
    v.windows(2)
        .enumerate()
        .map(|(i, w)| (w[1] - w[0], i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, 0))
}

/// One row of [`laplacian_convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub next: usize,
    pub norm_diff: f64,
    /// `4K/n` when the graphon has a known Lipschitz constant `K`.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Log-log slope of `norm_diff` against `n`; `None` when some difference vanishes
    /// or fewer than three rows exist.
    pub slope: Option<f64>,
}

/// Operator-norm differences between consecutive nested discretisations.
pub fn laplacian_convergence_study(graphon: &Graphon, resolutions: &[usize]) -> Result<ConvergenceStudy> {
    if resolutions.len() < 2 {
        return Err(SeriationError::arg("need at least two resolutions"));
    }
    for w in resolutions.windows(2) {
        if w[0] < 2 || w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(SeriationError::arg(format!("resolutions {} and {} are not nested", w[0], w[1])));
        }
    }
    let laps: Vec<LaplacianMatrix> = resolutions
        .par_iter()
        .map(|&n| discretized_graphon_laplacian(graphon, n))
        .collect::<Result<_>>()?;
    let rows = resolutions
        .windows(2)
        .zip(laps.windows(2))
        .map(|(ns, ls)| {
            Ok(ConvergenceRow {
                n: ns[0],
                next: ns[1],
                norm_diff: operator_norm_diff(&ls[0], &ls[1])?,
                bound: graphon.lipschitz().map(|k| 4.0 * k / ns[0] as f64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.norm_diff)).collect();
    let slope = if points.len() >= 3 && points.iter().all(|p| p.1 > 0.0) { Some(fit_slope(&points)?) } else { None };
    Ok(ConvergenceStudy { rows, slope })
}

/// Unit-`L²` step function of a unit vector: `f(x) = sqrt(n) v[i]` on `[i/n, (i+1)/n)`.
fn step_value(v: &[f64], x: f64) -> f64 {
    let n = v.len();
    let i = ((x * n as f64) as usize).min(n - 1);
    v[i] * (n as f64).sqrt()
}

/// `L²` distance between the step functions of two unit vectors, minimised over the sign of `a`.
pub fn fiedler_function_distance(a: &[f64], b: &[f64]) -> f64 {
    let points = 4 * a.len().max(b.len());
    let (mut plus, mut minus) = (0.0, 0.0);
    for k in 0..points {
        let x = (k as f64 + 0.5) / points as f64;
        let (fa, fb) = (step_value(a, x), step_value(b, x));
        plus += (fa - fb).powi(2);
        minus += (fa + fb).powi(2);
    }
    (plus.min(minus) / points as f64).sqrt()
}

/// One row of [`fiedler_consistency_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub median_distance: f64,
    pub completed: usize,
    pub disconnected: usize,
}

/// Median `L²` distance between sampled Fiedler vectors and the noise-free one.
///
/// The reference is the Fiedler vector of the discretised operator at the largest
/// `n` in `n_list`. Graphs use `rho = n^(-rho_exponent)`; disconnected samples are
/// skipped and counted.
pub fn fiedler_consistency_study(
    graphon: &Graphon,
    n_list: &[usize],
    rho_exponent: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<ConsistencyRow>> {
    if trials == 0 {
        return Err(SeriationError::arg("trials must be at least 1"));
    }
    if !(0.0..1.0).contains(&rho_exponent) {
        return Err(SeriationError::arg(format!("rho exponent must lie in [0, 1), got {rho_exponent}")));
    }
    let &n_ref = n_list.iter().max().ok_or_else(|| SeriationError::arg("n_list is empty"))?;
    let reference = fiedler_pair(&discretized_graphon_laplacian(graphon, n_ref)?, DEFAULT_TOLERANCE)?.fiedler;
    n_list
        .iter()
        .map(|&n| {
            let rho = (n as f64).powf(-rho_exponent);
            let outcomes: Vec<Option<f64>> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<Option<f64>> {
                    let g = sample_graph(graphon, n, rho, derive_seed(seed, &[n as u64, t as u64]))?;
                    match fiedler_pair(&LaplacianMatrix::from_graph(&g), DEFAULT_TOLERANCE) {
                        Ok(res) => Ok(Some(fiedler_function_distance(&res.fiedler, &reference))),
                        Err(SeriationError::Disconnected(_)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let mut d: Vec<f64> = outcomes.iter().flatten().copied().collect();
            let disconnected = trials - d.len();
            Ok(ConsistencyRow { n, median_distance: median(&mut d), completed: d.len(), disconnected })
        })
        .collect()
}

/// Median of the values (mean of the middle pair for even counts); NaN when empty.
pub fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_critical_points_of_a_parabola() {
        let res = 100;
        let d: Vec<f64> = (0..=res).map(|i| {
            let x = i as f64 / res as f64;
            (x - 0.5).powi(2)
        }).collect();
        let (crit, zero_fraction, at) = degree_critical_points(&d, res);
        assert_eq!(crit, 1);
        assert!(zero_fraction < 0.02);
        assert_eq!(at, Some(0.5));
    }

    #[test]
    fn constant_degree_is_all_critical() {
        let d = vec![0.5; 101];
        let (crit, zero_fraction, _) = degree_critical_points(&d, 100);
        assert_eq!(crit, 1);
        assert_eq!(zero_fraction, 1.0);
    }

    #[test]
    fn forward_differences() {
        assert_eq!(min_forward_difference(&[0.0, 1.0, 1.5, 3.0]), (0.5, 1));
        assert_eq!(min_forward_difference(&[0.0, -1.0]).0, -1.0);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn step_distance_identities() {
        let v = [0.5, 0.5, -0.5, -0.5];
        assert!(fiedler_function_distance(&v, &v) < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!(fiedler_function_distance(&neg, &v) < 1e-12);
        // The same function sampled at twice the resolution.
        let fine = [0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -0.5].map(|x: f64| x / 2f64.sqrt());
        assert!(fiedler_function_distance(&fine, &v) < 1e-12);
    }
}

//! Neighbourhood-count refinement of spectral seriation.
//!
//! [`split_postprocess`] orders a vertex set `S` by counting each vertex's
//! neighbours among the extreme vertices of a disjoint set `T`, whose order is
//! estimated spectrally. [`full_postprocess`] runs it on the parts of a random
//! three-way partition, aligns the part orders against a reference and
//! interleaves them.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SeriationError};
use crate::graph::SampledGraph;
use crate::order::{check_aligned, good_partition_sizes, merge_orderings, ordering_from_slices, Ordering};
use crate::rng::{derive_seed, stream};
use crate::spectral::spectral_seriation;

/// Smallest graph accepted by [`full_postprocess`].
pub const MIN_FULL_VERTICES: usize = 30;

/// Attempts at drawing a second partition that meets every part in at least two vertices.
pub const PARTITION_RETRIES: usize = 16;

const THRESHOLD_SLACK: f64 = 1e-9;

/// Quantile parameters `0 < alpha < beta < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSplitConfig", into = "RawSplitConfig")]
pub struct SplitConfig {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSplitConfig {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawSplitConfig> for SplitConfig {
    type Error = SeriationError;

    fn try_from(raw: RawSplitConfig) -> Result<Self> {
        SplitConfig::new(raw.alpha, raw.beta)
    }
}

impl From<SplitConfig> for RawSplitConfig {
    fn from(c: SplitConfig) -> Self {
        RawSplitConfig { alpha: c.alpha, beta: c.beta }
    }
}

impl SplitConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha < beta && beta < 0.5) {
            return Err(SeriationError::arg(format!("need 0 < alpha < beta < 0.5, got alpha={alpha}, beta={beta}")));
        }
        Ok(SplitConfig { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        (self.alpha + self.beta) / 2.0
    }
}

impl Default for SplitConfig {
    /// `(0.05, 0.31)`, which works for every nice graphon.
    fn default() -> Self {
        SplitConfig { alpha: 0.05, beta: 0.31 }
    }
}

/// Three disjoint parts covering `1..=n` with sizes `n/3 <= |S3| <= |S2| <= |S1| <= n/3 + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodPartition {
    parts: [Vec<usize>; 3],
}

impl GoodPartition {
    /// Validates the size chain and that the parts partition `1..=n`.
    pub fn new(parts: [Vec<usize>; 3]) -> Result<Self> {
        let n: usize = parts.iter().map(Vec::len).sum();
        let want = good_partition_sizes(n);
        let sizes = [parts[0].len(), parts[1].len(), parts[2].len()];
        if sizes != want {
            return Err(SeriationError::arg(format!("part sizes {sizes:?} are not good for n = {n} (want {want:?})")));
        }
        let mut seen = vec![false; n + 1];
        for &v in parts.iter().flatten() {
            if v == 0 || v > n || std::mem::replace(&mut seen[v], true) {
                return Err(SeriationError::arg(format!("parts do not partition 1..={n} (vertex {v})")));
            }
        }
        let mut parts = parts;
        parts.iter_mut().for_each(|p| p.sort_unstable());
        Ok(GoodPartition { parts })
    }

    /// Sorted vertices of part `j` in `0..3`.
    pub fn part(&self, j: usize) -> &[usize] {
        &self.parts[j]
    }

    pub fn parts(&self) -> &[Vec<usize>; 3] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }
}

/// Uniform good partition of `1..=n`: shuffle, then cut into blocks of the forced sizes.
pub fn sample_good_partition(n: usize, seed: u64) -> Result<GoodPartition> {
    if n < 3 {
        return Err(SeriationError::arg(format!("a good partition needs n >= 3, got {n}")));
    }
    let mut vertices: Vec<usize> = (1..=n).collect();
    vertices.shuffle(&mut stream(seed));
    let [a, b, _] = good_partition_sizes(n);
    let s3 = vertices.split_off(a + b);
    let s2 = vertices.split_off(a);
    GoodPartition::new([vertices, s2, s3])
}

/// Estimated right-most and left-most vertices of `T` under `order_t`.
///
/// `R = {u : rank(u) >= (1 - alpha)|T|}` and `L = {u : rank(u) <= alpha |T|}`, both sorted.
pub fn estimate_extremes(order_t: &Ordering, alpha: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(SeriationError::arg(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    let t = order_t.len() as f64;
    let hi = (1.0 - alpha) * t - THRESHOLD_SLACK;
    let lo = alpha * t + THRESHOLD_SLACK;
    let right = order_t.iter().filter(|&(_, r)| r as f64 >= hi).map(|(v, _)| v).collect();
    let left = order_t.iter().filter(|&(_, r)| r as f64 <= lo).map(|(v, _)| v).collect();
    Ok((right, left))
}

/// Per-vertex neighbour counts in `R` and `L`, scaled by `1/|T|`.
///
/// Counts are kept as integers so that comparisons and cutoffs are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborStats {
    vertices: Vec<usize>,
    count_r: Vec<u32>,
    count_l: Vec<u32>,
    right: Vec<usize>,
    left: Vec<usize>,
    t_size: usize,
    cutoffs: Option<(u32, u32)>,
}

impl NeighborStats {
    /// Sorted vertex set `S`.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn t_size(&self) -> usize {
        self.t_size
    }

    fn index(&self, v: usize) -> Result<usize> {
        self.vertices.binary_search(&v).map_err(|_| SeriationError::arg(format!("vertex {v} not in S")))
    }

    pub fn psi_r(&self, v: usize) -> Result<f64> {
        Ok(self.count_r[self.index(v)?] as f64 / self.t_size as f64)
    }

    pub fn psi_l(&self, v: usize) -> Result<f64> {
        Ok(self.count_l[self.index(v)?] as f64 / self.t_size as f64)
    }

    /// `psi_R` in the order of [`Self::vertices`].
    pub fn psi_r_values(&self) -> Vec<f64> {
        self.count_r.iter().map(|&c| c as f64 / self.t_size as f64).collect()
    }

    pub fn psi_l_values(&self) -> Vec<f64> {
        self.count_l.iter().map(|&c| c as f64 / self.t_size as f64).collect()
    }

    /// `(c_R, c_L)` once [`empirical_cutoffs`] has been applied.
    pub fn cutoffs(&self) -> Option<(f64, f64)> {
        let t = self.t_size as f64;
        self.cutoffs.map(|(r, l)| (r as f64 / t, l as f64 / t))
    }

    /// Builds statistics directly from neighbour counts; `cutoffs` are counts as well.
    pub fn from_counts(
        vertices: Vec<usize>,
        count_r: Vec<u32>,
        count_l: Vec<u32>,
        t_size: usize,
        cutoffs: Option<(u32, u32)>,
    ) -> Result<Self> {
        if count_r.len() != vertices.len() || count_l.len() != vertices.len() {
            return Err(SeriationError::arg("count vectors must match the vertex list"));
        }
        if t_size == 0 {
            return Err(SeriationError::arg("|T| must be positive"));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeriationError::arg("vertices must be strictly increasing"));
        }
        Ok(NeighborStats { vertices, count_r, count_l, right: Vec::new(), left: Vec::new(), t_size, cutoffs })
    }

    /// `F̂` on indices `a < b` into [`Self::vertices`], so vertex `a` < vertex `b`.
    #[inline]
    fn compare_ordered(&self, a: usize, b: usize, (cr, cl): (u32, u32)) -> i32 {
        let (ru, rv) = (self.count_r[a], self.count_r[b]);
        let (lu, lv) = (self.count_l[a], self.count_l[b]);
        if ru < cr && rv < cr {
            if ru > rv {
                -1
            } else {
                1
            }
        } else if lu < cl && lv < cl {
            if lu < lv {
                -1
            } else {
                1
            }
        } else if ru < cr {
            1
        } else {
            -1
        }
    }
}

/// `psi_R(v) = |N_R(v)| / t_size` and `psi_L(v) = |N_L(v)| / t_size` for every `v` in `S`.
pub fn neighbor_stats(
    g: &SampledGraph,
    right: &[usize],
    left: &[usize],
    s: &[usize],
    t_size: usize,
) -> Result<NeighborStats> {
    let n = g.n();
    if t_size == 0 {
        return Err(SeriationError::arg("|T| must be positive"));
    }
    let mut in_extremes = vec![false; n + 1];
    for &u in right.iter().chain(left) {
        if u == 0 || u > n {
            return Err(SeriationError::arg(format!("vertex {u} not in graph of size {n}")));
        }
        in_extremes[u] = true;
    }
    let mut vertices = s.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    for &v in &vertices {
        if v == 0 || v > n {
            return Err(SeriationError::arg(format!("vertex {v} not in graph of size {n}")));
        }
        if in_extremes[v] {
            return Err(SeriationError::arg(format!("vertex {v} lies in both S and R ∪ L")));
        }
    }
    let count = |set: &[usize], v: usize| set.iter().filter(|&&u| g.edge0(u - 1, v - 1)).count() as u32;
    let count_r = vertices.iter().map(|&v| count(right, v)).collect();
    let count_l = vertices.iter().map(|&v| count(left, v)).collect();
    let mut right = right.to_vec();
    let mut left = left.to_vec();
    right.sort_unstable();
    left.sort_unstable();
    Ok(NeighborStats { vertices, count_r, count_l, right, left, t_size, cutoffs: None })
}

/// `c = inf{c >= 0 : |{v : psi(v) <= c}| >= (1 - beta)|S|}`, i.e. the `⌈(1-beta)|S|⌉`-th smallest value.
pub fn empirical_cutoffs(stats: &mut NeighborStats, beta: f64) -> Result<(f64, f64)> {
    if !(0.0 < beta && beta < 0.5) {
        return Err(SeriationError::arg(format!("beta must lie in (0, 0.5), got {beta}")));
    }
    let m = stats.vertices.len();
    if m == 0 {
        return Err(SeriationError::arg("cutoffs need a nonempty S"));
    }
    let k = (((1.0 - beta) * m as f64 - THRESHOLD_SLACK).ceil() as usize).clamp(1, m);
    let kth = |counts: &[u32]| {
        let mut c = counts.to_vec();
        *c.select_nth_unstable(k - 1).1
    };
    stats.cutoffs = Some((kth(&stats.count_r), kth(&stats.count_l)));
    Ok(stats.cutoffs().expect("just set"))
}

/// Antisymmetric comparator `F̂(u, v)` in `{-1, +1}`; positive means `u` precedes `v`.
pub fn fhat_compare(stats: &NeighborStats, u: usize, v: usize) -> Result<i32> {
    if u == v {
        return Err(SeriationError::arg("F̂ is only defined for distinct vertices"));
    }
    let cut = stats.cutoffs.ok_or_else(|| SeriationError::arg("cutoffs not computed"))?;
    let (a, b) = (stats.index(u)?, stats.index(v)?);
    Ok(if u < v { stats.compare_ordered(a, b, cut) } else { -stats.compare_ordered(b, a, cut) })
}

/// `f̂(v) = Σ_u F̂(u, v)` for every `v` in `S`, in the order of [`NeighborStats::vertices`].
pub fn fhat_scores(stats: &NeighborStats) -> Result<Vec<i64>> {
    let cut = stats.cutoffs.ok_or_else(|| SeriationError::arg("cutoffs not computed"))?;
    let m = stats.vertices.len();
    let mut f = vec![0i64; m];
    for a in 0..m {
        for b in a + 1..m {
            let c = stats.compare_ordered(a, b, cut) as i64;
            f[b] += c;
            f[a] -= c;
        }
    }
    Ok(f)
}

/// Orders `S` by `f̂`, ties broken by vertex identifier.
pub fn score_and_order(stats: &NeighborStats) -> Result<Ordering> {
    let f: Vec<f64> = fhat_scores(stats)?.into_iter().map(|x| x as f64).collect();
    ordering_from_slices(&stats.vertices, &f)
}

fn check_disjoint(n: usize, t: &[usize], s: &[usize]) -> Result<()> {
    let mut in_t = vec![false; n + 1];
    for &u in t {
        if u == 0 || u > n {
            return Err(SeriationError::arg(format!("vertex {u} not in graph of size {n}")));
        }
        in_t[u] = true;
    }
    if let Some(&v) = s.iter().find(|&&v| v <= n && in_t[v]) {
        return Err(SeriationError::arg(format!("T and S share vertex {v}")));
    }
    Ok(())
}

/// Spectral ordering of the subgraph induced on `T`, expressed on the original identifiers.
pub fn seriate_subset(g: &SampledGraph, t: &[usize], tolerance: f64) -> Result<Ordering> {
    let mut t = t.to_vec();
    t.sort_unstable();
    let sub = g.induced(&t)?;
    spectral_seriation(&sub, tolerance)?.relabel(&t)
}

/// Orders `S` using neighbour counts towards the extremes of `T`.
pub fn split_postprocess(
    g: &SampledGraph,
    t: &[usize],
    s: &[usize],
    cfg: SplitConfig,
    tolerance: f64,
) -> Result<Ordering> {
    check_disjoint(g.n(), t, s)?;
    if s.is_empty() {
        return Err(SeriationError::arg("S must be nonempty"));
    }
    let order_t = seriate_subset(g, t, tolerance)?;
    let (right, left) = estimate_extremes(&order_t, cfg.alpha)?;
    let mut stats = neighbor_stats(g, &right, &left, s, t.len())?;
    empirical_cutoffs(&mut stats, cfg.beta)?;
    score_and_order(&stats)
}

/// Full post-processing: three split calls on a random good partition, aligned
/// against a reference order from an independent partition, then merged.
pub fn full_postprocess(g: &SampledGraph, cfg: SplitConfig, seed: u64, tolerance: f64) -> Result<Ordering> {
    let n = g.n();
    if n < MIN_FULL_VERTICES {
        return Err(SeriationError::arg(format!(
            "post-processing needs at least {MIN_FULL_VERTICES} vertices, got {n}"
        )));
    }
    let first = sample_good_partition(n, derive_seed(seed, &[1]))?;
    let mut second = None;
    for attempt in 0..PARTITION_RETRIES as u64 {
        let p = sample_good_partition(n, derive_seed(seed, &[2, attempt]))?;
        let ok = first.parts.iter().all(|sj| overlap(sj, p.part(1)) >= 2);
        if ok {
            second = Some(p);
            break;
        }
    }
    let second = second.ok_or_else(|| {
        SeriationError::arg(format!("no partition with overlaps >= 2 found in {PARTITION_RETRIES} attempts"))
    })?;

    let [s1, s2, s3] = first.parts();
    let jobs: [(&[usize], &[usize]); 4] = [(s3, s1), (s1, s2), (s2, s3), (second.part(0), second.part(1))];
    let mut results: Vec<Ordering> = jobs
        .par_iter()
        .map(|&(t, s)| split_postprocess(g, t, s, cfg, tolerance))
        .collect::<Result<_>>()?;
    let reference = results.pop().expect("four jobs");
    let [a, b, c]: [Ordering; 3] = results.try_into().expect("three part orders");
    align_and_merge([a, b, c], &reference, n)
}

/// Reverses each part order that is not aligned with `reference`, then interleaves them.
pub fn align_and_merge(parts: [Ordering; 3], reference: &Ordering, n: usize) -> Result<Ordering> {
    let aligned = parts.map(|sigma| {
        let a = check_aligned(&sigma, reference);
        let clean = (a.left < 0.001 && a.right > 0.999) || (a.right < 0.001 && a.left > 0.999);
        if !clean {
            log::warn!("part alignment is ambiguous (left {:.4}, right {:.4})", a.left, a.right);
        }
        if a.aligned {
            sigma
        } else {
            sigma.reverse()
        }
    });
    merge_orderings([&aligned[0], &aligned[1], &aligned[2]], n)
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|v| b.binary_search(v).is_ok()).count()
}

/// Default search grid: `alpha` in `0.02..=0.14` step `0.02`, `beta` from `alpha + 0.05` to `0.45` step `0.05`.
pub fn default_alpha_beta_grid() -> Vec<SplitConfig> {
    let mut grid = Vec::new();
    for i in 1..=7 {
        let alpha = (2 * i) as f64 / 100.0;
        for j in 1.. {
            let beta = (2 * i + 5 * j) as f64 / 100.0;
            if beta > 0.45 + 1e-12 {
                break;
            }
            grid.push(SplitConfig::new(alpha, beta).expect("grid values are valid"));
        }
    }
    grid
}

/// Searches `grid` for the first pair passing the empirical strengthened mean-distance test
///
/// `inf_{x >= 1-alpha-delta} psi_R(x) > psi_R(1-beta) + delta`, and the mirrored test for `psi_L`.
///
/// Positions `x` of the vertices in `S` are estimated from the global spectral
/// order, oriented to agree with the order on `T`. Each `psi` is smoothed over a
/// window of about `sqrt(|S|)` neighbouring positions before the test, since a
/// single vertex's count carries sampling noise of the same order as the margins
/// being tested.
pub fn learn_alpha_beta(
    g: &SampledGraph,
    grid: &[SplitConfig],
    delta: f64,
    seed: u64,
    tolerance: f64,
) -> Result<Option<SplitConfig>> {
    if grid.is_empty() {
        return Ok(None);
    }
    if !(delta >= 0.0) {
        return Err(SeriationError::arg("delta must be nonnegative"));
    }
    let n = g.n();
    let partition = sample_good_partition(n, derive_seed(seed, &[3]))?;
    let (t, s) = (partition.part(0), partition.part(1));
    let order_t = seriate_subset(g, t, tolerance)?;
    let mut global = spectral_seriation(g, tolerance)?;
    if !check_aligned(&global, &order_t).aligned {
        global = global.reverse();
    }
    // S sorted by estimated position.
    let mut by_pos: Vec<usize> = s.to_vec();
    by_pos.sort_by_key(|&v| global.rank_of(v).expect("global order covers every vertex"));
    let x_hat: Vec<f64> = by_pos.iter().map(|&v| global.rank_of(v).unwrap() as f64 / n as f64).collect();
    let half = ((s.len() as f64).sqrt() / 2.0).floor().max(1.0) as usize;

    for &cfg in grid {
        let (right, left) = estimate_extremes(&order_t, cfg.alpha)?;
        let stats = neighbor_stats(g, &right, &left, &by_pos, t.len())?;
        let in_pos_order = |vals: Vec<f64>| -> Vec<f64> {
            let by_vertex: Vec<(usize, f64)> = stats.vertices.iter().copied().zip(vals).collect();
            let raw: Vec<f64> = by_pos
                .iter()
                .map(|v| by_vertex[by_vertex.binary_search_by_key(v, |p| p.0).unwrap()].1)
                .collect();
            moving_average(&raw, half)
        };
        let psi_r = in_pos_order(stats.psi_r_values());
        let psi_l = in_pos_order(stats.psi_l_values());
        let at = |x: f64| {
            x_hat
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
                .map(|(k, _)| k)
                .unwrap()
        };
        let inf_over = |vals: &[f64], keep: &dyn Fn(f64) -> bool| {
            x_hat.iter().zip(vals).filter(|(x, _)| keep(**x)).map(|(_, v)| *v).fold(f64::INFINITY, f64::min)
        };
        let (a, b) = (cfg.alpha, cfg.beta);
        let right_ok = inf_over(&psi_r, &|x| x >= 1.0 - a - delta) > psi_r[at(1.0 - b)] + delta;
        let left_ok = inf_over(&psi_l, &|x| x <= a + delta) > psi_l[at(b)] + delta;
        if right_ok && left_ok {
            return Ok(Some(cfg));
        }
    }
    Ok(None)
}

/// Centered running mean with half-width `h`, truncated at the ends.
fn moving_average(v: &[f64], h: usize) -> Vec<f64> {
    let mut prefix = vec![0.0; v.len() + 1];
    for (i, x) in v.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(v.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_config_validation() {
        assert!(SplitConfig::new(0.05, 0.31).is_ok());
        assert!(SplitConfig::new(0.3, 0.2).is_err());
        assert!(SplitConfig::new(0.0, 0.2).is_err());
        assert!(SplitConfig::new(0.1, 0.5).is_err());
        assert_eq!(SplitConfig::new(0.1, 0.3).unwrap().mu(), (0.1 + 0.3) / 2.0);
    }

    #[test]
    fn extremes_follow_rank_thresholds() {
        let id = Ordering::identity(10);
        let (r, l) = estimate_extremes(&id, 0.2).unwrap();
        // rank >= 8 and rank <= 2
        assert_eq!(r, vec![8, 9, 10]);
        assert_eq!(l, vec![1, 2]);

        let (r, l) = estimate_extremes(&Ordering::identity(20), 0.05).unwrap();
        assert_eq!(r, vec![19, 20]);
        assert_eq!(l, vec![1]);

        let (r, l) = estimate_extremes(&Ordering::identity(7), 0.01).unwrap();
        assert_eq!(r, vec![7]);
        assert!(l.is_empty());
    }

    #[test]
    fn cutoffs_are_order_statistics() {
        let mut st = NeighborStats::from_counts(vec![1, 2, 3, 4], vec![1, 2, 3, 4], vec![4, 3, 2, 1], 10, None).unwrap();
        let (cr, cl) = empirical_cutoffs(&mut st, 0.25).unwrap();
        assert_eq!((cr, cl), (0.3, 0.3));
        // (1 - beta) * 4 just above 2 needs three values.
        let (cr, _) = empirical_cutoffs(&mut st, 0.499).unwrap();
        assert_eq!(cr, 0.3);
        let mut flat = NeighborStats::from_counts(vec![1, 2, 3], vec![5; 3], vec![5; 3], 10, None).unwrap();
        assert_eq!(empirical_cutoffs(&mut flat, 0.3).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn comparator_branches() {
        // Branch one: both below c_R.
        let st = NeighborStats::from_counts(vec![1, 2], vec![1, 2], vec![0, 0], 10, Some((5, 5))).unwrap();
        assert_eq!(fhat_compare(&st, 1, 2).unwrap(), 1);
        assert_eq!(fhat_compare(&st, 2, 1).unwrap(), -1);
        // Branch two: u at or above c_R, both below c_L, psi_L(u) > psi_L(v).
        let st = NeighborStats::from_counts(vec![1, 2], vec![6, 1], vec![3, 1], 10, Some((5, 5))).unwrap();
        assert_eq!(fhat_compare(&st, 1, 2).unwrap(), 1);
        // Branch three: only u below c_R.
        let st = NeighborStats::from_counts(vec![1, 2], vec![1, 6], vec![7, 7], 10, Some((5, 5))).unwrap();
        assert_eq!(fhat_compare(&st, 1, 2).unwrap(), 1);
        // Branch four.
        let st = NeighborStats::from_counts(vec![1, 2], vec![6, 1], vec![7, 7], 10, Some((5, 5))).unwrap();
        assert_eq!(fhat_compare(&st, 1, 2).unwrap(), -1);
        assert!(fhat_compare(&st, 1, 1).is_err());
    }

    #[test]
    fn partition_sizes() {
        for (n, want) in [(6, [2, 2, 2]), (7, [3, 2, 2]), (8, [3, 3, 2])] {
            let p = sample_good_partition(n, 9).unwrap();
            assert_eq!([p.part(0).len(), p.part(1).len(), p.part(2).len()], want);
        }
        assert!(sample_good_partition(2, 0).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = default_alpha_beta_grid();
        assert_eq!(g.first().map(|c| (c.alpha(), c.beta())), Some((0.02, 0.07)));
        assert!(g.iter().all(|c| c.beta() <= 0.45 + 1e-12 && c.alpha() <= 0.14 + 1e-12));
        // alpha = 0.02 contributes beta in {0.07, ..., 0.42}: eight values.
        assert_eq!(g.iter().filter(|c| (c.alpha() - 0.02).abs() < 1e-12).count(), 8);
    }

    #[test]
    fn moving_average_truncates() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 1), vec![1.5, 2.0, 3.0, 3.5]);
    }
}

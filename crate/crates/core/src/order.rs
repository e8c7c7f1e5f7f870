//! Orderings of vertex sets and the error metrics used to score them.
//!
//! An [`Ordering`] maps a set of vertex identifiers `S` bijectively onto the
//! ranks `1..=|S|`. Metrics report raw rank units; any normalisation by `n`
//! happens in the experiment harness.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, SeriationError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    /// Sorted, strictly increasing vertex identifiers.
    support: Vec<usize>,
    /// `ranks[k]` is the rank of `support[k]`.
    ranks: Vec<usize>,
}

impl Ordering {
    /// Builds an ordering from `(vertex, rank)` pairs, validating the bijection.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SeriationError::arg("duplicate vertex in ordering"));
        }
        let n = pairs.len();
        let mut used = vec![false; n];
        for &(v, r) in &pairs {
            if r == 0 || r > n || std::mem::replace(&mut used[r - 1], true) {
                return Err(SeriationError::arg(format!("rank {r} of vertex {v} breaks the bijection onto 1..={n}")));
            }
        }
        let (support, ranks) = pairs.into_iter().unzip();
        Ok(Ordering { support, ranks })
    }

    /// Ordering on `1..=n` from ranks listed in vertex order.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        Self::from_pairs(ranks.into_iter().enumerate().map(|(k, r)| (k + 1, r)))
    }

    /// Ordering on `1..=n` whose rank-`r` vertex is `by_rank[r-1]`.
    pub fn from_vertices_by_rank(by_rank: &[usize]) -> Result<Self> {
        Self::from_pairs(by_rank.iter().enumerate().map(|(r, &v)| (v, r + 1)))
    }

    pub fn identity(n: usize) -> Self {
        Ordering { support: (1..=n).collect(), ranks: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Ranks in support order.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank_of(&self, v: usize) -> Option<usize> {
        self.support.binary_search(&v).ok().map(|k| self.ranks[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.support.iter().copied().zip(self.ranks.iter().copied())
    }

    /// Inverse map: element `r-1` is the vertex holding rank `r`.
    pub fn vertices_by_rank(&self) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (v, r) in self.iter() {
            out[r - 1] = v;
        }
        out
    }

    /// `rev(σ)(i) = |S| + 1 - σ(i)`.
    pub fn reverse(&self) -> Ordering {
        let n1 = self.len() + 1;
        Ordering { support: self.support.clone(), ranks: self.ranks.iter().map(|r| n1 - r).collect() }
    }

    /// Renames vertex `k` (for `k` in the support) to `names[k-1]`.
    pub fn relabel(&self, names: &[usize]) -> Result<Ordering> {
        let mut pairs = Vec::with_capacity(self.len());
        for (v, r) in self.iter() {
            let name = *names
                .get(v.wrapping_sub(1))
                .ok_or_else(|| SeriationError::arg(format!("no name for vertex {v}")))?;
            pairs.push((name, r));
        }
        Ordering::from_pairs(pairs)
    }

    /// Restriction to `subset ∩ S`, re-ranked to `1..=k` preserving relative order.
    pub fn restrict(&self, subset: &[usize]) -> Ordering {
        let mut kept: Vec<(usize, usize)> =
            subset.iter().filter_map(|&v| self.rank_of(v).map(|r| (r, v))).collect();
        kept.sort_unstable();
        kept.dedup();
        let pairs = kept.into_iter().enumerate().map(|(k, (_, v))| (v, k + 1));
        Ordering::from_pairs(pairs).expect("restriction of a bijection is a bijection")
    }

    /// One line of space-separated ranks in vertex order.
    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(self.len() * 5);
        for (k, r) in self.ranks.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            s.push_str(&r.to_string());
        }
        s
    }

    /// Parses the single-line format into an ordering on `1..=n`.
    pub fn parse_line(line: &str) -> Result<Ordering> {
        let ranks = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| SeriationError::parse(1, format!("bad rank `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ordering::from_ranks(ranks).map_err(|e| SeriationError::parse(1, e.to_string()))
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// `σ_f(i) = |{j : f(j) <= f(i)}|`, ties broken by ascending vertex identifier.
pub fn ordering_from_values(values: &BTreeMap<usize, f64>) -> Result<Ordering> {
    let (vertices, vals): (Vec<usize>, Vec<f64>) = values.iter().map(|(&v, &x)| (v, x)).unzip();
    ordering_from_slices(&vertices, &vals)
}

/// Same as [`ordering_from_values`] with parallel slices of vertices and values.
pub fn ordering_from_slices(vertices: &[usize], values: &[f64]) -> Result<Ordering> {
    if vertices.is_empty() {
        return Err(SeriationError::arg("cannot order an empty set"));
    }
    if vertices.len() != values.len() {
        return Err(SeriationError::arg("vertex and value lists differ in length"));
    }
    if values.iter().any(|x| x.is_nan()) {
        return Err(SeriationError::arg("NaN value cannot be ranked"));
    }
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(vertices[a].cmp(&vertices[b])));
    Ordering::from_pairs(idx.into_iter().enumerate().map(|(r, k)| (vertices[k], r + 1)))
}

fn check_same_support(a: &Ordering, b: &Ordering) -> Result<()> {
    if a.support != b.support {
        return Err(SeriationError::arg("orderings have different supports"));
    }
    Ok(())
}

fn raw_l1(a: &Ordering, b: &Ordering) -> f64 {
    a.ranks.iter().zip(&b.ranks).map(|(&x, &y)| x.abs_diff(y) as u64).sum::<u64>() as f64
}

fn raw_linf(a: &Ordering, b: &Ordering) -> f64 {
    a.ranks.iter().zip(&b.ranks).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0) as f64
}

/// `Σ |a(i) - b(i)|`, optionally minimised over reversing `a`.
pub fn l1_distance(a: &Ordering, b: &Ordering, symmetrized: bool) -> Result<f64> {
    check_same_support(a, b)?;
    let d = raw_l1(a, b);
    Ok(if symmetrized { d.min(raw_l1(&a.reverse(), b)) } else { d })
}

/// `max |a(i) - b(i)|`, optionally minimised over reversing `a`.
pub fn linf_distance(a: &Ordering, b: &Ordering, symmetrized: bool) -> Result<f64> {
    check_same_support(a, b)?;
    let d = raw_linf(a, b);
    Ok(if symmetrized { d.min(raw_linf(&a.reverse(), b)) } else { d })
}

/// Number of discordant pairs `|{i < j : π(i) > π(j)}|`, by merge sort in `O(n log n)`.
pub fn kendall_tau(pi: &Ordering) -> u64 {
    let mut a = pi.ranks.clone();
    let mut buf = vec![0; a.len()];
    count_inversions(&mut a, &mut buf)
}

fn count_inversions(a: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (lo, hi) = a.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        count_inversions(lo, blo) + count_inversions(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[i] <= a[j] {
            buf[k] = a[i];
            i += 1;
        } else {
            buf[k] = a[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    inv
}

/// Part sizes `(|S1|, |S2|, |S3|)` forced by a good partition of `n_total` vertices.
pub fn good_partition_sizes(n_total: usize) -> [usize; 3] {
    let (q, r) = (n_total / 3, n_total % 3);
    [q + (r >= 1) as usize, q + (r >= 2) as usize, q]
}

/// Interleaves three part orderings: rank `3k + j` goes to the vertex of rank `k + 1` in part `j`.
///
/// Vertices are integer identifiers here, so no rescaling by `n_total` is needed
/// to turn latent positions back into labels.
pub fn merge_orderings(parts: [&Ordering; 3], n_total: usize) -> Result<Ordering> {
    let sizes = good_partition_sizes(n_total);
    for (j, (p, &want)) in parts.iter().zip(&sizes).enumerate() {
        if p.len() != want {
            return Err(SeriationError::arg(format!(
                "part {} has {} vertices; a good partition of {n_total} needs {want}",
                j + 1,
                p.len()
            )));
        }
    }
    let by_rank: Vec<Vec<usize>> = parts.iter().map(|p| p.vertices_by_rank()).collect();
    let mut pairs = Vec::with_capacity(n_total);
    for pos in 1..=n_total {
        let (k, j) = ((pos - 1) / 3, (pos - 1) % 3);
        pairs.push((by_rank[j][k], pos));
    }
    let merged = Ordering::from_pairs(pairs)?;
    if merged.support.first() != Some(&1) || merged.support.last() != Some(&n_total) {
        return Err(SeriationError::arg(format!("parts do not partition 1..={n_total}")));
    }
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub aligned: bool,
    pub closely_aligned: bool,
    /// `max |a(i)/|A| - b(i)/|B||` over the common support.
    pub left: f64,
    /// The same with `a` reversed.
    pub right: f64,
}

/// Compares `a` and `b` on their common support, with and without reversing `a`.
///
/// Ties count as aligned; disjoint supports are aligned by convention.
pub fn check_aligned(a: &Ordering, b: &Ordering) -> Alignment {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut left, mut right) = (0.0f64, 0.0f64);
    let mut common = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a.support[i].cmp(&b.support[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let ra = a.ranks[i] as f64;
                let rb = b.ranks[j] as f64 / nb;
                left = left.max((ra / na - rb).abs());
                right = right.max(((na + 1.0 - ra) / na - rb).abs());
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if common == 0 {
        return Alignment { aligned: true, closely_aligned: false, left: 0.0, right: 0.0 };
    }
    Alignment { aligned: left <= right, closely_aligned: left < 0.001 && right > 0.999, left, right }
}

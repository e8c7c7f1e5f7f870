//! Sampled graphs and the plain-text edge-list format.
//!
//! Vertices are identified by `1..=n`; vertex `i` has latent position `i/n`.
//! The upper triangle of the adjacency matrix is stored bit-packed in
//! row-major `(i < j)` order, the same order in which edge coins are drawn.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::RngCore;

use crate::error::{Result, SeriationError};
use crate::graphon::Graphon;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    n: usize,
    bits: Vec<u64>,
    edges: usize,
    rho: f64,
    seed: u64,
}

#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl SampledGraph {
    pub fn empty(n: usize) -> Self {
        let pairs = n * n.saturating_sub(1) / 2;
        SampledGraph { n, bits: vec![0; pairs.div_ceil(64)], edges: 0, rho: 1.0, seed: 0 }
    }

    /// Builds a graph from 1-based undirected edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = SampledGraph::empty(n);
        for (u, v) in edges {
            if u == v || u == 0 || v == 0 || u > n || v > n {
                return Err(SeriationError::arg(format!("invalid edge ({u}, {v}) for n = {n}")));
            }
            g.insert(u - 1, v - 1);
        }
        Ok(g)
    }

    /// Banded graph: `u ~ v` iff `0 < |u - v| <= band`.
    pub fn banded(n: usize, band: usize) -> Self {
        let mut g = SampledGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n.min(i + band + 1) {
                g.insert(i, j);
            }
        }
        g
    }

    /// Deterministic graph keeping exactly the pairs with `P_ij >= 1/2`.
    ///
    /// For a Robinsonian graphon this is a noiseless Robinsonian graph.
    pub fn noiseless(graphon: &Graphon, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SeriationError::arg("graph needs n >= 1"));
        }
        let nf = n as f64;
        let mut g = SampledGraph::empty(n);
        for i in 0..n {
            let x = (i + 1) as f64 / nf;
            for j in i + 1..n {
                if graphon.kernel(x, (j + 1) as f64 / nf) >= 0.5 {
                    g.insert(i, j);
                }
            }
        }
        Ok(g)
    }

    fn insert(&mut self, a: usize, b: usize) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let k = pair_index(self.n, i, j);
        let mask = 1u64 << (k % 64);
        let fresh = self.bits[k / 64] & mask == 0;
        if fresh {
            self.bits[k / 64] |= mask;
            self.edges += 1;
        }
        fresh
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Latent position of vertex `v` (1-based).
    pub fn position(&self, v: usize) -> f64 {
        v as f64 / self.n as f64
    }

    /// Edge test on 0-based indices.
    #[inline]
    pub(crate) fn edge0(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let k = if i < j { pair_index(self.n, i, j) } else { pair_index(self.n, j, i) };
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    /// Edge test on 1-based vertex identifiers.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u >= 1 && v >= 1 && u <= self.n && v <= self.n && self.edge0(u - 1, v - 1)
    }

    /// Edges as 1-based pairs `(i, j)`, `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter(move |&j| self.edge0(i, j)).map(move |j| (i + 1, j + 1))
        })
    }

    /// Neighbour lists on 0-based indices, sorted.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.n];
        for (u, v) in self.edges() {
            lists[u - 1].push(v - 1);
            lists[v - 1].push(u - 1);
        }
        for l in &mut lists {
            l.sort_unstable();
        }
        lists
    }

    /// Dense 0/1 row of vertex index `i` (0-based), written into `out`.
    pub fn dense_row(&self, i: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.n) {
            *o = if self.edge0(i, j) { 1.0 } else { 0.0 };
        }
    }

    /// Subgraph induced on the given 1-based vertices, relabelled `1..=k` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<SampledGraph> {
        if let Some(&bad) = vertices.iter().find(|&&v| v == 0 || v > self.n) {
            return Err(SeriationError::arg(format!("vertex {bad} not in graph of size {}", self.n)));
        }
        let k = vertices.len();
        let mut g = SampledGraph::empty(k);
        for a in 0..k {
            for b in a + 1..k {
                if self.edge0(vertices[a] - 1, vertices[b] - 1) {
                    g.insert(a, b);
                }
            }
        }
        g.rho = self.rho;
        g.seed = self.seed;
        Ok(g)
    }

    /// Whether every vertex is reachable from vertex 1 (empty and singleton graphs count as connected).
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Writes the edge list: header `n m rho seed`, then `i j` per edge (1-based, `i < j`).
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::new();
        let _ = writeln!(buf, "{} {} {} {}", self.n, self.edges, self.rho, self.seed);
        for (i, j) in self.edges() {
            let _ = writeln!(buf, "{i} {j}");
            if buf.len() > 1 << 16 {
                w.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = Vec::new();
        self.write_edge_list(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("edge list is ASCII")
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<SampledGraph> {
        let mut lines = r.lines().enumerate().filter_map(|(k, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((k + 1, other)),
        });
        let (hline, header) = lines.next().ok_or_else(|| SeriationError::parse(1, "empty edge list"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(SeriationError::parse(hline, "header must be `n m rho seed`"));
        }
        let n: usize = fields[0].parse().map_err(|_| SeriationError::parse(hline, "bad vertex count"))?;
        let m: usize = fields[1].parse().map_err(|_| SeriationError::parse(hline, "bad edge count"))?;
        let rho: f64 = fields[2].parse().map_err(|_| SeriationError::parse(hline, "bad rho"))?;
        let seed: u64 = fields[3].parse().map_err(|_| SeriationError::parse(hline, "bad seed"))?;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(SeriationError::parse(hline, format!("rho = {rho} outside (0,1]")));
        }
        let mut g = SampledGraph::empty(n);
        g.rho = rho;
        g.seed = seed;
        for (line, text) in lines {
            let text = text?;
            let mut it = text.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(SeriationError::parse(line, "expected `i j`"));
            };
            let parse = |s: &str| -> Result<usize> {
                s.parse::<usize>().map_err(|_| SeriationError::parse(line, format!("bad vertex `{s}`")))
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v || u == 0 || v == 0 || u > n || v > n {
                return Err(SeriationError::parse(line, format!("invalid edge ({u}, {v}) for n = {n}")));
            }
            if !g.insert(u - 1, v - 1) {
                return Err(SeriationError::parse(line, format!("duplicate edge ({u}, {v})")));
            }
        }
        if g.edges != m {
            return Err(SeriationError::parse(hline, format!("header declares {m} edges, found {}", g.edges)));
        }
        Ok(g)
    }

    pub fn from_edge_list(text: &str) -> Result<SampledGraph> {
        SampledGraph::read_edge_list(text.as_bytes())
    }
}

/// Samples `G ~ rho w` on the grid `v_i = i/n`.
///
/// Each pair `i < j` becomes an edge independently with probability
/// `rho * w(i/n, j/n)`. Coins come from a ChaCha8 stream seeded with `seed`,
/// one 64-bit draw per pair in row-major order, so the result is bit-identical
/// across runs and platforms.
pub fn sample_graph(graphon: &Graphon, n: usize, rho: f64, seed: u64) -> Result<SampledGraph> {
    if n == 0 {
        return Err(SeriationError::arg("graph needs n >= 1"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SeriationError::arg(format!("rho = {rho} must lie in (0, 1]")));
    }
    let mut coins = rng::stream(seed);
    let nf = n as f64;
    let mut g = SampledGraph::empty(n);
    g.rho = rho;
    g.seed = seed;
    let mut k = 0usize;
    for i in 0..n {
        let x = (i + 1) as f64 / nf;
        for j in i + 1..n {
            let p = rho * graphon.kernel(x, (j + 1) as f64 / nf);
            if rng::unit_f64(coins.next_u64()) < p {
                g.bits[k / 64] |= 1u64 << (k % 64);
                g.edges += 1;
            }
            k += 1;
        }
    }
    Ok(g)
}

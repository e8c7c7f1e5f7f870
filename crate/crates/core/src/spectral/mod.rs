//! Graph Laplacians, the Fiedler pair, and spectral seriation.

mod lanczos;
pub mod tridiag;

use crate::error::{Result, SeriationError};
use crate::graph::SampledGraph;
use crate::graphon::Graphon;
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::order::{ordering_from_slices, Ordering};

use lanczos::SymmetricOperator;

/// Largest dimension handled by the dense tridiagonal solver; above it Lanczos is used.
pub const DENSE_LIMIT: usize = 2048;

/// Default relative tolerance for eigensolves.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

const LANCZOS_MAX_ITER: usize = 1000;
const DEGENERATE_GAP: f64 = 1e-10;

#[derive(Debug, Clone)]
enum Storage {
    Dense(DenseMatrix),
    /// Unweighted graph: degrees and sorted neighbour lists.
    Sparse { degree: Vec<f64>, adj: Vec<Vec<usize>> },
}

/// `L = scale * (D - W)` for a symmetric nonnegative weight matrix `W`.
///
/// `self_weights` keeps the diagonal of `W`, which cancels out of `L` but is
/// needed to interpret a discretised graphon Laplacian as an integral operator.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    n: usize,
    storage: Storage,
    scale: f64,
    self_weights: Option<Vec<f64>>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Laplacian of a sampled graph. Dense up to [`DENSE_LIMIT`] vertices, sparse above.
    pub fn from_graph(g: &SampledGraph) -> Self {
        let n = g.n();
        if n <= DENSE_LIMIT {
            let mut m = DenseMatrix::zeros(n);
            {
                let data = m.as_mut_slice();
                for (i, j) in g.edges() {
                    data[(i - 1) * n + (j - 1)] = -1.0;
                    data[(j - 1) * n + (i - 1)] = -1.0;
                }
                for i in 0..n {
                    let deg: f64 = -data[i * n..(i + 1) * n].iter().sum::<f64>();
                    data[i * n + i] = deg;
                }
            }
            LaplacianMatrix { n, storage: Storage::Dense(m), scale: 1.0, self_weights: None }
        } else {
            let adj = g.adjacency_lists();
            let degree = adj.iter().map(|l| l.len() as f64).collect();
            LaplacianMatrix { n, storage: Storage::Sparse { degree, adj }, scale: 1.0, self_weights: None }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.get(i, j),
            Storage::Sparse { degree, adj } => {
                if i == j {
                    self.scale * degree[i]
                } else if adj[i].binary_search(&j).is_ok() {
                    -self.scale
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse { .. } => DenseMatrix::from_fn(self.n, |i, j| self.get(i, j)),
        }
    }

    /// Multiplies every entry by `factor` and records it in the scale tag.
    pub fn scaled(mut self, factor: f64) -> Self {
        match &mut self.storage {
            Storage::Dense(m) => m.as_mut_slice().iter_mut().for_each(|v| *v *= factor),
            Storage::Sparse { .. } => {}
        }
        self.scale *= factor;
        self
    }

    /// Diagonal of the weight matrix dropped by `D - W`, if recorded.
    pub fn self_weights(&self) -> Option<&[f64]> {
        self.self_weights.as_deref()
    }

    /// Upper bound on the spectral norm (twice the largest diagonal entry).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max) * 2.0
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (0..self.n).map(|i| m.row(i).iter().sum::<f64>().abs()).fold(0.0, f64::max),
            Storage::Sparse { .. } => 0.0,
        }
    }

    fn connected(&self) -> bool {
        let n = self.n;
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            let mut visit = |v: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            };
            match &self.storage {
                Storage::Dense(m) => {
                    for (v, &x) in m.row(u).iter().enumerate() {
                        if v != u && x != 0.0 {
                            visit(v, &mut seen, &mut stack);
                        }
                    }
                }
                Storage::Sparse { adj, .. } => {
                    for &v in &adj[u] {
                        visit(v, &mut seen, &mut stack);
                    }
                }
            }
        }
        count == n
    }

    /// Row-major, space-separated dump.
    pub fn to_text(&self) -> String {
        self.to_dense().to_text()
    }
}

impl SymmetricOperator for LaplacianMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Dense(m) => m.matvec(x, y),
            Storage::Sparse { degree, adj } => {
                for i in 0..self.n {
                    let s: f64 = adj[i].iter().map(|&j| x[j]).sum();
                    y[i] = self.scale * (degree[i] * x[i] - s);
                }
            }
        }
    }
}

/// `L = diag(row sums) - W` for a symmetric nonnegative matrix `W`.
///
/// The diagonal of `W` cancels; each diagonal entry of `L` is the sum of the
/// off-diagonal weights in its row, so rows sum to zero up to rounding.
pub fn laplacian(weights: &DenseMatrix) -> Result<LaplacianMatrix> {
    let n = weights.dim();
    if !weights.is_symmetric(0.0) {
        return Err(SeriationError::arg("weight matrix is not symmetric"));
    }
    if weights.as_slice().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(SeriationError::arg("weight matrix has negative or non-finite entries"));
    }
    let mut m = DenseMatrix::zeros(n);
    let mut self_weights = Vec::with_capacity(n);
    {
        let data = m.as_mut_slice();
        for i in 0..n {
            let row = weights.row(i);
            let mut deg = 0.0;
            for (j, &w) in row.iter().enumerate() {
                if j != i {
                    data[i * n + j] = -w;
                    deg += w;
                }
            }
            data[i * n + i] = deg;
            self_weights.push(row[i]);
        }
    }
    Ok(LaplacianMatrix { n, storage: Storage::Dense(m), scale: 1.0, self_weights: Some(self_weights) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Dense below [`DENSE_LIMIT`], Lanczos above.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// `λ1 <= λ2 <= λ3`.
    pub eigenvalues: [f64; 3],
    /// Unit-norm eigenvector for `λ2`, orthogonal to constants, oriented so `Σ i φ_i >= 0`.
    pub fiedler: Vec<f64>,
    pub gap2: f64,
    pub gap3: f64,
    pub solver_tolerance: f64,
    /// `λ3 - λ2` vanished: the Fiedler space is not one-dimensional.
    pub degenerate: bool,
    pub residual: f64,
    pub method: SolverMethod,
    pub iterations: usize,
}

impl SpectralResult {
    pub fn fiedler_value(&self) -> f64 {
        self.eigenvalues[1]
    }
}

/// Fiedler pair `(λ2, φ)` of a Laplacian.
pub fn fiedler_pair(l: &LaplacianMatrix, tolerance: f64) -> Result<SpectralResult> {
    fiedler_pair_with(l, tolerance, SolverMethod::Auto)
}

pub fn fiedler_pair_with(l: &LaplacianMatrix, tolerance: f64, method: SolverMethod) -> Result<SpectralResult> {
    let n = l.n();
    if n < 2 {
        return Err(SeriationError::arg("Fiedler pair needs at least 2 vertices"));
    }
    if !(tolerance > 0.0) {
        return Err(SeriationError::arg("tolerance must be positive"));
    }
    if !l.connected() {
        return Err(SeriationError::Disconnected("zero eigenvalue has multiplicity >= 2".into()));
    }
    let scale = l.norm_bound().max(f64::MIN_POSITIVE);
    let method = match method {
        _ if n < 3 => SolverMethod::Dense,
        SolverMethod::Auto if n <= DENSE_LIMIT => SolverMethod::Dense,
        SolverMethod::Auto => SolverMethod::Lanczos,
        m => m,
    };

    let (eigenvalues, mut phi, iterations) = match method {
        SolverMethod::Dense => {
            let red = tridiag::tridiagonalize(l.to_dense().as_slice().to_vec(), n);
            let k = 3.min(n);
            let mut vals = red.tri.smallest(k);
            while vals.len() < 3 {
                vals.push(f64::INFINITY);
            }
            let mut z = red.tri.eigenvector(vals[1], &[]);
            red.back_transform(&mut z);
            ([vals[0], vals[1], vals[2]], z, n)
        }
        _ => {
            let ritz = lanczos::smallest_on_mean_zero(l, tolerance * scale, LANCZOS_MAX_ITER, 0x5eed_f1ed)?;
            let ones = vec![1.0; n];
            let mut lo = vec![0.0; n];
            l.apply(&ones, &mut lo);
            let lambda1 = dot(&ones, &lo) / n as f64;
            ([lambda1, ritz.values[0], ritz.values[1]], ritz.vector, ritz.iterations)
        }
    };

    let mean = phi.iter().sum::<f64>() / n as f64;
    phi.iter_mut().for_each(|v| *v -= mean);
    let nrm = norm2(&phi);
    phi.iter_mut().for_each(|v| *v /= nrm);
    let orient: f64 = phi.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
    if orient < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }

    let mut lphi = vec![0.0; n];
    l.apply(&phi, &mut lphi);
    let residual = lphi.iter().zip(&phi).map(|(a, b)| (a - eigenvalues[1] * b).powi(2)).sum::<f64>().sqrt();

    let gap2 = eigenvalues[1] - eigenvalues[0];
    let gap3 = eigenvalues[2] - eigenvalues[1];
    if gap2 < tolerance * scale {
        return Err(SeriationError::Disconnected(format!("spectral gap λ2-λ1 = {gap2:e} below tolerance")));
    }
    if residual > tolerance * scale.max(1.0) {
        return Err(SeriationError::NoConvergence { iterations, residual });
    }
    Ok(SpectralResult {
        eigenvalues,
        fiedler: phi,
        gap2,
        gap3,
        solver_tolerance: tolerance,
        degenerate: gap3 < DEGENERATE_GAP * scale.max(1.0),
        residual,
        method,
        iterations,
    })
}

/// Spectral seriation: rank vertices by their Fiedler vector entries.
pub fn spectral_seriation(g: &SampledGraph, tolerance: f64) -> Result<Ordering> {
    Ok(spectral_seriation_detailed(g, tolerance)?.0)
}

/// Spectral seriation returning the eigen-solve diagnostics as well.
pub fn spectral_seriation_detailed(g: &SampledGraph, tolerance: f64) -> Result<(Ordering, SpectralResult)> {
    let n = g.n();
    if n == 1 {
        let res = SpectralResult {
            eigenvalues: [0.0, f64::INFINITY, f64::INFINITY],
            fiedler: vec![1.0],
            gap2: f64::INFINITY,
            gap3: f64::NAN,
            solver_tolerance: tolerance,
            degenerate: true,
            residual: 0.0,
            method: SolverMethod::Dense,
            iterations: 0,
        };
        return Ok((Ordering::identity(1), res));
    }
    let l = LaplacianMatrix::from_graph(g);
    let res = fiedler_pair(&l, tolerance)?;
    let vertices: Vec<usize> = (1..=n).collect();
    let order = ordering_from_slices(&vertices, &res.fiedler)?;
    Ok((order, res))
}

/// Noise-free Laplacian of the model matrix at `resolution`, scaled by `1/resolution`.
///
/// Its spectrum approximates that of the graphon Laplacian operator.
pub fn discretized_graphon_laplacian(graphon: &Graphon, resolution: usize) -> Result<LaplacianMatrix> {
    if resolution < 2 {
        return Err(SeriationError::arg("resolution must be at least 2"));
    }
    let p = graphon.model_matrix(resolution)?;
    Ok(laplacian(p.matrix())?.scaled(1.0 / resolution as f64))
}

/// Operator-norm distance between two discretised graphon Laplacians.
///
/// `coarse` is read back as a piecewise-constant kernel, replicated onto the
/// grid of `fine`, and the spectral norm of the difference is returned.
pub fn operator_norm_diff(coarse: &LaplacianMatrix, fine: &LaplacianMatrix) -> Result<f64> {
    let (n1, n2) = (coarse.n(), fine.n());
    if n1 == 0 || n2 % n1 != 0 {
        return Err(SeriationError::arg(format!("resolution {n2} is not a multiple of {n1}")));
    }
    for (l, n) in [(coarse, n1), (fine, n2)] {
        if (l.scale() * n as f64 - 1.0).abs() > 1e-12 {
            return Err(SeriationError::arg("operator_norm_diff needs Laplacians scaled by 1/resolution"));
        }
    }
    let r = n2 / n1;
    let coarse_dense = coarse.to_dense();
    let fine_dense = fine.to_dense();
    let get_coarse = |i: usize, j: usize| {
        if i == j {
            coarse.self_weights().map_or(0.0, |s| s[i])
        } else {
            -coarse_dense.get(i, j) / coarse.scale()
        }
    };
    // E = replicated coarse kernel - fine kernel, off the diagonal.
    let s2 = fine.scale();
    let mut diff = DenseMatrix::zeros(n2);
    {
        let data = diff.as_mut_slice();
        for a in 0..n2 {
            let mut row_sum = 0.0;
            for b in 0..n2 {
                if a == b {
                    continue;
                }
                let e = get_coarse(a / r, b / r) - (-fine_dense.get(a, b) / s2);
                data[a * n2 + b] = -s2 * e;
                row_sum += e;
            }
            data[a * n2 + a] = s2 * row_sum;
        }
    }
    spectral_norm(&diff)
}

/// Spectral norm of a dense symmetric matrix.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let n = m.dim();
    if n == 0 {
        return Ok(0.0);
    }
    if !m.is_symmetric(1e-12 * m.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300)) {
        return Err(SeriationError::arg("spectral_norm needs a symmetric matrix"));
    }
    if m.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let red = tridiag::tridiagonalize(m.as_slice().to_vec(), n);
    let lo = red.tri.eigenvalue(1);
    let hi = red.tri.largest();
    Ok(lo.abs().max(hi.abs()))
}

/// The `k` smallest eigenvalues of a dense symmetric matrix.
pub fn smallest_eigenvalues(m: &DenseMatrix, k: usize) -> Vec<f64> {
    let red = tridiag::tridiagonalize(m.as_slice().to_vec(), m.dim());
    red.tri.smallest(k)
}

/// Smallest eigenvalue of `L` on the mean-zero subspace, by shifting the constant direction out of the way.
pub fn mean_zero_min_eigenvalue(l: &LaplacianMatrix) -> f64 {
    let n = l.n();
    let shift = l.norm_bound() + 1.0;
    let mut m = l.to_dense();
    let c = shift / n as f64;
    m.as_mut_slice().iter_mut().for_each(|v| *v += c);
    smallest_eigenvalues(&m, 1)[0]
}

//! Symmetric tridiagonal machinery: Householder reduction, Sturm-count
//! bisection and inverse iteration.

use crate::matrix::{axpy, dot, norm2};

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n-1.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Result of reducing a dense symmetric matrix to tridiagonal form.
///
/// Reflector `k` acts on indices `k+1..n` and is stored in row `k` of `work`.
pub struct Reduction {
    pub tri: Tridiagonal,
    n: usize,
    work: Vec<f64>,
    betas: Vec<f64>,
}

/// Householder tridiagonalisation of a dense symmetric row-major matrix (consumed).
pub fn tridiagonalize(mut a: Vec<f64>, n: usize) -> Reduction {
    assert_eq!(a.len(), n * n);
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut betas = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let row = k * n;
        let x0 = a[row + k + 1];
        let tail = norm2(&a[row + k + 2..row + n]);
        if tail == 0.0 {
            off[k] = x0;
            betas[k] = 0.0;
            continue;
        }
        let norm = x0.hypot(tail);
        let alpha = if x0 > 0.0 { -norm } else { norm };
        // v = x - alpha e1, kept in row k.
        a[row + k + 1] = x0 - alpha;
        let v: Vec<f64> = a[row + k + 1..row + n].to_vec();
        let beta = 2.0 / dot(&v, &v);
        betas[k] = beta;
        off[k] = alpha;

        // p = beta * A22 v
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            let r = (k + 1 + i) * n + k + 1;
            *pi = beta * dot(&a[r..r + m], &v);
        }
        // w = p - (beta p.v / 2) v
        let kfac = 0.5 * beta * dot(p, &v);
        let w = &mut w[..m];
        for i in 0..m {
            w[i] = p[i] - kfac * v[i];
        }
        // A22 -= v w^T + w v^T
        for i in 0..m {
            let r = (k + 1 + i) * n + k + 1;
            let (vi, wi) = (v[i], w[i]);
            let dst = &mut a[r..r + m];
            for j in 0..m {
                dst[j] -= vi * w[j] + wi * v[j];
            }
        }
    }
    for (k, d) in diag.iter_mut().enumerate() {
        *d = a[k * n + k];
    }
    Reduction { tri: Tridiagonal { diag, off }, n, work: a, betas }
}

impl Reduction {
    /// Maps an eigenvector of the tridiagonal matrix back to the original basis, in place.
    pub fn back_transform(&self, z: &mut [f64]) {
        let n = self.n;
        for k in (0..n.saturating_sub(1)).rev() {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &self.work[k * n + k + 1..k * n + n];
            let s = beta * dot(v, &z[k + 1..]);
            axpy(&mut z[k + 1..], -s, v);
        }
    }
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(0.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax.max(1.0)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence of the LDL^T pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (1-based) by bisection to full precision.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        assert!(index >= 1 && index <= self.len());
        let (mut lo, mut hi) = self.bounds();
        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin();
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin() {
                break;
            }
            if self.count_below(mid) >= index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn smallest(&self, k: usize) -> Vec<f64> {
        (1..=k.min(self.len())).map(|i| self.eigenvalue(i)).collect()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalue(self.len())
    }

    /// Unit eigenvector for `lambda` by inverse iteration, kept orthogonal to `against`.
    pub fn eigenvector(&self, lambda: f64, against: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let scale = self.norm_bound().max(f64::MIN_POSITIVE);
        let lu = TriLu::factor(self, lambda, scale);
        // Deterministic start; varied per call so clustered eigenvalues get independent starts.
        let salt = 0x5eed ^ ((against.len() as u64) << 32);
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let h = crate::rng::mix64(i as u64 ^ salt);
                0.5 + crate::rng::unit_f64(h)
            })
            .collect();
        orthonormalize(&mut x, against);
        for _ in 0..4 {
            lu.solve(&mut x);
            orthonormalize(&mut x, against);
        }
        x
    }
}

fn orthonormalize(x: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in against {
            let s = dot(q, x);
            axpy(x, -s, q);
        }
    }
    let nrm = norm2(x);
    if nrm > 0.0 && nrm.is_finite() {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
}

/// LU factorisation with partial pivoting of `T - lambda I`.
struct TriLu {
    dl: Vec<f64>,
    dd: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn factor(t: &Tridiagonal, lambda: f64, scale: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut dd: Vec<f64> = t.diag.iter().map(|d| d - lambda).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] != 0.0 {
                    let fact = dl[i] / dd[i];
                    dl[i] = fact;
                    dd[i + 1] -= fact * du[i];
                }
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        // A singular pivot is expected at an exact eigenvalue; perturb it.
        let tiny = f64::EPSILON * scale;
        for d in &mut dd {
            if d.abs() < tiny {
                *d = if *d < 0.0 { -tiny } else { tiny };
            }
        }
        TriLu { dl, dd, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.dd[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
        // Rescale to avoid overflow on repeated solves.
        let m = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 && m.is_finite() {
            b.iter_mut().for_each(|v| *v /= m);
        }
    }
}

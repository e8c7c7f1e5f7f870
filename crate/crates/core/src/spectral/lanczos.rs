//! Lanczos iteration on the complement of the constant vector.
//!
//! The constant vector spans the kernel of every Laplacian, so it is deflated
//! explicitly: every Lanczos vector is kept orthogonal to it, and the two
//! smallest Ritz pairs approximate `(λ2, φ)` and `λ3`. Full
//! reorthogonalisation keeps the basis orthonormal to working precision.

use super::tridiag::Tridiagonal;
use crate::error::{Result, SeriationError};
use crate::matrix::{axpy, dot, norm2};

pub(crate) trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub(crate) struct RitzPairs {
    pub values: [f64; 2],
    pub vector: Vec<f64>,
    pub iterations: usize,
}

fn project_out_constant(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Two smallest eigenpairs of `op` restricted to the mean-zero subspace.
///
/// Stops once both Ritz residuals fall below `abs_tol`.
pub(crate) fn smallest_on_mean_zero(
    op: &dyn SymmetricOperator,
    abs_tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<RitzPairs> {
    let n = op.dim();
    if n < 3 {
        return Err(SeriationError::arg("Lanczos needs at least 3 vertices"));
    }
    let max_steps = max_iter.min(n - 1);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut q: Vec<f64> = (0..n)
        .map(|i| crate::rng::unit_f64(crate::rng::mix64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9))) - 0.5)
        .collect();
    project_out_constant(&mut q);
    let nrm = norm2(&q);
    q.iter_mut().for_each(|v| *v /= nrm);

    let mut w = vec![0.0; n];
    let mut last_residual = f64::INFINITY;
    for _ in 0..max_steps {
        op.apply(&q, &mut w);
        let alpha = dot(&q, &w);
        axpy(&mut w, -alpha, &q);
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            axpy(&mut w, -b, prev);
        }
        basis.push(std::mem::take(&mut q));
        alphas.push(alpha);
        // Full reorthogonalisation, twice, plus the deflated constant.
        for _ in 0..2 {
            for v in &basis {
                let s = dot(v, &w);
                axpy(&mut w, -s, v);
            }
            project_out_constant(&mut w);
        }
        let beta = norm2(&w);

        let m = alphas.len();
        let invariant = beta <= abs_tol * 1e-3;
        if m >= 2 && (m % 4 == 0 || invariant || m == max_steps) {
            let tri = Tridiagonal { diag: alphas.clone(), off: betas.clone() };
            let theta = tri.smallest(2);
            let s1 = tri.eigenvector(theta[0], &[]);
            let s2 = tri.eigenvector(theta[1], std::slice::from_ref(&s1));
            let r1 = beta * s1[m - 1].abs();
            let r2 = beta * s2[m - 1].abs();
            last_residual = r1.max(r2);
            if last_residual <= abs_tol {
                let mut phi = vec![0.0; n];
                for (coef, v) in s1.iter().zip(&basis) {
                    axpy(&mut phi, *coef, v);
                }
                project_out_constant(&mut phi);
                let nrm = norm2(&phi);
                phi.iter_mut().for_each(|v| *v /= nrm);
                return Ok(RitzPairs { values: [theta[0], theta[1]], vector: phi, iterations: m });
            }
        }
        if invariant {
            break;
        }
        q = w.iter().map(|v| v / beta).collect();
        betas.push(beta);
    }
    Err(SeriationError::NoConvergence { iterations: alphas.len(), residual: last_residual })
}

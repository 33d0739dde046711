//! Lanczos approximation of `exp(-i H dt) v` for Hermitian `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;

/// Hermitian linear operator acting on complex vectors.
pub trait HermitianOperator {
    fn dim(&self) -> usize;
    /// `out = H x`.
    fn apply(&self, x: &[C64], out: &mut [C64]);
}

impl HermitianOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        self.mul_add(x, C64::new(1.0, 0.0), out);
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Result of a single Krylov step.
#[derive(Debug, Clone)]
pub struct KrylovStep {
    pub state: Vec<C64>,
    /// A posteriori estimate of the 2-norm error of `state`.
    pub error_estimate: f64,
    pub krylov_dim: usize,
}

/// One Lanczos step of size `dt` with at most `max_dim` Krylov vectors.
pub fn expm_step<H: HermitianOperator + ?Sized>(h: &H, v: &[C64], dt: f64, max_dim: usize) -> KrylovStep {
    let n = h.dim();
    let beta0 = norm(v);
    if beta0 == 0.0 || dt == 0.0 {
        return KrylovStep { state: v.to_vec(), error_estimate: 0.0, krylov_dim: 0 };
    }
    let m_max = max_dim.max(1).min(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    basis.push(v.iter().map(|z| z / beta0).collect());
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let tail_beta;
    loop {
        let j = basis.len() - 1;
        h.apply(&basis[j], &mut w);
        let a = inner(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalisation (twice is enough)
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = norm(&w);
        if basis.len() == m_max || b <= 1e-14 * (a.abs() + beta.last().copied().unwrap_or(0.0) + 1.0) {
            tail_beta = if basis.len() == m_max { b } else { 0.0 };
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
        // early exit once the estimate is tiny
        if basis.len() >= 4 && basis.len().is_multiple_of(4) {
            let (_, err) = small_exp(&alpha, &beta, dt, b);
            if err * beta0 < 1e-15 {
                // rebuild with current dimension: drop the freshly added vector
                basis.pop();
                beta.pop();
                tail_beta = b;
                break;
            }
        }
    }
    let (coeffs, err) = small_exp(&alpha, &beta, dt, tail_beta);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (q, c) in basis.iter().zip(&coeffs) {
        let c = c * beta0;
        out.iter_mut().zip(q).for_each(|(o, qi)| *o += c * qi);
    }
    KrylovStep { state: out, error_estimate: err * beta0, krylov_dim: basis.len() }
}

/// `exp(-i T dt) e_1` for the tridiagonal `T` together with the residual
/// estimate `tail * |last component|`.
fn small_exp(alpha: &[f64], beta: &[f64], dt: f64, tail: f64) -> (Vec<C64>, f64) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut coeffs = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = C64::from_polar(1.0, -eig.eigenvalues[k] * dt) * eig.eigenvectors[(0, k)];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += eig.eigenvectors[(i, k)] * phase;
        }
    }
    let err = tail * coeffs[m - 1].norm();
    (coeffs, err)
}

/// Propagates `v` over `dt`, halving substeps until each Krylov step meets
/// `tol * (substep / dt)`. Returns the state and the accumulated error
/// estimate, or `None` when the substep would fall below `min_step`.
pub fn expm_adaptive<H: HermitianOperator + ?Sized>(
    h: &H,
    v: &[C64],
    dt: f64,
    tol: f64,
    max_dim: usize,
    min_step: f64,
) -> Option<(Vec<C64>, f64)> {
    let mut state = v.to_vec();
    let mut done = 0.0;
    let mut step = dt;
    let mut total_err = 0.0;
    while done < dt * (1.0 - 1e-15) {
        step = step.min(dt - done);
        let r = expm_step(h, &state, step, max_dim);
        let budget = tol * step / dt;
        if r.error_estimate <= budget {
            state = r.state;
            done += step;
            total_err += r.error_estimate;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < min_step {
                return None;
            }
        }
    }
    Some((state, total_err))
}

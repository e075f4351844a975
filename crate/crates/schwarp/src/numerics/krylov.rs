//! Lanczos propagator for e^{-iHt} v with H Hermitian.
//!
//! Full reorthogonalization, subspace dimension capped at 40, adaptive
//! substepping against a per-step local error target. The small projected
//! exponential is evaluated through an eigensolve of the real symmetric
//! tridiagonal matrix.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::lapack;
use crate::error::{Error, Result};

/// Anything that can act as a Hermitian operator by matrix-vector products.
pub trait HermOp {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[C64], y: &mut [C64]);
}

impl HermOp for super::sparse::CsrMat {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOpts {
    /// Maximum Lanczos subspace dimension.
    pub max_dim: usize,
    /// Per-substep local error target, relative to the state norm.
    pub tol: f64,
}

impl Default for KrylovOpts {
    fn default() -> Self {
        KrylovOpts {
            max_dim: 40,
            tol: 1e-10,
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One Lanczos pass from the (normalized) start vector: returns the basis,
/// the tridiagonal coefficients, and the norm of the residual vector that
/// would extend the basis.
struct LanczosFactorization {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    residual_beta: f64,
}

fn lanczos(h: &impl HermOp, v0: &[C64], max_dim: usize) -> LanczosFactorization {
    let n = v0.len();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_dim);
    let mut alpha = Vec::with_capacity(max_dim);
    let mut beta = Vec::with_capacity(max_dim);
    basis.push(v0.to_vec());
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut residual_beta = 0.0;
    let mut scale = 1.0f64;
    for j in 0..max_dim {
        h.apply_into(&basis[j], &mut w);
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        scale = scale.max(a.abs());
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        // full reorthogonalization
        for prev in &basis {
            let p = dot(prev, &w);
            for (wi, vi) in w.iter_mut().zip(prev) {
                *wi -= p * vi;
            }
        }
        let b_next = norm(&w);
        if j + 1 == max_dim {
            residual_beta = b_next;
            break;
        }
        if b_next <= 1e-13 * scale {
            // invariant subspace: the projected exponential is exact
            residual_beta = 0.0;
            break;
        }
        beta.push(b_next);
        scale = scale.max(b_next);
        let inv = 1.0 / b_next;
        basis.push(w.iter().map(|z| z * inv).collect());
    }
    LanczosFactorization {
        basis,
        alpha,
        beta,
        residual_beta,
    }
}

/// Coefficients of e^{-i T tau} e_1 for the tridiagonal (alpha, beta), plus
/// the magnitude of the last coefficient (drives the error estimate).
fn tridiag_exp_e1(alpha: &[f64], beta: &[f64], tau: f64) -> (Vec<C64>, f64) {
    let m = alpha.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (vals, vecs) = lapack::dsyevd(&t).expect("small tridiagonal eigensolve");
    let mut coeffs = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = C64::from_polar(1.0, -vals[k] * tau);
        let amp = vecs[(0, k)];
        for i in 0..m {
            coeffs[i] += vecs[(i, k)] * amp * phase;
        }
    }
    let tail = coeffs[m - 1].norm();
    (coeffs, tail)
}

/// Computes e^{-iHt} v by adaptively substepped Lanczos.
pub fn lanczos_expv(h: &impl HermOp, t: f64, v: &Array1<C64>, opts: KrylovOpts) -> Result<Array1<C64>> {
    let n = h.dim();
    assert_eq!(v.len(), n);
    if t == 0.0 {
        return Ok(v.clone());
    }
    let mut state: Vec<C64> = v.to_vec();
    let mut t_left = t.abs();
    let sign = t.signum();
    let mut tau = t_left;
    let min_tau = t.abs() * 1e-13;
    loop {
        let nrm = norm(&state);
        if nrm == 0.0 {
            return Ok(Array1::from(state));
        }
        let unit: Vec<C64> = state.iter().map(|z| z / nrm).collect();
        let fact = lanczos(h, &unit, opts.max_dim);
        loop {
            let step = tau.min(t_left);
            let (coeffs, tail) = tridiag_exp_e1(&fact.alpha, &fact.beta, sign * step);
            // residual-based local error estimate (Saad): the defect of the
            // subspace approximation enters through the last coefficient
            let err_est = fact.residual_beta * tail * step;
            if err_est <= opts.tol || step <= min_tau {
                if step <= min_tau && err_est > opts.tol {
                    return Err(Error::KrylovBreakdown { t_left });
                }
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (j, basis_vec) in fact.basis.iter().enumerate() {
                    let cj = coeffs[j] * nrm;
                    for (o, b) in out.iter_mut().zip(basis_vec) {
                        *o += cj * b;
                    }
                }
                state = out;
                t_left -= step;
                // grow the step cautiously after an easy accept
                if err_est < 0.1 * opts.tol {
                    tau = (step * 1.8).min(t.abs());
                } else {
                    tau = step;
                }
                break;
            }
            tau = step * 0.5;
        }
        if t_left <= t.abs() * 1e-15 {
            break;
        }
    }
    Ok(Array1::from(state))
}

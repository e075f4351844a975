//! Dense Hermitian eigendecomposition and the PSD square root.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::lapack;
use crate::error::{Error, Result};

/// Relative Hermiticity defect allowed before an eigensolve; a violation
/// signals an upstream assembly bug rather than roundoff.
pub const HERMITICITY_TOL: f64 = 1e-10;

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// max |A - A†| over all entries.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Columns are the eigenvectors, unitary up to roundoff.
    pub eigenvectors: Array2<C64>,
}

impl HermitianEig {
    /// Applies f(H) v = U f(Λ) U† v for a scalar function given by `f`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64, v: &Array1<C64>) -> Array1<C64> {
        let u = &self.eigenvectors;
        let n = u.nrows();
        let mut coeffs = Array1::<C64>::zeros(n);
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += u[(i, k)].conj() * v[i];
            }
            coeffs[k] = acc * f(self.eigenvalues[k]);
        }
        let mut out = Array1::<C64>::zeros(n);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[(i, k)] * coeffs[k];
            }
            out[i] = acc;
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix, with a precondition check that
/// the input really is Hermitian (relative defect <= 1e-10).
pub fn hermitian_eig(a: &Array2<C64>) -> Result<HermitianEig> {
    let scale = max_abs(a);
    let defect = hermiticity_defect(a);
    if defect > HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            defect,
            tol: HERMITICITY_TOL * scale,
        });
    }
    let (eigenvalues, eigenvectors) = lapack::zheevd(a)?;
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Hermitian PSD square root. Eigenvalues slightly below zero (>= -1e-10 max|S|)
/// are clamped to zero; anything below -1e-6 max|S| is rejected.
pub fn psd_sqrt(s: &Array2<C64>) -> Result<Array2<C64>> {
    let scale = max_abs(s);
    let eig = hermitian_eig(s)?;
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-6 * scale {
        return Err(Error::NotPsd { min_eig });
    }
    let n = s.nrows();
    let u = &eig.eigenvectors;
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 })
        .collect();
    let mut out = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[(i, k)] * roots[k] * u[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// C = A B for dense complex matrices.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    assert_eq!(a.ncols(), b.nrows());
    let (n, m, k) = (a.nrows(), b.ncols(), a.ncols());
    let mut out = Array2::<C64>::zeros((n, m));
    for i in 0..n {
        for l in 0..k {
            let ail = a[(i, l)];
            if ail == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += ail * b[(l, j)];
            }
        }
    }
    out
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let (n, m) = (a.nrows(), a.ncols());
    let mut out = Array2::<C64>::zeros((m, n));
    for i in 0..n {
        for j in 0..m {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

pub fn real_to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|x| C64::new(x, 0.0))
}

//! Dense and sparse linear-algebra kernels shared by the rest of the crate:
//! Hermitian eigendecomposition, unitary propagation e^{-iHt} v, RK4 for
//! general generators, the PSD matrix square root, and banded factorizations.

pub mod dense;
pub mod krylov;
pub mod lapack;
pub mod propagate;
pub mod sparse;

pub use dense::{hermitian_eig, max_abs, psd_sqrt, HermitianEig};
pub use krylov::{lanczos_expv, HermOp, KrylovOpts};
pub use propagate::{
    general_propagate, herm_propagate, herm_propagate_with, rk4_default_step, PropagateOpts,
    DENSE_EIG_LIMIT,
};
pub use sparse::CsrMat;

use ndarray::Array1;
use num_complex::Complex64 as C64;

pub fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

//! Propagators: unitary e^{-iHt} v for Hermitian H and classical RK4 for a
//! general generator dφ/dt = Lφ.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::dense::{hermitian_eig, HermitianEig};
use super::krylov::{lanczos_expv, HermOp, KrylovOpts};
use super::sparse::CsrMat;
use crate::error::{Error, Result};

/// Above this dimension the Hermitian propagator switches from a dense
/// eigensolve to the Lanczos path.
pub const DENSE_EIG_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy)]
pub struct PropagateOpts {
    pub dense_limit: usize,
    pub krylov: KrylovOpts,
}

impl Default for PropagateOpts {
    fn default() -> Self {
        PropagateOpts {
            dense_limit: DENSE_EIG_LIMIT,
            krylov: KrylovOpts::default(),
        }
    }
}

fn check_hermitian(h: &CsrMat) -> Result<()> {
    let scale = h.max_abs();
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            defect,
            tol: 1e-10 * scale,
        });
    }
    Ok(())
}

/// e^{-iHt} v, dense eigendecomposition path.
pub fn herm_propagate_dense(h: &CsrMat, t: f64, v: &Array1<C64>) -> Result<Array1<C64>> {
    check_hermitian(h)?;
    let eig = hermitian_eig(&h.to_dense())?;
    Ok(eig.apply_function(|l| C64::from_polar(1.0, -l * t), v))
}

/// e^{-iHt} v, Lanczos path.
pub fn herm_propagate_krylov(
    h: &CsrMat,
    t: f64,
    v: &Array1<C64>,
    opts: KrylovOpts,
) -> Result<Array1<C64>> {
    check_hermitian(h)?;
    lanczos_expv(h, t, v, opts)
}

/// e^{-iHt} v. Dense eigendecomposition for n <= 2048, Lanczos above.
pub fn herm_propagate(h: &CsrMat, t: f64, v: &Array1<C64>) -> Result<Array1<C64>> {
    herm_propagate_with(h, t, v, PropagateOpts::default())
}

pub fn herm_propagate_with(
    h: &CsrMat,
    t: f64,
    v: &Array1<C64>,
    opts: PropagateOpts,
) -> Result<Array1<C64>> {
    if h.nrows() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, state has length {}",
            h.nrows(),
            h.ncols(),
            v.len()
        )));
    }
    if h.nrows() <= opts.dense_limit {
        herm_propagate_dense(h, t, v)
    } else {
        herm_propagate_krylov(h, t, v, opts.krylov)
    }
}

/// A reusable Hermitian propagator: the dense variant caches the
/// eigendecomposition so repeated time advances cost O(n^2).
pub enum HermPropagator<'a, O: HermOp> {
    Dense(HermitianEig),
    Krylov { op: &'a O, opts: KrylovOpts },
}

impl<'a, O: HermOp> HermPropagator<'a, O> {
    pub fn advance(&self, v: &Array1<C64>, dt: f64) -> Result<Array1<C64>> {
        match self {
            HermPropagator::Dense(eig) => {
                Ok(eig.apply_function(|l| C64::from_polar(1.0, -l * dt), v))
            }
            HermPropagator::Krylov { op, opts } => lanczos_expv(*op, dt, v, *opts),
        }
    }
}

/// Default RK4 step: safely inside the stability region for dissipative
/// spectra scaled by the induced 1-norm.
pub fn rk4_default_step(l: &CsrMat) -> f64 {
    let nrm = l.max_col_abs_sum();
    if nrm == 0.0 {
        f64::INFINITY
    } else {
        0.5 / nrm
    }
}

/// Classical RK4 integration of dφ/dt = Lφ from 0 to t with step dt
/// (rounded down so the steps tile [0, t] uniformly).
///
/// Fails with `UnstableStep` if the state norm grows by more than 10x within
/// one step, and with `StepTooLarge` if dt violates the stability heuristic
/// dt * ||L||_1 <= 1.
pub fn general_propagate(l: &CsrMat, t: f64, v: &Array1<C64>, dt: f64) -> Result<Array1<C64>> {
    general_propagate_cb(l, t, v, dt, |_, _| Ok(()))
}

/// RK4 with a per-step callback `(step_index, state)` used by monitored runs.
pub fn general_propagate_cb(
    l: &CsrMat,
    t: f64,
    v: &Array1<C64>,
    dt: f64,
    mut callback: impl FnMut(usize, &[C64]) -> Result<()>,
) -> Result<Array1<C64>> {
    if l.nrows() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "L is {}x{}, state has length {}",
            l.nrows(),
            l.ncols(),
            v.len()
        )));
    }
    if dt <= 0.0 {
        return Err(Error::StepTooLarge { dt, max_dt: 0.0 });
    }
    let nrm = l.max_col_abs_sum();
    if dt.is_finite() && nrm * dt > 1.0 + 1e-12 {
        return Err(Error::StepTooLarge {
            dt,
            max_dt: 1.0 / nrm,
        });
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let n_steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / n_steps as f64;
    let n = v.len();
    let mut state: Vec<C64> = v.to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = vec![C64::new(0.0, 0.0); n];
    let mut k3 = vec![C64::new(0.0, 0.0); n];
    let mut k4 = vec![C64::new(0.0, 0.0); n];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut prev_norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for step in 0..n_steps {
        l.matvec_into(&state, &mut k1);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        l.matvec_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        l.matvec_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = state[i] + h * k3[i];
        }
        l.matvec_into(&tmp, &mut k4);
        for i in 0..n {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let cur_norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if prev_norm > 0.0 && cur_norm > 10.0 * prev_norm {
            return Err(Error::UnstableStep {
                factor: cur_norm / prev_norm,
            });
        }
        prev_norm = cur_norm;
        callback(step, &state)?;
    }
    Ok(Array1::from(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dense::{adjoint, matmul};
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        }
    }

    fn random_hermitian(n: usize, seed: u64) -> CsrMat {
        let mut next = lcg(seed);
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = c(next(), next());
            }
        }
        let h = (&a + &adjoint(&a)).mapv(|z| z * 0.5);
        CsrMat::from_dense(&h, 0.0)
    }

    /// Independent dense expm oracle: Padé(6) scaling and squaring.
    pub fn expm_oracle(a: &Array2<C64>) -> Array2<C64> {
        let n = a.nrows();
        let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
        let s = norm.log2().ceil().max(0.0) as u32;
        let scale = 1.0 / (2f64).powi(s as i32);
        let b = a.mapv(|z| z * scale);
        // Padé(6): N = sum c_k B^k, D = sum (-1)^k c_k B^k
        let mut c_coef = vec![1.0f64];
        for k in 1..=6usize {
            let prev = c_coef[k - 1];
            c_coef.push(prev * ((6 - k + 1) as f64) / ((13 - k) as f64 * k as f64));
        }
        let eye = Array2::<C64>::eye(n);
        let mut pow = eye.clone();
        let mut num = eye.mapv(|z| z * c_coef[0]);
        let mut den = eye.mapv(|z| z * c_coef[0]);
        for (k, &ck) in c_coef.iter().enumerate().skip(1) {
            pow = matmul(&pow, &b);
            num = &num + &pow.mapv(|z| z * ck);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            den = &den + &pow.mapv(|z| z * ck * sign);
        }
        let den_inv = crate::numerics::lapack::zinvert(&den).unwrap();
        let mut r = matmul(&den_inv, &num);
        for _ in 0..s {
            r = matmul(&r, &r);
        }
        r
    }

    #[test]
    fn herm_zero_and_diag() {
        let h = CsrMat::zeros(3, 3);
        let v = Array1::from(vec![c(1.0, -1.0), c(2.0, 0.0), c(0.0, 3.0)]);
        let out = herm_propagate(&h, 2.5, &v).unwrap();
        for (a, b) in out.iter().zip(v.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        let h = CsrMat::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let v = Array1::from(vec![c(1.0, 0.0), c(0.5, 0.5)]);
        let out = herm_propagate(&h, std::f64::consts::PI, &v).unwrap();
        assert!((out[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((out[1] - c(-0.5, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn herm_matches_rk4_oracle() {
        // random 8x8 Hermitian, t = 0.7: herm_propagate vs RK4 at dt = 1e-4
        let h = random_hermitian(8, 4242);
        let l = h.scale(c(0.0, -1.0)); // L = -iH
        let mut next = lcg(7);
        let v = Array1::from((0..8).map(|_| c(next(), next())).collect::<Vec<_>>());
        let spectral = herm_propagate(&h, 0.7, &v).unwrap();
        let rk4 = general_propagate(&l, 0.7, &v, 1e-4).unwrap();
        let num: f64 = spectral
            .iter()
            .zip(rk4.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = spectral.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-8, "relative deviation {}", num / den);
    }

    #[test]
    fn norm_preservation_many_instances() {
        // 2-norm preserved to 1e-10 relative across random Hermitian inputs
        for (k, &t) in [0.1, 1.0, 10.0].iter().enumerate() {
            for seed in 0..50u64 {
                let n = 3 + (seed % 6) as usize;
                let h = random_hermitian(n, 1000 + seed * 7 + k as u64);
                let mut next = lcg(seed + 5);
                let v = Array1::from((0..n).map(|_| c(next(), next())).collect::<Vec<_>>());
                let n0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let out = herm_propagate(&h, t, &v).unwrap();
                let n1 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(((n1 - n0) / n0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_and_krylov_paths_agree() {
        for n in [16usize, 48, 96] {
            let h = random_hermitian(n, 31 + n as u64);
            let mut next = lcg(77);
            let v = Array1::from((0..n).map(|_| c(next(), next())).collect::<Vec<_>>());
            let a = herm_propagate_dense(&h, 1.3, &v).unwrap();
            let b = herm_propagate_krylov(&h, 1.3, &v, KrylovOpts::default()).unwrap();
            let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(num / den < 1e-8, "n={n}: deviation {}", num / den);
        }
    }

    #[test]
    fn rk4_scalar_decay() {
        let l = CsrMat::diag(&[c(-2.0, 0.0)]);
        let v = Array1::from(vec![c(1.0, 0.0)]);
        let out = general_propagate(&l, 1.0, &v, 1e-3).unwrap();
        assert!((out[0].re - (-2.0f64).exp()).abs() < 1e-9);
        assert!(out[0].im.abs() < 1e-15);
    }

    #[test]
    fn rk4_zero_generator() {
        let l = CsrMat::zeros(4, 4);
        let v = Array1::from(vec![c(1.0, 2.0), c(0.0, 0.0), c(-1.0, 0.0), c(3.0, -1.0)]);
        let out = general_propagate(&l, 5.0, &v, rk4_default_step(&l).min(1.0)).unwrap();
        for (a, b) in out.iter().zip(v.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn rk4_matches_expm_oracle() {
        // random stable 8x8 generator vs independent Padé scaling-and-squaring
        let mut next = lcg(2024);
        let n = 8;
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = c(next(), next());
            }
        }
        // make it stable: shift the diagonal well into the left half plane
        for i in 0..n {
            a[(i, i)] = c(-3.0 + 0.2 * i as f64, next());
        }
        let l = CsrMat::from_dense(&a, 0.0);
        let v = Array1::from((0..n).map(|_| c(next(), next())).collect::<Vec<_>>());
        let t = 0.9;
        let rk4 = general_propagate(&l, t, &v, 2e-4).unwrap();
        let e = expm_oracle(&a.mapv(|z| z * t));
        let mut want = Array1::<C64>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                want[i] += e[(i, j)] * v[j];
            }
        }
        let num: f64 = rk4.iter().zip(want.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-8, "relative deviation {}", num / den);
    }

    #[test]
    fn rk4_rejects_oversized_step() {
        let l = CsrMat::diag(&[c(-100.0, 0.0)]);
        let v = Array1::from(vec![c(1.0, 0.0)]);
        assert!(matches!(
            general_propagate(&l, 1.0, &v, 0.5),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn rk4_flags_blowup() {
        // rank-one generator with a dense row: column sums stay at 1 so the
        // step heuristic admits dt = 1, but one step amplifies the state far
        // beyond the 10x guard
        let n = 256;
        let mut trips = Vec::with_capacity(n);
        for j in 0..n {
            trips.push((0, j, c(1.0, 0.0)));
        }
        let l = CsrMat::from_triplets(n, n, trips);
        let v = Array1::from(vec![c(1.0 / (n as f64).sqrt(), 0.0); n]);
        let r = general_propagate(&l, 2.0, &v, 1.0);
        assert!(matches!(r, Err(Error::UnstableStep { .. })));
    }
}

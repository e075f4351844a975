//! Complexity and error analytics: max-norms and sparsity of the lifted
//! Hamiltonian H = H0 ⊗ I - H1 ⊗ Dμ, the query-complexity estimate for
//! sparse Hamiltonian simulation, per-boundary-treatment analytic bounds,
//! effective sparsity, and error metrics between solutions.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{AbcKind, HermitianPair};
use crate::numerics::sparse::{merged_row, CsrMat};
use crate::schrodingerization::PGrid;

/// Entries below this fraction of the max norm do not count toward sparsity.
const SPARSITY_DROP: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// max_{ij} |H_ij| of the lifted Hamiltonian.
    pub h_max: f64,
    /// Time-integrated max norm; T * h_max for time-independent H.
    pub h_max1: f64,
    /// Max nonzeros per row.
    pub sparsity: usize,
    /// Effective sparsity at the one-percent cut.
    pub s_eff_1pct: usize,
    /// Effective sparsity at the two-percent cut.
    pub s_eff_2pct: usize,
    /// Query-complexity estimate (dimensionless, constants dropped).
    pub query_estimate: f64,
    /// The per-treatment analytic bound with unit constants.
    pub analytic_bound: f64,
}

/// (h_max, h_max1, sparsity) of an explicitly stored matrix.
pub fn matrix_norms(m: &CsrMat, t_final: f64) -> (f64, f64, usize) {
    let h_max = m.max_abs();
    let sparsity = m.max_row_count_above(SPARSITY_DROP * h_max);
    (h_max, t_final * h_max, sparsity)
}

/// Walks the union pattern of (H0, H1) row by row, handing each entry pair
/// to the visitor once per Fourier mode extreme. Entries of the lifted
/// Hamiltonian are H0_ij - μ_l H1_ij, linear in μ, so per-entry extrema sit
/// at the extreme modes.
fn lifted_entry_max(h0: &CsrMat, h1: &CsrMat, mu_lo: f64, mu_hi: f64) -> f64 {
    let mut h_max = 0.0f64;
    for r in 0..h0.nrows() {
        for (_c, a, b) in merged_row(h0, h1, r) {
            let lo = (a - mu_lo * b).norm();
            let hi = (a - mu_hi * b).norm();
            h_max = h_max.max(lo).max(hi);
        }
    }
    h_max
}

/// (h_max, h_max1, sparsity) of the lifted Hamiltonian H = H0 ⊗ I - H1 ⊗ Dμ
/// computed without materializing it: the (i, l) row has entries
/// H0_ij - μ_l H1_ij over the union pattern of row i.
pub fn schrodingerized_norms(pair: &HermitianPair, pg: &PGrid, t_final: f64) -> (f64, f64, usize) {
    let modes = pg.modes();
    let (mu_lo, mu_hi) = (modes[0], modes[modes.len() - 1]);
    let h_max = lifted_entry_max(&pair.h0, &pair.h1, mu_lo, mu_hi);
    let threshold = SPARSITY_DROP * h_max;
    let mut sparsity = 0usize;
    for r in 0..pair.h0.nrows() {
        let entries: Vec<(C64, C64)> = merged_row(&pair.h0, &pair.h1, r)
            .map(|(_, a, b)| (a, b))
            .collect();
        for &mu in &modes {
            let count = entries
                .iter()
                .filter(|(a, b)| (a - mu * b).norm() > threshold)
                .count();
            sparsity = sparsity.max(count);
        }
    }
    (h_max, t_final * h_max, sparsity)
}

/// Effective sparsity of the lifted Hamiltonian at a relative cut.
pub fn schrodingerized_effective_sparsity(pair: &HermitianPair, pg: &PGrid, cut: f64) -> usize {
    assert!(cut > 0.0 && cut < 1.0);
    let modes = pg.modes();
    let (mu_lo, mu_hi) = (modes[0], modes[modes.len() - 1]);
    let h_max = lifted_entry_max(&pair.h0, &pair.h1, mu_lo, mu_hi);
    let threshold = cut * h_max;
    let mut s_eff = 0usize;
    for r in 0..pair.h0.nrows() {
        let entries: Vec<(C64, C64)> = merged_row(&pair.h0, &pair.h1, r)
            .map(|(_, a, b)| (a, b))
            .collect();
        for &mu in &modes {
            let count = entries
                .iter()
                .filter(|(a, b)| (a - mu * b).norm() > threshold)
                .count();
            s_eff = s_eff.max(count);
        }
    }
    s_eff
}

/// Query count for simulating an s-sparse Hamiltonian to error eps:
/// s ||H||_max,1 log(s ||H||_max,1 / eps) / loglog(||H||_max,1 / eps),
/// natural logarithms, order-of-magnitude constants dropped.
pub fn query_complexity(sparsity: usize, h_max1: f64, eps: f64) -> Result<f64> {
    if !(h_max1 > 0.0 && eps > 0.0) || (h_max1 / eps).ln() <= 1.0 {
        return Err(Error::DegenerateLog);
    }
    let s = sparsity as f64;
    let inner = (h_max1 / eps).ln().ln();
    Ok(s * h_max1 * (s * h_max1 / eps).ln() / inner)
}

/// Inputs for the analytic complexity bounds (unit constants).
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundInputs {
    pub t_final: f64,
    pub dx: f64,
    /// Time-integrated max norm of the potential (T * ||V||_max when V is
    /// time-independent).
    pub v_max1: f64,
    /// Max absorbing-potential magnitude (CAP).
    pub w_max: f64,
    /// Max layer-profile magnitude (PML).
    pub sigma_max: f64,
    /// Effective sparsity of the boundary self-energy (DtN).
    pub s_sigma: f64,
}

/// The per-treatment query-complexity bound:
/// CAP: T/Δx² + ||V||_max,1 + T ||W||_max / Δx²
/// PML: T/Δx² + ||V||_max,1 + T ||σ||_max / Δx³
/// DtN: s_Σ (T/Δx² + ||V||_max,1)
pub fn table_bound(kind: AbcKind, p: &BoundInputs) -> f64 {
    let dx2 = p.dx * p.dx;
    match kind {
        AbcKind::Cap => p.t_final / dx2 + p.v_max1 + p.t_final * p.w_max / dx2,
        AbcKind::Pml => p.t_final / dx2 + p.v_max1 + p.t_final * p.sigma_max / (dx2 * p.dx),
        AbcKind::Dtn0 | AbcKind::Dtn1 => p.s_sigma * (p.t_final / dx2 + p.v_max1),
    }
}

/// Max-over-rows count of entries with |M_ij| > cut * max|M|.
pub fn effective_sparsity(m: &Array2<C64>, cut: f64) -> usize {
    assert!(cut > 0.0 && cut < 1.0);
    let h_max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = cut * h_max;
    (0..m.nrows())
        .map(|r| (0..m.ncols()).filter(|&c| m[(r, c)].norm() > threshold).count())
        .max()
        .unwrap_or(0)
}

/// Index pairs of the entries surviving the cut (for band-structure checks
/// and external plotting).
pub fn effective_sparsity_mask(m: &Array2<C64>, cut: f64) -> Vec<(usize, usize)> {
    assert!(cut > 0.0 && cut < 1.0);
    let h_max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = cut * h_max;
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)].norm() > threshold {
                out.push((r, c));
            }
        }
    }
    out
}

/// Fraction of mask entries within the given bandwidth of the diagonal,
/// counting the periodic wrap-around of a ring-ordered index set.
pub fn band_concentration(mask: &[(usize, usize)], n: usize, bandwidth: usize) -> f64 {
    if mask.is_empty() {
        return 1.0;
    }
    let within = mask
        .iter()
        .filter(|&&(r, c)| {
            let d = r.abs_diff(c);
            d.min(n - d) <= bandwidth
        })
        .count();
    within as f64 / mask.len() as f64
}

/// (relative l2 error, max absolute difference) of `a` against reference `b`.
pub fn rel_error(a: &Array1<C64>, b: &Array1<C64>) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let den: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let max_abs = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok((num / den, max_abs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::fd_second;
    use crate::schrodingerization::build_pgrid;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norms_of_stencil() {
        let dxx = fd_second(5, 1.0);
        let (h_max, h_max1, s) = matrix_norms(&dxx, 2.0);
        assert_eq!(h_max, 2.0);
        assert_eq!(h_max1, 4.0);
        assert_eq!(s, 3);
    }

    #[test]
    fn norms_of_zero_matrix() {
        let z = CsrMat::zeros(4, 4);
        let (h_max, h_max1, s) = matrix_norms(&z, 1.0);
        assert_eq!((h_max, h_max1, s), (0.0, 0.0, 0));
    }

    #[test]
    fn lifted_norms_match_brute_force() {
        // small CAP-like pair at N=8, M=8: compare against the explicitly
        // materialized H0 ⊗ I - H1 ⊗ Dμ
        let g = crate::discretization::Grid2D::square(-3.0, 3.0, 8).unwrap();
        let v = g.sample_real(crate::discretization::disc_sine_potential);
        let w = crate::abc::cap::cap_potential(&Default::default(), &g).unwrap();
        let (_, pair) = crate::abc::cap::build_cap_generator(&g, &v, &w).unwrap();
        let pg = build_pgrid(-5.0, 5.0, 8).unwrap();

        let (h_max, h_max1, sparsity) = schrodingerized_norms(&pair, &pg, 0.9);

        // brute force
        let m = pg.m;
        let modes = pg.modes();
        let eye = CsrMat::identity(m);
        let dmu = CsrMat::diag(&modes.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let big = CsrMat::combine(
            &CsrMat::kron(&pair.h0, &eye),
            c(1.0, 0.0),
            &CsrMat::kron(&pair.h1, &dmu),
            c(-1.0, 0.0),
        );
        let (bh_max, bh_max1, bsparsity) = matrix_norms(&big, 0.9);
        assert!((h_max - bh_max).abs() <= 1e-12 * bh_max);
        assert!((h_max1 - bh_max1).abs() <= 1e-12 * bh_max1);
        assert_eq!(sparsity, bsparsity);
        // five-point row plus diagonal lift keeps sparsity at most 6
        assert!(sparsity <= 6);

        // effective sparsity agrees with the explicit matrix too
        for cut in [0.01, 0.02] {
            let fast = schrodingerized_effective_sparsity(&pair, &pg, cut);
            let dense = big.to_dense();
            let slow = effective_sparsity(&dense, cut);
            assert_eq!(fast, slow, "cut {cut}");
        }
    }

    #[test]
    fn query_formula_frozen_instances() {
        // 500 ln(5e5)/ln(ln(1e5)) = 2685.1898...
        let got = query_complexity(5, 100.0, 1e-3).unwrap();
        assert!((got - 2685.1898031315933).abs() < 1e-9);
        // s = 1, h = e^3, eps = 1: 54.84793...
        let got = query_complexity(1, (3.0f64).exp(), 1.0).unwrap();
        assert!((got - 54.84793078604139).abs() < 1e-10);
    }

    #[test]
    fn query_formula_monotonicity_and_doubling() {
        let base = query_complexity(5, 100.0, 1e-3).unwrap();
        let doubled = query_complexity(10, 100.0, 1e-3).unwrap();
        let ratio = doubled / base;
        assert!(ratio >= 2.0 && ratio <= 2.2, "ratio {ratio}");
        assert!(query_complexity(5, 200.0, 1e-3).unwrap() > base);
        assert!(query_complexity(5, 100.0, 1e-4).unwrap() > base);
    }

    #[test]
    fn query_formula_degenerate_rejected() {
        assert!(matches!(
            query_complexity(1, 1.0, 1.0),
            Err(Error::DegenerateLog)
        ));
        assert!(matches!(
            query_complexity(1, 2.0, 1.0),
            Err(Error::DegenerateLog)
        ));
    }

    #[test]
    fn table_bound_values() {
        // kinetic-only CAP bound
        let p = BoundInputs {
            t_final: 0.9,
            dx: 0.1,
            ..Default::default()
        };
        assert!((table_bound(AbcKind::Cap, &p) - 90.0).abs() < 1e-10);
        // frozen instance: T = 0.9, dx = 6/65, w_max = 6.4, v_max1 = 0.9
        let p = BoundInputs {
            t_final: 0.9,
            dx: 6.0 / 65.0,
            v_max1: 0.9,
            w_max: 6.4,
            ..Default::default()
        };
        assert!((table_bound(AbcKind::Cap, &p) - 782.525).abs() < 1e-9);
        // PML exceeds CAP at equal parameters when sigma_max/dx > w_max
        let p = BoundInputs {
            t_final: 1.0,
            dx: 0.1,
            v_max1: 0.5,
            w_max: 3.0,
            sigma_max: 3.0,
            s_sigma: 2.0,
        };
        assert!(table_bound(AbcKind::Pml, &p) > table_bound(AbcKind::Cap, &p));
        let dtn = table_bound(AbcKind::Dtn1, &p);
        assert!((dtn - 2.0 * (100.0 + 0.5)).abs() < 1e-10);
    }

    #[test]
    fn effective_sparsity_basics() {
        let eye = Array2::<C64>::eye(5);
        assert_eq!(effective_sparsity(&eye, 0.01), 1);
        let ones = Array2::<C64>::from_elem((4, 4), c(1.0, 0.0));
        assert_eq!(effective_sparsity(&ones, 0.5), 4);
        let mask = effective_sparsity_mask(&eye, 0.01);
        assert_eq!(mask.len(), 5);
        assert!(band_concentration(&mask, 5, 0) == 1.0);
    }

    #[test]
    fn band_concentration_wraps() {
        // ring-adjacent corner entry (0, n-1) counts as bandwidth 1
        let mask = vec![(0usize, 4usize), (2, 2)];
        assert_eq!(band_concentration(&mask, 5, 1), 1.0);
        assert_eq!(band_concentration(&mask, 5, 0), 0.5);
    }

    #[test]
    fn rel_error_basics() {
        let a = Array1::from(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let (e, m) = rel_error(&a, &a).unwrap();
        assert_eq!((e, m), (0.0, 0.0));
        let b = a.mapv(|z| z * 1.1);
        let (e, m) = rel_error(&b, &a).unwrap();
        assert!((e - 0.1).abs() < 1e-12);
        assert!((m - 0.2).abs() < 1e-12);
        let z = Array1::from(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(rel_error(&a, &z), Err(Error::ZeroReference)));
    }

    #[test]
    fn cap_h_max_bound_with_explicit_constants() {
        // h_max <= 2/dx² + ||V||max + ||ReW||max + ||ImW||max * π/Δp
        for n in [8usize, 16] {
            let g = crate::discretization::Grid2D::square(-3.0, 3.0, n).unwrap();
            let v = g.sample_real(crate::discretization::disc_sine_potential);
            let w = crate::abc::cap::cap_potential(&Default::default(), &g).unwrap();
            let (_, pair) = crate::abc::cap::build_cap_generator(&g, &v, &w).unwrap();
            let pg = build_pgrid(-5.0, 5.0, 16).unwrap();
            let (h_max, _, _) = schrodingerized_norms(&pair, &pg, 1.0);
            let v_max = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let w_im_max = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            let bound = 2.0 / (g.dx * g.dx) + v_max + w_im_max * pg.mu_abs_max();
            assert!(
                h_max <= bound * (1.0 + 1e-12),
                "n={n}: {h_max} vs {bound}"
            );
        }
    }
}

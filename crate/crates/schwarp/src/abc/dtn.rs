//! Dirichlet-to-Neumann boundary treatment.
//!
//! The semi-discrete Hamiltonian over a large domain D is partitioned into
//! interior (Ω_I) and exterior (Ω_II) blocks. The frequency-domain boundary
//! kernel K(s) = -H_{Γ,II} (H_{II,II} - i s I)^{-1} H_{II,Γ} is interpolated
//! at a single point s0: order 0 adds the constant kernel R = K(s0) as a
//! boundary potential; order 1 keeps one auxiliary variable per boundary node
//! and, after a change of variables by S^{1/2} = (H_{Γ,II} H_{II,Γ})^{1/2},
//! takes the self-energy form with blocks Σ_{I,Γ} = Eᵀ S^{1/2} and
//! Σ_{Γ,Γ} = s0 I + i S^{1/2} R^{-1} S^{1/2}.
//!
//! R is computed by exterior truncation with a zero far field: one banded LU
//! factorization of (H_{II,II} - i s0 I), reused across all |Γ| right-hand
//! sides. G0 and G1 are computed through the independent real resolvent
//! (H_{II,II}^2 + s0^2 I)^{-1} so that the identity R = -G0 - i s0 G1 stays a
//! genuine cross-check between two factorizations.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::discretization::{hamiltonian_with_potential, Grid2D};
use crate::error::{Error, Result};
use crate::generator::{hermitian_split, AbcKind, Generator, GeneratorLabel, HermitianPair};
use crate::numerics::dense::{matmul, psd_sqrt, real_to_complex};
use crate::numerics::lapack::{zinvert, BandChol, BandLu};
use crate::numerics::sparse::CsrMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnOrder {
    Zero,
    One,
}

/// Grid bookkeeping for partitions built from geometry.
#[derive(Debug, Clone)]
pub struct PartitionGeometry {
    pub grid: Grid2D,
    /// Flattened D-grid indices of the interior nodes, natural order.
    pub interior: Vec<usize>,
    /// Flattened D-grid indices of the exterior nodes, natural order.
    pub exterior: Vec<usize>,
    /// Positions of the interior nodes, aligned with `interior`.
    pub interior_positions: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Partition {
    /// Interior block H_{I,I} (kinetic + potential on Ω_I).
    pub h_ii: CsrMat,
    /// Exterior block H_{II,II} (kinetic only; V is zero there).
    pub h_ext: CsrMat,
    /// Positions within the interior ordering of the boundary ring Γ,
    /// ordered along the ring.
    pub gamma: Vec<usize>,
    /// Rows of H_{Γ,II}, aligned with `gamma`; pairs are (exterior position,
    /// coupling value). H is real symmetric so H_{II,Γ} is the transpose.
    pub gamma_ext: Vec<Vec<(usize, f64)>>,
    pub geometry: Option<PartitionGeometry>,
}

impl Partition {
    pub fn n_interior(&self) -> usize {
        self.h_ii.nrows()
    }

    pub fn n_exterior(&self) -> usize {
        self.h_ext.nrows()
    }

    pub fn n_gamma(&self) -> usize {
        self.gamma.len()
    }

    /// Hand-built partition for tests and toy instances.
    pub fn from_parts(
        h_ii: CsrMat,
        h_ext: CsrMat,
        gamma: Vec<usize>,
        gamma_ext: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        assert_eq!(gamma.len(), gamma_ext.len());
        Partition {
            h_ii,
            h_ext,
            gamma,
            gamma_ext,
            geometry: None,
        }
    }

    /// Dense H_{Γ,II} (|Γ| x n_II), mostly for tests.
    pub fn gamma_ext_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_gamma(), self.n_exterior()));
        for (r, row) in self.gamma_ext.iter().enumerate() {
            for &(e, v) in row {
                out[(r, e)] = v;
            }
        }
        out
    }
}

/// Axis-aligned box used to carve Ω out of D.
#[derive(Debug, Clone, Copy)]
pub struct BoxBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoxBounds {
    pub fn square(lo: f64, hi: f64) -> Self {
        BoxBounds {
            x_min: lo,
            x_max: hi,
            y_min: lo,
            y_max: hi,
        }
    }

    fn contains(&self, x: f64, y: f64, eps: f64) -> bool {
        x >= self.x_min - eps && x <= self.x_max + eps && y >= self.y_min - eps && y <= self.y_max + eps
    }
}

/// Splits the semi-discrete Hamiltonian on the D-grid into interior/exterior
/// blocks with Γ the interior ring coupled to the exterior. The potential is
/// zeroed on Ω_II (warning when that discards anything), matching the
/// truncation that computes R with a zero far field.
pub fn partition(grid_d: &Grid2D, omega: &BoxBounds, v: &[f64]) -> Result<Partition> {
    if v.len() != grid_d.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} nodes, V has {}",
            grid_d.len(),
            v.len()
        )));
    }
    if omega.x_min <= grid_d.x_min
        || omega.x_max >= grid_d.x_max
        || omega.y_min <= grid_d.y_min
        || omega.y_max >= grid_d.y_max
    {
        return Err(Error::OmegaNotInsideD);
    }
    let eps = 1e-9 * grid_d.dx;
    let n = grid_d.len();
    let mut is_interior = vec![false; n];
    for j in 0..grid_d.ny {
        for i in 0..grid_d.nx {
            is_interior[grid_d.index(i, j)] = omega.contains(grid_d.x(i), grid_d.y(j), eps);
        }
    }
    let interior: Vec<usize> = (0..n).filter(|&k| is_interior[k]).collect();
    let exterior: Vec<usize> = (0..n).filter(|&k| !is_interior[k]).collect();
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if exterior.is_empty() {
        return Err(Error::EmptyExterior);
    }
    let mut interior_pos = vec![usize::MAX; n];
    for (p, &k) in interior.iter().enumerate() {
        interior_pos[k] = p;
    }
    let mut exterior_pos = vec![usize::MAX; n];
    for (p, &k) in exterior.iter().enumerate() {
        exterior_pos[k] = p;
    }

    // V lives on the interior only
    let mut v_eff = v.to_vec();
    let mut clipped = 0.0f64;
    for &k in &exterior {
        clipped = clipped.max(v_eff[k].abs());
        v_eff[k] = 0.0;
    }
    if clipped > 0.0 {
        log::warn!("potential is nonzero outside omega (max {clipped:.3e}); zeroed for the exterior block");
    }
    let h_full = hamiltonian_with_potential(grid_d, &v_eff);

    let mut ii_trips = Vec::new();
    let mut ext_trips = Vec::new();
    let mut coupling: Vec<Vec<(usize, f64)>> = vec![Vec::new(); interior.len()];
    for r in 0..n {
        if is_interior[r] {
            let pr = interior_pos[r];
            for (c, val) in h_full.row(r) {
                if is_interior[c] {
                    ii_trips.push((pr, interior_pos[c], val));
                } else {
                    coupling[pr].push((exterior_pos[c], val.re));
                }
            }
        } else {
            let pr = exterior_pos[r];
            for (c, val) in h_full.row(r) {
                if !is_interior[c] {
                    ext_trips.push((pr, exterior_pos[c], val));
                }
            }
        }
    }
    let h_ii = CsrMat::from_triplets(interior.len(), interior.len(), ii_trips);
    let h_ext = CsrMat::from_triplets(exterior.len(), exterior.len(), ext_trips);

    // Γ: interior nodes with an exterior coupling, ordered along the ring by
    // polar angle so that spatial neighbours stay adjacent in index space
    let mut gamma_unordered: Vec<usize> = coupling
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(p, _)| p)
        .collect();
    let positions: Vec<(f64, f64)> = interior
        .iter()
        .map(|&k| {
            let i = k % grid_d.nx;
            let j = k / grid_d.nx;
            (grid_d.x(i), grid_d.y(j))
        })
        .collect();
    let (cx, cy) = {
        let m = gamma_unordered.len() as f64;
        let sx: f64 = gamma_unordered.iter().map(|&p| positions[p].0).sum();
        let sy: f64 = gamma_unordered.iter().map(|&p| positions[p].1).sum();
        (sx / m, sy / m)
    };
    gamma_unordered.sort_by(|&a, &b| {
        let ta = (positions[a].1 - cy).atan2(positions[a].0 - cx);
        let tb = (positions[b].1 - cy).atan2(positions[b].0 - cx);
        ta.partial_cmp(&tb)
            .unwrap()
            .then_with(|| positions[a].partial_cmp(&positions[b]).unwrap())
    });
    let gamma = gamma_unordered;
    let gamma_ext: Vec<Vec<(usize, f64)>> =
        gamma.iter().map(|&p| std::mem::take(&mut coupling[p])).collect();

    Ok(Partition {
        h_ii,
        h_ext,
        gamma,
        gamma_ext,
        geometry: Some(PartitionGeometry {
            grid: *grid_d,
            interior,
            exterior,
            interior_positions: positions,
        }),
    })
}

fn bandwidth(m: &CsrMat) -> usize {
    let mut bw = 0usize;
    for r in 0..m.nrows() {
        for (c, _) in m.row(r) {
            bw = bw.max(r.abs_diff(c));
        }
    }
    bw
}

/// R = K(s0) = -H_{Γ,II} (H_{II,II} - i s0 I)^{-1} H_{II,Γ} by one banded
/// complex LU factorization applied to the |Γ| coupling columns.
pub fn dtn_r(p: &Partition, s0: f64) -> Result<Array2<C64>> {
    if s0 == 0.0 {
        return Err(Error::SingularShift);
    }
    let n_ext = p.n_exterior();
    let ng = p.n_gamma();
    let bw = bandwidth(&p.h_ext);
    let shift = C64::new(0.0, -s0);
    let lu = BandLu::factor(n_ext, bw, bw, |i, j| {
        let mut v = p.h_ext.get(i, j);
        if i == j {
            v += shift;
        }
        v
    })?;
    let mut r = Array2::<C64>::zeros((ng, ng));
    let mut rhs = vec![C64::new(0.0, 0.0); n_ext];
    for b in 0..ng {
        rhs.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for &(e, val) in &p.gamma_ext[b] {
            rhs[e] = C64::new(val, 0.0);
        }
        lu.solve(&mut rhs)?;
        for a in 0..ng {
            let mut acc = C64::new(0.0, 0.0);
            for &(e, val) in &p.gamma_ext[a] {
                acc += val * rhs[e];
            }
            r[(a, b)] = -acc;
        }
    }
    Ok(r)
}

/// G0 = H_{Γ,II} (H²+s0²)^{-1} H_{II,II} H_{II,Γ} and
/// G1 = H_{Γ,II} (H²+s0²)^{-1} H_{II,Γ} through a banded real Cholesky
/// factorization of the (SPD) squared resolvent.
pub fn dtn_g(p: &Partition, s0: f64) -> Result<(Array2<f64>, Array2<f64>)> {
    if s0 == 0.0 {
        return Err(Error::SingularShift);
    }
    let n_ext = p.n_exterior();
    let ng = p.n_gamma();
    let k_mat = {
        let sq = p.h_ext.matmul(&p.h_ext);
        CsrMat::combine(
            &sq,
            C64::new(1.0, 0.0),
            &CsrMat::identity(n_ext),
            C64::new(s0 * s0, 0.0),
        )
    };
    let bw = bandwidth(&k_mat);
    let chol = BandChol::factor(n_ext, bw, |i, j| k_mat.get(i, j).re)?;

    let mut g0 = Array2::<f64>::zeros((ng, ng));
    let mut g1 = Array2::<f64>::zeros((ng, ng));
    let mut col = vec![0.0f64; n_ext];
    let mut hcol = vec![C64::new(0.0, 0.0); n_ext];
    let mut ccol = vec![C64::new(0.0, 0.0); n_ext];
    for b in 0..ng {
        // G1 column: K^{-1} H_{II,Γ} e_b
        col.iter_mut().for_each(|z| *z = 0.0);
        for &(e, val) in &p.gamma_ext[b] {
            col[e] = val;
        }
        // H_{II,II} applied to the same column, for G0
        for (z, &re) in ccol.iter_mut().zip(col.iter()) {
            *z = C64::new(re, 0.0);
        }
        p.h_ext.matvec_into(&ccol, &mut hcol);

        chol.solve(&mut col)?;
        for a in 0..ng {
            let mut acc = 0.0;
            for &(e, val) in &p.gamma_ext[a] {
                acc += val * col[e];
            }
            g1[(a, b)] = acc;
        }

        for (z, h) in col.iter_mut().zip(hcol.iter()) {
            *z = h.re;
        }
        chol.solve(&mut col)?;
        for a in 0..ng {
            let mut acc = 0.0;
            for &(e, val) in &p.gamma_ext[a] {
                acc += val * col[e];
            }
            g0[(a, b)] = acc;
        }
    }
    Ok((g0, g1))
}

/// The self-energy blocks at interpolation point s0.
///
/// `r_inv` and `sigma_gamma_gamma` are absent exactly when R is singular,
/// which only happens for degenerate partitions with no interior-exterior
/// coupling (G1 positive definite forces invertibility otherwise); the
/// order-0 generator does not need them.
#[derive(Debug, Clone)]
pub struct SelfEnergy {
    pub s0: f64,
    /// S = H_{Γ,II} H_{II,Γ}.
    pub s: Array2<C64>,
    /// S^{1/2}.
    pub s_half: Array2<C64>,
    pub r: Array2<C64>,
    pub r_inv: Option<Array2<C64>>,
    pub g0: Array2<C64>,
    pub g1: Array2<C64>,
    /// Σ_{Γ,Γ} = s0 I + i S^{1/2} R^{-1} S^{1/2}.
    pub sigma_gamma_gamma: Option<Array2<C64>>,
}

impl SelfEnergy {
    pub fn r_inv(&self) -> Result<&Array2<C64>> {
        self.r_inv.as_ref().ok_or(Error::SingularShift)
    }

    pub fn sigma(&self) -> Result<&Array2<C64>> {
        self.sigma_gamma_gamma.as_ref().ok_or(Error::SingularShift)
    }
}

pub fn self_energy(p: &Partition, s0: f64) -> Result<SelfEnergy> {
    let ng = p.n_gamma();
    // S via the coupling lists: S[a,b] = Σ_e H_{Γ,II}[a,e] H_{Γ,II}[b,e]
    let mut s = Array2::<C64>::zeros((ng, ng));
    for a in 0..ng {
        for b in 0..ng {
            let mut acc = 0.0;
            let (ra, rb) = (&p.gamma_ext[a], &p.gamma_ext[b]);
            for &(ea, va) in ra {
                for &(eb, vb) in rb {
                    if ea == eb {
                        acc += va * vb;
                    }
                }
            }
            s[(a, b)] = C64::new(acc, 0.0);
        }
    }
    let s_half = psd_sqrt(&s)?;
    let r = dtn_r(p, s0)?;
    let r_inv = match zinvert(&r) {
        Ok(inv) => Some(inv),
        Err(Error::Lapack { info, .. }) if info > 0 => None,
        Err(e) => return Err(e),
    };
    let (g0r, g1r) = dtn_g(p, s0)?;
    let g0 = real_to_complex(&g0r);
    let g1 = real_to_complex(&g1r);
    let sigma_gamma_gamma = r_inv.as_ref().map(|inv| {
        let mut sigma = matmul(&matmul(&s_half, inv), &s_half).mapv(|z| z * C64::new(0.0, 1.0));
        for d in 0..ng {
            sigma[(d, d)] += s0;
        }
        sigma
    });
    Ok(SelfEnergy {
        s0,
        s,
        s_half,
        r,
        r_inv,
        g0,
        g1,
        sigma_gamma_gamma,
    })
}

/// Coefficients of the untransformed one-pole boundary system:
/// A = -i H_{Γ,II} H_{II,Γ} = -i S, B = s0 I - A R^{-1}.
pub fn dtn_ab(se: &SelfEnergy) -> Result<(Array2<C64>, Array2<C64>)> {
    let ng = se.s.nrows();
    let a = se.s.mapv(|z| z * C64::new(0.0, -1.0));
    let mut b = matmul(&a, se.r_inv()?).mapv(|z| -z);
    for d in 0..ng {
        b[(d, d)] += se.s0;
    }
    Ok((a, b))
}

/// Builds the DtN generator.
///
/// Order 0: L = -i H_{I,I} - i Eᵀ R E on ψ_I.
/// Order 1: L = [[-i H_{I,I}, -i Σ_{I,Γ}], [-i Σ_{I,Γ}ᵀ, Σ_{Γ,Γ}]] on
/// [ψ_I; ψ_Γ-auxiliary]. The Hermitian pair is the generic split of L.
pub fn build_dtn_generator(
    p: &Partition,
    s0: f64,
    order: DtnOrder,
) -> Result<(Generator, HermitianPair, SelfEnergy)> {
    let se = self_energy(p, s0)?;
    let n_i = p.n_interior();
    let ng = p.n_gamma();
    let mi = C64::new(0.0, -1.0);
    let mut trips = Vec::new();
    for r in 0..n_i {
        for (c, v) in p.h_ii.row(r) {
            trips.push((r, c, mi * v));
        }
    }
    let (l, label) = match order {
        DtnOrder::Zero => {
            for a in 0..ng {
                for b in 0..ng {
                    let v = se.r[(a, b)];
                    if v != C64::new(0.0, 0.0) {
                        trips.push((p.gamma[a], p.gamma[b], mi * v));
                    }
                }
            }
            (CsrMat::from_triplets(n_i, n_i, trips), AbcKind::Dtn0)
        }
        DtnOrder::One => {
            let sigma = se.sigma()?;
            for a in 0..ng {
                for b in 0..ng {
                    let sh = se.s_half[(a, b)];
                    if sh != C64::new(0.0, 0.0) {
                        // -i Σ_{I,Γ} = -i Eᵀ S^{1/2}
                        trips.push((p.gamma[a], n_i + b, mi * sh));
                        // -i Σ_{I,Γ}ᵀ = -i S^{1/2} E
                        trips.push((n_i + a, p.gamma[b], mi * sh));
                    }
                    let sg = sigma[(a, b)];
                    if sg != C64::new(0.0, 0.0) {
                        trips.push((n_i + a, n_i + b, sg));
                    }
                }
            }
            (
                CsrMat::from_triplets(n_i + ng, n_i + ng, trips),
                AbcKind::Dtn1,
            )
        }
    };
    let pair = hermitian_split(&l);
    Ok((Generator::new(l, GeneratorLabel::Abc(label)), pair, se))
}

/// Stacks ψ_I with a zero Γ-auxiliary block for the order-1 system.
pub fn dtn1_initial_state(psi_i: &Array1<C64>, n_gamma: usize) -> Array1<C64> {
    let n = psi_i.len();
    let mut out = Array1::zeros(n + n_gamma);
    out.slice_mut(ndarray::s![0..n]).assign(psi_i);
    out
}

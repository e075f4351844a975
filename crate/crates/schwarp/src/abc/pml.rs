//! Perfectly matched layer: complex coordinate stretching with auxiliary
//! fields χ and φ, discretized with central differences on the stacked
//! unknown [ψ; χ; φ].
//!
//! The layer construction goes back to Berenger, J. Comput. Phys. 114 (1994);
//! σ here is the polynomial profile matching the CAP layer.

use num_complex::Complex64 as C64;

use super::LayerProfile;
use crate::discretization::{fd_first, hamiltonian_with_potential, lift_x, lift_y, Grid2D};
use crate::error::{Error, Result};
use crate::generator::{hermitian_split, AbcKind, Generator, GeneratorLabel, HermitianPair};
use crate::numerics::sparse::CsrMat;

pub type PmlProfile = LayerProfile;

/// σ sampled on the x-nodes and on the y-nodes.
pub fn pml_sigma(profile: &PmlProfile, grid: &Grid2D) -> Result<(Vec<f64>, Vec<f64>)> {
    profile.check_inside(grid)?;
    let sx = (0..grid.nx).map(|i| profile.eval(grid.x(i))).collect();
    let sy = (0..grid.ny).map(|j| profile.eval(grid.y(j))).collect();
    Ok((sx, sy))
}

/// Assembles the block generator
///
/// ```text
///        | -i H_V - (I⊗σx + σy⊗I)   (1/2)(I⊗Dx)   (1/2)(Dy⊗I) |
///  L_h = | -i (I⊗(σx Dx))           -(I⊗σx)        0           |
///        | -i ((σy Dy)⊗I)            0             -(σy⊗I)     |
/// ```
///
/// on the stacked unknown [ψ; χ; φ] from raw σ samples, plus the Hermitian
/// split of the result.
pub fn build_pml_generator_from_sigma(
    grid: &Grid2D,
    v: &[f64],
    sx: &[f64],
    sy: &[f64],
) -> Result<(Generator, HermitianPair)> {
    if v.len() != grid.len() || sx.len() != grid.nx || sy.len() != grid.ny {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs V {} / σx {} / σy {}",
            grid.nx,
            grid.ny,
            v.len(),
            sx.len(),
            sy.len()
        )));
    }
    let n = grid.len();

    let h_v = hamiltonian_with_potential(grid, v);
    let dx_1d = fd_first(grid.nx, grid.dx);
    let dy_1d = fd_first(grid.ny, grid.dx);

    let sx_diag_1d = CsrMat::diag(&sx.iter().map(|&s| C64::new(s, 0.0)).collect::<Vec<_>>());
    let sy_diag_1d = CsrMat::diag(&sy.iter().map(|&s| C64::new(s, 0.0)).collect::<Vec<_>>());

    let sx_2d = lift_x(grid, &sx_diag_1d); // I ⊗ σx
    let sy_2d = lift_y(grid, &sy_diag_1d); // σy ⊗ I
    let dx_2d = lift_x(grid, &dx_1d); // I ⊗ Dx
    let dy_2d = lift_y(grid, &dy_1d); // Dy ⊗ I
    let sx_dx_2d = lift_x(grid, &sx_diag_1d.matmul(&dx_1d)); // I ⊗ (σx Dx)
    let sy_dy_2d = lift_y(grid, &sy_diag_1d.matmul(&dy_1d)); // (σy Dy) ⊗ I

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mi = C64::new(0.0, -1.0);

    // block (0,0): -i H_V - (I⊗σx + σy⊗I)
    let sigma_sum = CsrMat::combine(&sx_2d, one, &sy_2d, one);
    let b00 = CsrMat::combine(&h_v, mi, &sigma_sum, -one);

    let mut trips = Vec::new();
    let mut push_block = |row_block: usize, col_block: usize, m: &CsrMat, factor: C64| {
        if factor == zero {
            return;
        }
        for r in 0..m.nrows() {
            for (c, val) in m.row(r) {
                trips.push((row_block * n + r, col_block * n + c, factor * val));
            }
        }
    };
    push_block(0, 0, &b00, one);
    push_block(0, 1, &dx_2d, C64::new(0.5, 0.0));
    push_block(0, 2, &dy_2d, C64::new(0.5, 0.0));
    push_block(1, 0, &sx_dx_2d, mi);
    push_block(1, 1, &sx_2d, -one);
    push_block(2, 0, &sy_dy_2d, mi);
    push_block(2, 2, &sy_2d, -one);

    let l = CsrMat::from_triplets(3 * n, 3 * n, trips);
    let pair = hermitian_split(&l);
    Ok((Generator::new(l, GeneratorLabel::Abc(AbcKind::Pml)), pair))
}

/// Profile-driven assembly. The stretched equations assume V = 0 inside the
/// layer, so the potential is zeroed where σ is active (with a warning when
/// that actually discards anything).
pub fn build_pml_generator(
    grid: &Grid2D,
    v: &[f64],
    profile: &PmlProfile,
) -> Result<(Generator, HermitianPair)> {
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} nodes, V has {}",
            grid.len(),
            v.len()
        )));
    }
    let (sx, sy) = pml_sigma(profile, grid)?;
    let mut v_eff = v.to_vec();
    let mut clipped = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if sx[i] + sy[j] > 0.0 {
                let idx = grid.index(i, j);
                clipped = clipped.max(v_eff[idx].abs());
                v_eff[idx] = 0.0;
            }
        }
    }
    if clipped > 0.0 {
        log::warn!(
            "potential is nonzero inside the absorbing layer (max {clipped:.3e}); zeroed for assembly"
        );
    }
    build_pml_generator_from_sigma(grid, &v_eff, &sx, &sy)
}

/// Stacks ψ with zero-initialized χ and φ blocks.
pub fn pml_initial_state(psi0: &ndarray::Array1<C64>) -> ndarray::Array1<C64> {
    let n = psi0.len();
    let mut out = ndarray::Array1::zeros(3 * n);
    out.slice_mut(ndarray::s![0..n]).assign(psi0);
    out
}

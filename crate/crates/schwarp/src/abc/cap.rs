//! Complex absorbing potential: an artificial potential W with nonpositive
//! imaginary part added in a layer surrounding the region of interest, so
//! outgoing wavepackets are damped before they reach the Dirichlet frame.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::LayerProfile;
use crate::discretization::{hamiltonian_with_potential, Grid2D};
use crate::error::{Error, Result};
use crate::generator::{AbcKind, Generator, GeneratorLabel, HermitianPair};
use crate::numerics::sparse::CsrMat;

pub type CapProfile = LayerProfile;

/// Samples W(x, y) = -i p(x) - i p(y) for the layer profile p; zero on the
/// inner box, purely imaginary with Im W <= 0.
pub fn cap_potential(profile: &CapProfile, grid: &Grid2D) -> Result<Array1<C64>> {
    profile.check_inside(grid)?;
    Ok(grid.sample(|x, y| C64::new(0.0, -(profile.eval(x) + profile.eval(y)))))
}

/// Assembles H0 = -(1/2)(Dxx ⊗ I + I ⊗ Dxx) + diag(V) + diag(Re W) and
/// H1 = -diag(Im W), with the generator L = -i H0 - H1.
pub fn build_cap_generator(
    grid: &Grid2D,
    v: &[f64],
    w: &Array1<C64>,
) -> Result<(Generator, HermitianPair)> {
    if v.len() != grid.len() || w.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} nodes, V has {}, W has {}",
            grid.len(),
            v.len(),
            w.len()
        )));
    }
    let max_pos_im = w.iter().map(|z| z.im).fold(0.0f64, f64::max);
    if max_pos_im > 0.0 {
        return Err(Error::PositiveImagPotential(max_pos_im));
    }
    let re_w: Vec<f64> = w.iter().map(|z| z.re).collect();
    let v_eff: Vec<f64> = v.iter().zip(&re_w).map(|(a, b)| a + b).collect();
    let h0 = hamiltonian_with_potential(grid, &v_eff);
    let h1_diag: Vec<C64> = w.iter().map(|z| C64::new(-z.im, 0.0)).collect();
    let h1 = CsrMat::diag(&h1_diag);
    let pair = HermitianPair { h0, h1 };
    let l = crate::generator::assemble(&pair);
    Ok((
        Generator::new(l, GeneratorLabel::Abc(AbcKind::Cap)),
        pair,
    ))
}

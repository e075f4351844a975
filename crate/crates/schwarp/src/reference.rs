//! Ground-truth oracles: direct RK4 integration of the un-lifted boundary
//! dynamics, a large-domain truth solution for measuring reflection error,
//! and the naive zero-Dirichlet wall those are compared against.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::discretization::{hamiltonian_with_potential, Grid2D};
use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorLabel};
use crate::numerics::propagate::general_propagate_cb;
use crate::numerics::sparse::CsrMat;
use crate::numerics::vec_norm;

/// Per-step norm monitoring for the direct solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormCheck {
    None,
    /// Dissipative dynamics: the norm may never grow by more than the given
    /// relative tolerance within one step.
    NonIncreasing { tol: f64 },
    /// Unitary dynamics: the norm must stay within the given relative
    /// tolerance of its initial value for the whole run.
    Conserved { tol: f64 },
}

/// RK4 step for the reference solver: 1/(32 ||L||_1). At this scale the
/// solver is step-converged below 1e-8 relative and conserves the norm of
/// unitary dynamics below 1e-10 even on coarse grids, where 0.25/||L||_1
/// still carries O(1e-6) phase error in the top modes.
pub fn reference_step(l: &CsrMat) -> f64 {
    let nrm = l.max_col_abs_sum();
    if nrm == 0.0 {
        f64::INFINITY
    } else {
        0.03125 / nrm
    }
}

/// Direct RK4 integration of dφ/dt = Lφ over [0, t].
pub fn direct_solve(g: &Generator, state0: &Array1<C64>, t: f64, dt: Option<f64>) -> Result<Array1<C64>> {
    direct_solve_checked(g, state0, t, dt, NormCheck::None)
}

pub fn direct_solve_checked(
    g: &Generator,
    state0: &Array1<C64>,
    t: f64,
    dt: Option<f64>,
    check: NormCheck,
) -> Result<Array1<C64>> {
    if state0.len() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "generator dim {} vs state {}",
            g.dim(),
            state0.len()
        )));
    }
    let dt = dt.unwrap_or_else(|| reference_step(&g.l)).min(t.max(f64::MIN_POSITIVE));
    let n0 = vec_norm(state0);
    let mut prev = n0;
    general_propagate_cb(&g.l, t, state0, dt, |_step, state| {
        let cur = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        match check {
            NormCheck::None => {}
            NormCheck::NonIncreasing { tol } => {
                if cur > prev * (1.0 + tol) {
                    return Err(Error::UnstableStep { factor: cur / prev });
                }
            }
            NormCheck::Conserved { tol } => {
                if n0 > 0.0 && ((cur - n0) / n0).abs() > tol {
                    return Err(Error::UnstableStep { factor: cur / n0 });
                }
            }
        }
        prev = cur;
        Ok(())
    })
}

/// Plain Hermitian dynamics -i H_V on the given grid with a hard zero
/// Dirichlet frame; the baseline every boundary treatment must beat.
pub fn naive_generator(grid: &Grid2D, v: &[f64]) -> Generator {
    let h_v = hamiltonian_with_potential(grid, v);
    Generator::new(h_v.scale(C64::new(0.0, -1.0)), GeneratorLabel::Tdse)
}

/// Truth-run configuration: the base grid is extended outward, keeping the
/// spacing, until the half-width reaches at least `target_half_width`.
#[derive(Debug, Clone, Copy)]
pub struct TruthConfig {
    /// The big domain extends at least this far on every side (default 12).
    pub target_half_width: f64,
    /// Squared-mass fraction allowed on the frame ring at the final time.
    pub frame_mass_tol: f64,
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig {
            target_half_width: 12.0,
            frame_mass_tol: 1e-8,
        }
    }
}

/// A big grid node-aligned with a base grid: base node (i, j) sits at big
/// node (i + pad, j + pad).
#[derive(Debug, Clone)]
pub struct TruthGrid {
    pub grid: Grid2D,
    pub pad: usize,
    pub base: Grid2D,
}

impl TruthGrid {
    /// Builds the smallest node-aligned extension of `base` whose bounds
    /// cover [-target, target]^2.
    pub fn enclosing(base: &Grid2D, target_half_width: f64) -> Result<TruthGrid> {
        let reach = [
            base.x_min + target_half_width,
            target_half_width - base.x_max,
            base.y_min + target_half_width,
            target_half_width - base.y_max,
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        let pad = (reach / base.dx).ceil() as usize;
        let grid = Grid2D::rect(
            (
                base.x_min - pad as f64 * base.dx,
                base.x_max + pad as f64 * base.dx,
            ),
            (
                base.y_min - pad as f64 * base.dx,
                base.y_max + pad as f64 * base.dx,
            ),
            base.nx + 2 * pad,
            base.ny + 2 * pad,
        )?;
        Ok(TruthGrid {
            grid,
            pad,
            base: *base,
        })
    }

    /// Restricts a big-grid field to the base-grid nodes (exact sampling, no
    /// interpolation).
    pub fn restrict(&self, big: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.base.len());
        for j in 0..self.base.ny {
            for i in 0..self.base.nx {
                out[self.base.index(i, j)] =
                    big[self.grid.index(i + self.pad, j + self.pad)];
            }
        }
        out
    }

    /// Fraction of the squared norm sitting on the outermost interior ring.
    pub fn frame_mass_fraction(&self, big: &Array1<C64>) -> f64 {
        let g = &self.grid;
        let total: f64 = big.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut ring = 0.0;
        for i in 0..g.nx {
            ring += big[g.index(i, 0)].norm_sqr();
            ring += big[g.index(i, g.ny - 1)].norm_sqr();
        }
        for j in 1..g.ny.saturating_sub(1) {
            ring += big[g.index(0, j)].norm_sqr();
            ring += big[g.index(g.nx - 1, j)].norm_sqr();
        }
        ring / total
    }
}

pub struct TruthOutput {
    pub truth: TruthGrid,
    /// Solution restricted to the base grid.
    pub restricted: Array1<C64>,
    pub frame_mass_fraction: f64,
}

/// Evolves -i H_V on the enclosing big domain with a zero Dirichlet frame
/// and restricts the result to the base grid. Fails with `MassReachedFrame`
/// if the wavepacket support (at the configured mass level) reaches the
/// frame by the final time, which would invalidate the truth.
pub fn truth_solution(
    base: &Grid2D,
    v_fn: impl Fn(f64, f64) -> f64,
    psi0_fn: impl Fn(f64, f64) -> C64,
    t: f64,
    cfg: &TruthConfig,
) -> Result<TruthOutput> {
    let truth = TruthGrid::enclosing(base, cfg.target_half_width)?;
    let big = &truth.grid;
    let v = big.sample_real(&v_fn);
    let psi0 = big.sample(&psi0_fn);
    let gen = naive_generator(big, &v);
    let out = direct_solve_checked(
        &gen,
        &psi0,
        t,
        None,
        NormCheck::Conserved { tol: 1e-10 },
    )?;
    let frame = truth.frame_mass_fraction(&out);
    if frame > cfg.frame_mass_tol {
        return Err(Error::MassReachedFrame(frame));
    }
    Ok(TruthOutput {
        restricted: truth.restrict(&out),
        truth,
        frame_mass_fraction: frame,
    })
}

//! Spatial grids, finite-difference operators, and samplers for the potential
//! and the initial wavepacket.
//!
//! States store interior points only; the homogeneous Dirichlet frame at the
//! first/last grid lines is never represented. The flattening convention is
//! x-fastest: `index = j * nx + i` for the node `(x_i, y_j)` (0-based), so an
//! operator A acting on the x index enters as `kron(I, A)` and one acting on
//! the y index as `kron(A, I)`.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::sparse::CsrMat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Interior points along x.
    pub nx: usize,
    /// Interior points along y.
    pub ny: usize,
    /// Shared spacing, (x_max - x_min) / (nx + 1).
    pub dx: f64,
}

impl Grid2D {
    /// Square grid over `[lo, hi]^2` with `n` interior points per direction.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Grid2D> {
        Grid2D::rect((lo, hi), (lo, hi), n, n)
    }

    pub fn rect(x_bounds: (f64, f64), y_bounds: (f64, f64), nx: usize, ny: usize) -> Result<Grid2D> {
        let (x_min, x_max) = x_bounds;
        let (y_min, y_max) = y_bounds;
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::BadBounds(format!(
                "empty box [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        if nx < 1 || ny < 1 {
            return Err(Error::BadBounds("need at least one interior point".into()));
        }
        let dx = (x_max - x_min) / (nx as f64 + 1.0);
        let dy = (y_max - y_min) / (ny as f64 + 1.0);
        if ((dx - dy) / dx).abs() > 1e-12 {
            return Err(Error::IncommensurateGrids(format!(
                "x spacing {dx} differs from y spacing {dy}"
            )));
        }
        Ok(Grid2D {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            dx,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 1.0) * self.dx
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Node positions in flattening order.
    pub fn node_positions(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push((self.x(i), self.y(j)));
            }
        }
        out
    }

    /// Samples a complex-valued function into the flattening order.
    pub fn sample(&self, f: impl Fn(f64, f64) -> C64) -> Array1<C64> {
        let mut v = Array1::zeros(self.len());
        for j in 0..self.ny {
            let yj = self.y(j);
            for i in 0..self.nx {
                v[self.index(i, j)] = f(self.x(i), yj);
            }
        }
        v
    }

    pub fn sample_real(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for j in 0..self.ny {
            let yj = self.y(j);
            for i in 0..self.nx {
                v[self.index(i, j)] = f(self.x(i), yj);
            }
        }
        v
    }
}

/// Central first-derivative matrix tridiag(-1, 0, 1) / (2 dx) with the
/// homogeneous Dirichlet truncation.
pub fn fd_first(n: usize, dx: f64) -> CsrMat {
    let w = 0.5 / dx;
    let mut trips = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i > 0 {
            trips.push((i, i - 1, C64::new(-w, 0.0)));
        }
        if i + 1 < n {
            trips.push((i, i + 1, C64::new(w, 0.0)));
        }
    }
    CsrMat::from_triplets(n, n, trips)
}

/// Second-derivative matrix tridiag(1, -2, 1) / dx^2 with the homogeneous
/// Dirichlet truncation.
pub fn fd_second(n: usize, dx: f64) -> CsrMat {
    let w = 1.0 / (dx * dx);
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        trips.push((i, i, C64::new(-2.0 * w, 0.0)));
        if i > 0 {
            trips.push((i, i - 1, C64::new(w, 0.0)));
        }
        if i + 1 < n {
            trips.push((i, i + 1, C64::new(w, 0.0)));
        }
    }
    CsrMat::from_triplets(n, n, trips)
}

/// The 1-D difference matrices (Dx, Dxx) on the grid's x direction.
pub fn build_fd_ops(grid: &Grid2D) -> (CsrMat, CsrMat) {
    (fd_first(grid.nx, grid.dx), fd_second(grid.nx, grid.dx))
}

/// Lifts a 1-D operator on the x index to the 2-D grid: I_ny ⊗ A.
pub fn lift_x(grid: &Grid2D, a: &CsrMat) -> CsrMat {
    CsrMat::kron(&CsrMat::identity(grid.ny), a)
}

/// Lifts a 1-D operator on the y index to the 2-D grid: A ⊗ I_nx.
pub fn lift_y(grid: &Grid2D, a: &CsrMat) -> CsrMat {
    CsrMat::kron(a, &CsrMat::identity(grid.nx))
}

/// Kinetic operator -(1/2)(Dxx ⊗ I + I ⊗ Dxx) on the grid.
pub fn kinetic_2d(grid: &Grid2D) -> CsrMat {
    let dxx = fd_second(grid.nx, grid.dx);
    let dyy = fd_second(grid.ny, grid.dx);
    let k = CsrMat::combine(
        &lift_x(grid, &dxx),
        C64::new(-0.5, 0.0),
        &lift_y(grid, &dyy),
        C64::new(-0.5, 0.0),
    );
    k
}

/// H_V = kinetic + diag(V).
pub fn hamiltonian_with_potential(grid: &Grid2D, v: &[f64]) -> CsrMat {
    assert_eq!(v.len(), grid.len());
    let diag: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    CsrMat::combine(
        &kinetic_2d(grid),
        C64::new(1.0, 0.0),
        &CsrMat::diag(&diag),
        C64::new(1.0, 0.0),
    )
}

/// The test potential: sin(2 pi r) inside the unit disc, zero outside.
pub fn disc_sine_potential(x: f64, y: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    if r <= 1.0 {
        (2.0 * std::f64::consts::PI * r).sin()
    } else {
        0.0
    }
}

/// Initial wavepacket 1 + cos(pi r) + i (cos(2 pi r) - 1) inside the unit
/// disc, zero outside; continuous at r = 1.
pub fn initial_wavepacket(grid: &Grid2D) -> Array1<C64> {
    grid.sample(|x, y| {
        let r = (x * x + y * y).sqrt();
        if r <= 1.0 {
            let pi = std::f64::consts::PI;
            C64::new(1.0 + (pi * r).cos(), (2.0 * pi * r).cos() - 1.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

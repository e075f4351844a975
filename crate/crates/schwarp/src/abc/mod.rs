//! Absorbing boundary treatments: complex absorbing potential, perfectly
//! matched layer, and the Dirichlet-to-Neumann self-energy construction.

pub mod cap;
pub mod dtn;
pub mod pml;

use serde::{Deserialize, Serialize};

/// Polynomial layer profile shared by CAP and PML: zero inside the centred
/// box of half-width `inner_half_width`, growing as
/// `strength * (|x| - inner_half_width)^exponent` outside it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayerProfile {
    pub inner_half_width: f64,
    pub strength: f64,
    pub exponent: i32,
}

impl Default for LayerProfile {
    fn default() -> Self {
        LayerProfile {
            inner_half_width: 2.2,
            strength: 10.0,
            exponent: 2,
        }
    }
}

impl LayerProfile {
    pub fn eval(&self, s: f64) -> f64 {
        let d = s.abs() - self.inner_half_width;
        if d > 0.0 {
            self.strength * d.powi(self.exponent)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.inner_half_width <= 0.0 || self.strength < 0.0 || self.exponent < 1 {
            return Err(crate::Error::ProfileOutOfDomain);
        }
        Ok(())
    }

    /// The inner box must sit inside the grid domain.
    pub fn check_inside(&self, grid: &crate::discretization::Grid2D) -> crate::Result<()> {
        self.validate()?;
        let a = self.inner_half_width;
        if -a < grid.x_min || a > grid.x_max || -a < grid.y_min || a > grid.y_max {
            return Err(crate::Error::ProfileOutOfDomain);
        }
        Ok(())
    }
}

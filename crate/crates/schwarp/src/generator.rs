//! The common form of every boundary treatment here: a semi-discrete system
//! dφ/dt = Lφ with L = -i H0 - H1 for Hermitian H0, H1.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::numerics::sparse::CsrMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbcKind {
    Cap,
    Pml,
    Dtn0,
    Dtn1,
}

/// Which construction produced a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorLabel {
    Abc(AbcKind),
    /// Plain Hermitian dynamics (-i H_V): truth runs and the naive
    /// zero-Dirichlet wall.
    Tdse,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub l: CsrMat,
    pub label: GeneratorLabel,
}

impl Generator {
    pub fn new(l: CsrMat, label: GeneratorLabel) -> Self {
        assert_eq!(l.nrows(), l.ncols(), "generator must be square");
        Generator { l, label }
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn split(&self) -> HermitianPair {
        hermitian_split(&self.l)
    }
}

#[derive(Debug, Clone)]
pub struct HermitianPair {
    pub h0: CsrMat,
    pub h1: CsrMat,
}

impl HermitianPair {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    /// Checks the defining invariants: both parts Hermitian to 1e-12
    /// relative, and -i H0 - H1 reconstructing `l` to 1e-13 relative.
    pub fn validate_against(&self, l: &CsrMat) -> crate::Result<()> {
        for (name, h) in [("H0", &self.h0), ("H1", &self.h1)] {
            let defect = h.hermiticity_defect();
            let scale = h.max_abs();
            if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                let _ = name;
                return Err(crate::Error::NotHermitian {
                    defect,
                    tol: 1e-12 * scale,
                });
            }
        }
        let rebuilt = assemble(self);
        let diff = CsrMat::combine(&rebuilt, C64::new(1.0, 0.0), l, C64::new(-1.0, 0.0));
        let scale = l.max_abs().max(f64::MIN_POSITIVE);
        if diff.max_abs() > 1e-13 * scale {
            return Err(crate::Error::DimensionMismatch(format!(
                "hermitian pair does not reconstruct L: defect {:.3e} vs scale {:.3e}",
                diff.max_abs(),
                scale
            )));
        }
        Ok(())
    }
}

/// H0 = -(L - L†)/(2i), H1 = -(L + L†)/2. The arithmetic used here is the
/// average with the adjoint, so the outputs are Hermitian entry-exactly even
/// in floating point.
pub fn hermitian_split(l: &CsrMat) -> HermitianPair {
    let adj = l.adjoint();
    // -(L - L†)/(2i) = (i/2) L - (i/2) L†
    let h0 = CsrMat::combine(l, C64::new(0.0, 0.5), &adj, C64::new(0.0, -0.5));
    let h1 = CsrMat::combine(l, C64::new(-0.5, 0.0), &adj, C64::new(-0.5, 0.0));
    HermitianPair { h0, h1 }
}

/// L = -i H0 - H1.
pub fn assemble(pair: &HermitianPair) -> CsrMat {
    CsrMat::combine(&pair.h0, C64::new(0.0, -1.0), &pair.h1, C64::new(-1.0, 0.0))
}

//! Classical evolution of the 2-D time-dependent Schrödinger equation under
//! absorbing boundary treatments — complex absorbing potentials, perfectly
//! matched layers, and Dirichlet-to-Neumann self-energies — together with the
//! Schrödingerized form of the resulting non-Hermitian dynamics: the state is
//! lifted into one extra dimension by a warped phase transformation, evolved
//! unitarily per Fourier mode, and recovered by quadrature. Query-complexity
//! analytics for the lifted Hamiltonians are included.

pub mod abc;
pub mod analysis;
pub mod config;
pub mod discretization;
pub mod driver;
pub mod error;
pub mod generator;
pub mod io;
pub mod numerics;
pub mod reference;
pub mod schrodingerization;

pub use error::{Error, Result};

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {path}: {message}")]
    Config { path: String, message: String },

    #[error("matrix is not Hermitian (defect {defect:.3e}, allowed {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("Krylov propagator cannot meet the tolerance (remaining time {t_left:.3e})")]
    KrylovBreakdown { t_left: f64 },

    #[error("state norm grew by {factor:.2}x in a single step of a stable generator")]
    UnstableStep { factor: f64 },

    #[error("rk4 step {dt:.3e} exceeds the stability bound {max_dt:.3e}")]
    StepTooLarge { dt: f64, max_dt: f64 },

    #[error("bad grid bounds: {0}")]
    BadBounds(String),

    #[error("absorber profile extends outside the grid domain")]
    ProfileOutOfDomain,

    #[error("absorbing potential has positive imaginary part (max {0:.3e})")]
    PositiveImagPotential(f64),

    #[error("grids are not commensurate: {0}")]
    IncommensurateGrids(String),

    #[error("omega box must lie strictly inside the exterior domain")]
    OmegaNotInsideD,

    #[error("partition has an empty exterior: omega covers the whole domain")]
    EmptyExterior,

    #[error("partition has an empty interior: no grid nodes inside omega")]
    EmptyInterior,

    #[error("shifted exterior operator is numerically singular")]
    SingularShift,

    #[error("bad p-interval: {0}")]
    BadInterval(String),

    #[error("p-grid point count must be even and at least 4, got {0}")]
    OddM(usize),

    #[error("warped state is in the wrong basis: expected {expected}, found {found}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("degenerate logarithm: h_max1/eps must exceed e")]
    DegenerateLog,

    #[error("wavepacket mass reached the truth-domain frame (fraction {0:.3e})")]
    MassReachedFrame(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lapack {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 numerical invariant, 4 is
    /// reserved for self-test mismatches (mapped by the caller).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Json(_) => 2,
            Error::Io(_) | Error::Snapshot(_) => 1,
            _ => 3,
        }
    }
}

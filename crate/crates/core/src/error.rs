use std::path::PathBuf;

use thiserror::Error;

use crate::doubling::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix (reciprocal condition estimate {rcond:.3e})")]
    SingularMatrix { rcond: f64 },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} violates structure: relative defect {defect:.3e} exceeds {tol:.3e}")]
    StructureViolation {
        what: &'static str,
        defect: f64,
        tol: f64,
    },
    #[error("shift {alpha} hits the spectrum")]
    ShiftHitsSpectrum { alpha: f64 },
    #[error("R is singular for shift {alpha}")]
    RSingular { alpha: f64 },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("rho must exceed 1, got {0}")]
    InvalidRho(f64),
    #[error("breakdown: I - conj(F) F condition {cond:.3e}")]
    BreakdownDetected { cond: f64 },
    #[error("Z is singular in the compression step")]
    ZSingular,
    #[error("gamma {gamma} hits the compressed spectrum")]
    GammaHitsSpectrum { gamma: f64 },
    #[error("double-Cayley transform failed: {0}")]
    DctFailed(String),
    #[error("I + F Z is ill-conditioned for the drawn Z")]
    ZIllConditioned,
    #[error("three-recursion breakdown: I - G H condition {cond:.3e}")]
    TriBreakdown { cond: f64 },
    #[error("three-recursion state not converged: |P|_F = {p_norm:.3e}")]
    NotConvergedTri { p_norm: f64 },
    #[error("doubling did not converge after {} iterations", .0.report.iterations)]
    NotConverged(Box<Solution>),
    #[error("cannot match eigenvalue lists of length {left} and {right}")]
    MatchFailure { left: usize, right: usize },
    #[error("absorption spectrum needs dipole vectors and eigenvectors")]
    MissingDipoles,
    #[error("unknown generator kind '{0}'")]
    UnknownKind(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid hull: {0}")]
    InvalidHull(String),
    #[error("evaluation at the branch point of corner {0}")]
    BranchPoint(usize),
    #[error("corner {0} has sigma <= -1/3 and carries no singulant")]
    NoSingulant(usize),
    #[error("sigma = {0} is outside the admissible range")]
    SigmaOutOfRange(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("corner index {0} out of range")]
    CornerIndex(usize),
    #[error("quadrature did not converge (error estimate {0:e})")]
    Quadrature(f64),
    #[error("contour passes within the indentation radius of corner {0}")]
    ContourThroughSingularity(usize),
    #[error("recurrence limit did not converge: gap {gap:e} exceeds {tol:e} at n = {n}")]
    OmegaNonConvergence { gap: f64, tol: f64, n: usize },
    #[error("recurrence limit {omega:e} indistinguishable from zero (error {err:e})")]
    OmegaZero { omega: f64, err: f64 },
    #[error("recurrence overflow at n = {0}")]
    RecurrenceOverflow(usize),
    #[error("Stokes corrector diverged near w = {re} + {im}i")]
    CorrectorDiverged { re: f64, im: f64 },
    #[error("corner {0} has no Stokes line reaching the free surface")]
    InactiveCorner(usize),
    #[error("active-set membership of corner {0} is undetermined")]
    UndeterminedCorner(usize),
    #[error("integration failed: {0}")]
    Ode(String),
    #[error("Newton iteration stagnated with residual {0:e}")]
    NewtonStagnation(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("measurement rejected: {0}")]
    MeasurementRejected(String),
    #[error("amplitude {amplitude:e} is below the reliability floor {floor:e}")]
    BelowFloor { amplitude: f64, floor: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Broad classes used by callers to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    Measurement,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidHull(_) | SigmaOutOfRange(_) | InvalidEpsilon(_) | CornerIndex(_) | NoSingulant(_)
            | InactiveCorner(_) | GridTooCoarse(_) | Unsupported(_) => ErrorClass::Input,
            MeasurementRejected(_) | BelowFloor { .. } => ErrorClass::Measurement,
            _ => ErrorClass::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

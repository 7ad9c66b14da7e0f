use crate::polyline::Polyline;

/// Errors raised by the field, evolution and Lagrangian machinery.
#[derive(Debug, thiserror::Error)]
pub enum EglError {
    #[error("grid resolution {0} must be a power of two and at least 8")]
    BadResolution(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("field mean {0:e} exceeds tolerance")]
    NonZeroMean(f64),
    #[error("Hermitian symmetry broken (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("CFL violation: dt = {dt:e} exceeds the limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite coefficients at t = {0}")]
    BlowUp(f64),
    #[error("symmetry enforcement failed (residual {0:e})")]
    SymmetryFailure(f64),
    #[error("field provider does not cover t = {0}")]
    ProviderGap(f64),
    #[error("perturbation {name} = {value:e} exceeds bound {bound:e} at (alpha, beta, t) = ({alpha}, {beta}, {t})")]
    PerturbationBound {
        name: &'static str,
        value: f64,
        bound: f64,
        alpha: f64,
        beta: f64,
        t: f64,
    },
    #[error("reclip failed on leg {leg}: {reason}")]
    ReclipFailure {
        leg: usize,
        reason: String,
        curve: Box<Polyline>,
    },
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("malformed field record: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EglError>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScatterError>;

#[derive(Debug, Clone, Error)]
pub enum ScatterError {
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("wavenumber mismatch: {0} vs {1}")]
    WavenumberMismatch(f64, f64),
    #[error("spectral singularity at k = {k}: |M22| = {m22_abs:e}")]
    SpectralSingularity { k: f64, m22_abs: f64 },
    #[error("zero transmission amplitude is not realizable")]
    ZeroTransmission,
    #[error("tolerance {tol:e} not reached after {slices} slices (last change {change:e})")]
    ToleranceNotReached { tol: f64, change: f64, slices: usize },
    #[error("oscillatory quadrature did not converge to {tol:e} (last change {change:e})")]
    QuadratureNonconvergence { tol: f64, change: f64 },
    #[error("transmission amplitudes from left and right solutions disagree: {0:e}")]
    InconsistentTransmission(f64),
    #[error("S-curve method: S' vanishes near x = {x} (|S'| = {value:e})")]
    SCurveDerivativeZero { x: f64, value: f64 },
    #[error("{0} does not accept delta terms")]
    DeltaTermsUnsupported(&'static str),
    #[error("components of a sum overlap; composition-based solvers need disjoint supports")]
    OverlappingSupports,
    #[error("no closed-form transfer matrix for this potential")]
    NotClosedForm,
    #[error("singular denominator in {0}")]
    SingularDenominator(&'static str),
    #[error("no real zero: minimum residual {residual:e} at k = {k} exceeds threshold {threshold:e}")]
    NoZeroFound { k: f64, residual: f64, threshold: f64 },
    #[error("born inverse grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("reflection magnitude {magnitude} unreachable with winding n = {n} (max {max})")]
    UnreachableReflection { magnitude: f64, n: u32, max: f64 },
    #[error("placement conflict: {0}")]
    PlacementConflict(String),
    #[error("design verification failed: {0}")]
    VerificationFailure(String),
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for ScatterError {
    fn from(e: serde_json::Error) -> Self {
        ScatterError::Json(e.to_string())
    }
}

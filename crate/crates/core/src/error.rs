//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cap angle {alpha} rad is outside (0, pi)")]
    AlphaOutOfRange { alpha: f64 },

    #[error("permittivities must satisfy eps_plus > 0 > eps_minus (got eps_plus = {eps_plus}, eps_minus = {eps_minus})")]
    SignViolation { eps_plus: f64, eps_minus: f64 },

    #[error("dissipation must be nonnegative (got {delta})")]
    NegativeDissipation { delta: f64 },

    #[error("invalid cutoff profile: {0}")]
    InvalidCutoff(String),

    #[error("operation requires a circular cap geometry")]
    GeometryKindMismatch,

    #[error("malformed sphere mesh (line {line}): {reason}")]
    MeshFileInvalid { line: usize, reason: String },

    #[error("quadrature node hit a pole (phi = {phi})")]
    PoleQuadratureFailure { phi: f64 },

    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("mass matrix is numerically singular (condition estimate {condition:e})")]
    MassMatrixSingular { condition: f64 },

    #[error("eigenvalue iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("weighted norm D = {d:e} is below the degeneracy threshold")]
    EndpointDegeneracy { d: f64 },

    #[error("every eigenvalue lies on the critical line; no spectral gap")]
    NoSpectralGap,

    #[error("no black-hole exponent pair found")]
    NoBlackHolePair,

    #[error("tracking at delta = {delta} is ambiguous: two candidates within {separation:e}")]
    TrackingAmbiguity { delta: f64, separation: f64 },

    #[error("radius tau = {tau} is outside the cutoff plateau (0, {r_one}]")]
    TauOutsidePlateau { tau: f64, r_one: f64 },

    #[error("radial quadrature did not converge (difference {difference:e})")]
    QuadratureNotConverged { difference: f64 },

    #[error("point (theta = {theta}, phi = {phi}) is outside the angular chart")]
    PointOutsideChart { theta: f64, phi: f64 },

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid config: {0}")]
    ConfigValidation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier, used in output headers and by the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AlphaOutOfRange { .. } => "ALPHA_OUT_OF_RANGE",
            Error::SignViolation { .. } => "SIGN_VIOLATION",
            Error::NegativeDissipation { .. } => "NEGATIVE_DISSIPATION",
            Error::InvalidCutoff(_) => "INVALID_CUTOFF",
            Error::GeometryKindMismatch => "GEOMETRY_KIND_MISMATCH",
            Error::MeshFileInvalid { .. } => "MESH_FILE_INVALID",
            Error::PoleQuadratureFailure { .. } => "POLE_QUADRATURE_FAILURE",
            Error::DegenerateTriangle { .. } => "DEGENERATE_TRIANGLE",
            Error::MassMatrixSingular { .. } => "MASS_MATRIX_SINGULAR",
            Error::NoConvergence(_) => "NO_CONVERGENCE",
            Error::EndpointDegeneracy { .. } => "ENDPOINT_DEGENERACY",
            Error::NoSpectralGap => "NO_SPECTRAL_GAP",
            Error::NoBlackHolePair => "NO_BLACK_HOLE_PAIR",
            Error::TrackingAmbiguity { .. } => "TRACKING_AMBIGUITY",
            Error::TauOutsidePlateau { .. } => "TAU_OUTSIDE_PLATEAU",
            Error::QuadratureNotConverged { .. } => "QUADRATURE_NOT_CONVERGED",
            Error::PointOutsideChart { .. } => "POINT_OUTSIDE_CHART",
            Error::ConfigParse { .. } => "CONFIG_PARSE_ERROR",
            Error::ConfigValidation(_) => "CONFIG_VALIDATION_ERROR",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical layers (domain, DtN map, limits, classification, measures).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("potential value {value} exceeds the declared bound {bound}")]
    PotentialBound { value: f64, bound: f64 },

    /// The shifted system `A_II - λ` is numerically singular. `distance` is the
    /// solver's lower estimate of the distance from `λ` to the spectrum.
    #[error("spectral parameter {lambda} is too close to the spectrum (estimated distance {distance:e})")]
    NearSpectrum { lambda: Complex64, distance: f64 },

    #[error("degenerate spectral parameters: {0}")]
    DegenerateParameters(String),

    #[error("Robin pencil Θ - M(λ) is singular at λ = {lambda} (condition number {condition:e})")]
    SingularRobinPencil { lambda: Complex64, condition: f64 },

    #[error("interval endpoint {0} lies on an eigenvalue")]
    EndpointOnEigenvalue(f64),

    #[error("contour |z - {center}| = {radius} touches the spectrum")]
    ContourTouchesSpectrum { center: f64, radius: f64 },

    #[error("{0} is not an eigenvalue of the operator")]
    NotAnEigenvalue(f64),

    #[error("Borel transform evaluated on the atom at {0}")]
    AtomHit(f64),

    #[error("inconclusive at x = {x}: {reason}")]
    Inconclusive { x: f64, reason: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

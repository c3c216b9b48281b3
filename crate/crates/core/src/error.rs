use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (chart, cell, grid range).
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula produced a non-real or non-finite value (negative radicand, division by zero).
    #[error("math error: {0}")]
    Math(String),

    /// Constructor arguments violate the admissibility constraints of a potential.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("no bound motion: {0}")]
    NoBoundMotion(String),

    /// The effective potential has no genuine local minimum (omega_0^2 <= 0).
    #[error("degenerate minimum: omega_0^2 = {0}")]
    DegenerateMinimum(f64),

    /// `V'' - V'/rho` vanishes, so the isochronicity residual is undefined.
    #[error("singular denominator in isochronicity residual at rho = {0}")]
    SingularDenominator(f64),

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    /// Abel branch assembly is not single valued for the supplied G(U).
    #[error("branch overlap: {0}")]
    BranchOverlap(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    /// The trajectory approached r = 0 or the chart boundary.
    #[error("integration aborted near a singularity at t = {t}: {reason}")]
    Singularity { t: f64, reason: String },

    #[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
    Quadrature { error: f64, intervals: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid parameter or malformed specification.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    /// Evaluation requested outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested moment does not exist.
    #[error("divergent moment: {0}")]
    DivergentMoment(String),
    /// Point outside the analytic continuation domain of the branched density.
    #[error("outside continuation domain: {0}")]
    OutsideDomain(String),
    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadFailure(String),
    /// Root finding did not converge.
    #[error("inversion failed after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    /// Winding-number probe sits on (or too close to) the image curve.
    #[error("probe point lies on the image curve")]
    PointOnCurve,
    /// Accumulated argument is not close enough to an integer multiple of 2π.
    #[error("winding residual {residual:.3e} turns exceeds tolerance")]
    WindingResidual { residual: f64 },
    /// Adaptive refinement exceeded its sample budget.
    #[error("refinement exceeded {budget} samples on segment {segment}")]
    RefinementBudget { budget: usize, segment: usize },
    /// The contour case does not apply to the given spec.
    #[error("case/spec mismatch: {0}")]
    CaseMismatch(String),
    /// A cumulant sequence is too short for the requested functional.
    #[error("insufficient sequence length: need {need}, have {have}")]
    InsufficientLength { need: usize, have: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

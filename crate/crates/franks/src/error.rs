//! Error type shared by all library modules.

use thiserror::Error;

/// Errors surfaced by the numerical kernels and perturbation mechanisms.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An ODE state component overflowed or became NaN during integration.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    /// Two matrices (or maps) of incompatible sizes were combined.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A solution required to stay away from zero (or stay invertible)
    /// crossed the singularity threshold.
    #[error("singular solution at t = {t} (value {value:e})")]
    SingularSolution { t: f64, value: f64 },

    /// A Riccati solution left the trusted range.
    #[error("riccati blow-up at t = {t}")]
    BlowUp { t: f64 },

    /// A constructed perturbation function failed one of its declared
    /// constraints.
    #[error("constraint violation in {family}: {constraint} (got {detail:e})")]
    ConstraintViolation {
        family: &'static str,
        constraint: &'static str,
        detail: f64,
    },

    /// `a - ψ` dipped below the positivity threshold.
    #[error("positivity violation at t = {t}: a - psi = {value:e}")]
    PositivityViolation { t: f64, value: f64 },

    /// Newton iteration failed to reach the residual tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The requested target lies outside the published realization ball.
    #[error("target outside realization ball: distance {distance:e} > {delta_est:e}")]
    OutOfBall { distance: f64, delta_est: f64 },

    /// The transverse Jacobi factor of a synthesized chart crossed zero.
    #[error("focal point inside chart at t = {t}, x = {x}")]
    FocalPoint { t: f64, x: f64 },

    /// Interpolation tube wider than the chart it lives in.
    #[error("tube width {eta} exceeds chart half-width {x_max}")]
    WidthExceedsChart { eta: f64, x_max: f64 },

    /// A quantitative estimate failed; the tube is not yet thin enough.
    #[error("estimate violated ({which}): measured {measured:e} > bound {bound:e}")]
    EstimateViolated {
        which: &'static str,
        measured: f64,
        bound: f64,
    },

    /// The curvature matrix has (numerically) repeated eigenvalues, so the
    /// rotation mechanism has nothing to work with.
    #[error("no distinct-eigenvalue point: max h = {h:e}")]
    NoDistinctEigenvalues { h: f64 },

    /// Remainders sank below the solver noise floor; the fitted exponent is
    /// meaningless.
    #[error("degenerate fit: remainders at noise floor ({floor:e})")]
    DegenerateFit { floor: f64 },
}

impl Error {
    /// Stable machine-readable name, used by the CLI diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SingularSolution { .. } => "SingularSolution",
            Error::BlowUp { .. } => "BlowUp",
            Error::ConstraintViolation { .. } => "ConstraintViolation",
            Error::PositivityViolation { .. } => "PositivityViolation",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::OutOfBall { .. } => "OutOfBall",
            Error::FocalPoint { .. } => "FocalPoint",
            Error::WidthExceedsChart { .. } => "WidthExceedsChart",
            Error::EstimateViolated { .. } => "EstimateViolated",
            Error::NoDistinctEigenvalues { .. } => "NoDistinctEigenvalues",
            Error::DegenerateFit { .. } => "DegenerateFit",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

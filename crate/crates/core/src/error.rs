use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("radial profile has no zero on (0, {r_inf}]")]
    NoZeroFound { r_inf: f64 },

    #[error("ODE integration broke down at r = {r}")]
    StepFailure { r: f64 },

    #[error("kernel evaluated at coincident points")]
    SingularPoint,

    #[error("no single sign change of u along the ray zeta = {zeta}")]
    NoSignChange { zeta: f64 },

    #[error("near-axis centrifugal integrand is not integrable")]
    DivergentAxisIntegral,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linearization is numerically singular: sigma_min = {sigma_min:e} (threshold {threshold:e})")]
    SingularLinearization { sigma_min: f64, threshold: f64 },

    #[error("mode iteration for degree {j} did not converge after {iterations} iterations")]
    ModeNonConvergence { j: usize, iterations: usize },

    #[error("root is not bracketed: f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("gamma = 4/3: the mass does not determine the central density")]
    GammaFourThirds,

    #[error("mass is stationary in the central density (dM/drho = {derivative:e})")]
    StationaryMass { derivative: f64 },

    #[error("solve failed at beta = {beta}: {source}")]
    Continuation {
        beta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::Domain(_) => "Domain",
            Error::NoZeroFound { .. } => "NoZeroFound",
            Error::StepFailure { .. } => "StepFailure",
            Error::SingularPoint => "SingularPoint",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::DivergentAxisIntegral => "DivergentAxisIntegral",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularLinearization { .. } => "SingularLinearization",
            Error::ModeNonConvergence { .. } => "ModeNonConvergence",
            Error::NoBracket { .. } => "NoBracket",
            Error::GammaFourThirds => "GammaFourThirds",
            Error::StationaryMass { .. } => "StationaryMass",
            Error::Continuation { .. } => "Continuation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

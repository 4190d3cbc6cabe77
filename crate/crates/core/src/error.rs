use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical pipeline.
///
/// Every variant is a defined outcome of some operation; none of them are
/// recovered from silently inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("gapless Bloch spectrum: |det H(k)| = {modulus:e} at k = {k}")]
    Gapless { k: f64, modulus: f64 },

    #[error("winding not integer after refinement to {n_k} points (accumulated {winding})")]
    NonIntegerWinding { n_k: usize, winding: f64 },

    #[error("gain/loss rate {gamma} lies on a phase boundary")]
    PhaseBoundary { gamma: f64 },

    #[error("singular resolvent at omega = {omega} (condition estimate {condition:e})")]
    SingularResolvent { omega: f64, condition: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("covariance is not positive definite: {0}")]
    NonPositiveCovariance(String),

    #[error("Fisher information {0:e} is too small for a Cramer-Rao bound")]
    ZeroInformation(f64),

    #[error("likelihood is monotone on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("no linear window in log data: {0}")]
    NoLinearWindow(String),

    #[error("edge mode ambiguous: eigenvalues {first} and {second} tie for minimal modulus")]
    EdgeModeAmbiguous { first: f64, second: f64 },
}

impl Error {
    /// Short stable identifier used in CSV reason columns and diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::Gapless { .. } => "gapless",
            Error::NonIntegerWinding { .. } => "non_integer_winding",
            Error::PhaseBoundary { .. } => "phase_boundary",
            Error::SingularResolvent { .. } => "singular_resolvent",
            Error::Dimension { .. } => "dimension",
            Error::NonPositiveCovariance(_) => "non_positive_covariance",
            Error::ZeroInformation(_) => "zero_information",
            Error::Bracket { .. } => "bracket",
            Error::NoLinearWindow(_) => "no_linear_window",
            Error::EdgeModeAmbiguous { .. } => "edge_mode_ambiguous",
        }
    }
}

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants are grouped so that callers (the CLI in particular) can map
/// them onto "bad input" versus "numerical failure" without string matching;
/// see [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular wavenumber k = 0: {0}")]
    SingularWavenumber(&'static str),

    #[error("evaluation point is within pole tolerance of a resonance (|f| = {magnitude:e})")]
    PoleProximity { magnitude: f64 },

    #[error("bond is resonant at k = {k} (|sin kL| = {magnitude:e})")]
    ResonantBond { k: f64, magnitude: f64 },

    #[error("insufficient spectrum: {0}")]
    InsufficientSpectrum(String),

    #[error("extrapolation failed: {reason}")]
    Extrapolation {
        reason: String,
        samples: Vec<(f64, f64)>,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl Error {
    /// True for failures of a numerical procedure on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PoleProximity { .. }
                | Error::ResonantBond { .. }
                | Error::Extrapolation { .. }
                | Error::Quadrature(_)
                | Error::InsufficientSpectrum(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

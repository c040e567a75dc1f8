use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square with even dimension, got {rows}x{cols}")]
    BadDimension { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("symplectic spectrum is not paired within tolerance (pair {first:e}, {second:e})")]
    UnpairedSpectrum { first: f64, second: f64 },

    #[error("unphysical symplectic eigenvalue {0:e} < 1")]
    UnphysicalEigenvalue(f64),

    #[error("mode index {index} out of range for {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("mode indices must be distinct, got {0} twice")]
    DuplicateMode(usize),

    #[error("conditioning needs at least two modes, got {0}")]
    TooFewModes(usize),

    #[error("measured quadrature variance {0:e} is degenerate")]
    DegenerateMeasurement(f64),

    #[error("singular heterodyne block (determinant {0:e})")]
    SingularHeterodyne(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no physical covariance matrix is consistent with the measured entries")]
    EmptyFeasibleSet,

    #[error("unsupported protocol for this operation: {0}")]
    UnsupportedProtocol(&'static str),
}

impl Error {
    /// True for errors caused by invalid inputs rather than numerical failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::UnsupportedProtocol(_)
        )
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

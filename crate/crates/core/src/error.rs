use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration key is missing, duplicated or malformed.
    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("effective detuning must be positive, got {delta:e} rad/s")]
    NonPositiveDetuning { delta: f64 },

    #[error("pump above the stability threshold: alpha^2/alpha0^2 = {ratio}")]
    AboveThreshold { ratio: f64 },

    #[error("displacement {x:e} m outside the linearized domain |x| <= {limit:e} m")]
    OutsideLinearRegime { x: f64, limit: f64 },

    #[error("homodyne angle {theta} rad puts the optimal pump outside (0, alpha0^2)")]
    InvalidHomodyneAngle { theta: f64 },

    /// The inverse mechanical susceptibility vanishes at this frequency.
    #[error("singular mechanical response at omega = {omega:e} rad/s")]
    SingularResponse { omega: f64 },

    /// chi_F vanishes, so the force-referred noise is unbounded.
    #[error("no force transduction at omega = {omega:e} rad/s (chi_F = 0)")]
    NoForceTransduction { omega: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Classification used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => ErrorKind::InvalidInput,
            Error::NonPositiveDetuning { .. }
            | Error::AboveThreshold { .. }
            | Error::OutsideLinearRegime { .. }
            | Error::InvalidHomodyneAngle { .. } => ErrorKind::Physics,
            Error::SingularResponse { .. } | Error::NoForceTransduction { .. } | Error::Numerical(_) => {
                ErrorKind::Numerical
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Physics,
    Numerical,
}

//! Time-domain Langevin simulation of the linearized membrane/cavity model
//! and Welch spectral estimation, used as ground truth for the analytic
//! spectra in `optoforce-core`.
//!
//! Vacuum inputs are two independent real white noises of spectral height
//! ½. The antisymmetric ±i/2 cross-correlation of the quantum inputs drops
//! out of the spectrum of any single real homodyne record, which is all
//! that is estimated here, so classical noises reproduce it exactly.
//!
//! Everything runs in f64.

mod discretize;
mod psd;
mod simulate;
mod validate;

pub use discretize::{discrete_homodyne_psd, Discretization};
pub use psd::{estimate_psd, PsdEstimate, Welch};
pub use simulate::{
    simulate, slowest_decay_rate, stream_psd, Observable, SimulationConfig, Trajectory, TrajectoryEnsemble,
};
pub use validate::{validate, validate_against, ValidationBin, ValidationReport};

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// Unstable or otherwise unusable operating point.
    Physics(optoforce_core::Error),
    /// Configuration violates an integrator or estimator requirement.
    Config(String),
    /// Not enough data for the requested spectral estimate.
    TooFewSegments {
        available: usize,
        required: usize,
        hint_duration: f64,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Physics(e) => write!(f, "{e}"),
            OracleError::Config(s) => write!(f, "invalid simulation config: {s}"),
            OracleError::TooFewSegments { available, required, hint_duration } => write!(
                f,
                "{available} Welch segments available, {required} required; use a duration of at least {hint_duration:.6e} s"
            ),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<optoforce_core::Error> for OracleError {
    fn from(e: optoforce_core::Error) -> Self {
        OracleError::Physics(e)
    }
}

pub type Result<T> = std::result::Result<T, OracleError>;

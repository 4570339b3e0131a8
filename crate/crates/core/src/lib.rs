//! Force sensing with a membrane-in-the-middle optomechanical cavity driven
//! near its optical-spring instability.
//!
//! The physics is generic over the scalar type. The ℏ² terms in the
//! threshold and backaction expressions underflow in `f32` for realistic
//! parameters, so `f64` is the practical choice; aliases for it live at the
//! crate root.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod detection;
pub mod dynamics;
mod error;
pub mod numeric;
pub mod optimize;
pub mod params;
mod scalar;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub type SystemParams = params::SystemParams<f64>;
pub type MechanicalParams = params::MechanicalParams<f64>;
pub type CavityParams = params::CavityParams<f64>;
pub type OperatingPoint = params::OperatingPoint<f64>;
pub type DerivedQuantities = params::DerivedQuantities<f64>;
pub type LinearModel = params::LinearModel<f64>;
pub type StabilityReport = dynamics::StabilityReport<f64>;
pub type NoiseSpectrum = detection::NoiseSpectrum<f64>;
pub type SqueezingSpectrum = detection::SqueezingSpectrum<f64>;
pub type OptimalPoint = optimize::OptimalPoint<f64>;

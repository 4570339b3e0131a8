//! Normal-mode structure of the three-mirror cavity.

use crate::error::{Error, Result};
use crate::params::{c_light, CavityParams};
use crate::scalar::{sq, Real};

/// Largest displacement accepted by [`splitting`]: λ/8, i.e. |2kx| <= π/2.
pub fn linear_domain_limit<T: Real>(k: T) -> T {
    T::FRAC_PI_4() / k
}

/// Normal-mode splitting Ω(x) = (c/L)·arccos(|r_d|·cos 2kx).
///
/// The arccos is taken on its principal branch; displacements beyond λ/8
/// are rejected instead of wrapped.
pub fn splitting<T: Real>(reflectivity: T, x: T, k: T, length: T) -> Result<T> {
    if !(reflectivity > T::zero() && reflectivity <= T::one()) {
        return Err(Error::param(
            "middle_mirror_reflectivity",
            format!("must lie in (0, 1], got {reflectivity}"),
        ));
    }
    let limit = linear_domain_limit(k);
    if !(x.abs() <= limit) {
        return Err(Error::OutsideLinearRegime {
            x: x.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    let arg = (reflectivity * (T::two() * k * x).cos()).min(T::one());
    Ok(c_light::<T>() / length * arg.acos())
}

/// Eigenfrequencies ω_c ± sqrt(f²x² + g²) of the linearized two-mode
/// Hamiltonian, returned as (ω₊, ω₋).
pub fn branch_frequencies<T: Real>(x: T, g: T, f: T, omega_c: T) -> (T, T) {
    let half = (sq(f * x) + sq(g)).sqrt();
    (omega_c + half, omega_c - half)
}

/// Mode positions on a displacement grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeStructure<T> {
    pub x: Vec<T>,
    pub splitting: Vec<T>,
    /// ω_c + Ω/2.
    pub omega_plus: Vec<T>,
    /// ω_c - Ω/2.
    pub omega_minus: Vec<T>,
}

impl<T: Real> ModeStructure<T> {
    pub fn sweep(cavity: &CavityParams<T>, xs: &[T]) -> Result<Self> {
        let k = cavity.wavenumber();
        let wc = cavity.omega_c();
        let mut out = Self {
            x: Vec::with_capacity(xs.len()),
            splitting: Vec::with_capacity(xs.len()),
            omega_plus: Vec::with_capacity(xs.len()),
            omega_minus: Vec::with_capacity(xs.len()),
        };
        for &x in xs {
            let omega = splitting(cavity.reflectivity, x, k, cavity.subcavity_length)?;
            out.x.push(x);
            out.splitting.push(omega);
            out.omega_plus.push(wc + omega / T::two());
            out.omega_minus.push(wc - omega / T::two());
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

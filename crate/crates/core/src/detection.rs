//! Homodyne read-out: signal susceptibilities, force noise η(ω), squeezing
//! spectrum, detection-efficiency corrections and the SQL reference.
//!
//! The homodyne signal is S = sinθ·X_out + cosθ·Y_out with
//! X_out = sqrt(2κ)·X - X_in; input vacuum quadratures have spectral height
//! ½, so the vacuum level of S is ½.

use num_complex::Complex;

use crate::dynamics::{bare_susceptibility, cavity_denominator, susceptibility};
use crate::error::{Error, Result};
use crate::params::{hbar, LinearModel};
use crate::scalar::{lit, sq, Real};

/// (χ_F, χ_X, χ_Y) at one (ω, θ): S = χ_F·F_in + χ_X·X_in + χ_Y·Y_in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityTriple<T> {
    pub omega: T,
    pub theta: T,
    /// Force susceptibility, 1/N·√s.
    pub chi_f: Complex<T>,
    pub chi_x: Complex<T>,
    pub chi_y: Complex<T>,
}

impl<T: Real> SusceptibilityTriple<T> {
    /// χ_X - iχ_Y, the combination that carries the optical noise.
    pub fn optical(&self) -> Complex<T> {
        self.chi_x - Complex::<T>::i() * self.chi_y
    }
}

pub fn susceptibilities<T: Real>(model: &LinearModel<T>, theta: T, omega: T) -> Result<SusceptibilityTriple<T>> {
    let chi = susceptibility(model, omega)?;
    let c = |v: T| Complex::new(v, T::zero());
    let (s, co) = theta.sin_cos();
    let (k, d, g) = (model.kappa, model.delta, model.coupling);
    let kw = Complex::new(k, -omega);
    let den = cavity_denominator(model, omega);
    let den_inv = den.inv();
    let u = c(d * s) + kw * c(co);
    let backaction = c(lit::<T>(4.0) * hbar::<T>() * k * sq(g)) * u * chi * den_inv * den_inv;
    let mixed = sq(k) + sq(omega) - sq(d);
    let two_kd = T::two() * k * d;
    Ok(SusceptibilityTriple {
        omega,
        theta,
        chi_f: c(T::two() * k.sqrt() * g) * u * chi * den_inv,
        chi_x: backaction * kw + c(mixed * s - two_kd * co) * den_inv,
        chi_y: backaction * c(d) + c(two_kd * s + mixed * co) * den_inv,
    })
}

/// Force-noise decomposition at one frequency, N²/Hz.
///
/// `backaction` ∝ G², `imprecision` ∝ 1/G², `cross` is their interference;
/// `inefficiency` is non-zero only after [`DetectionEfficiency::with_efficiency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseComponents<T> {
    pub omega: T,
    pub thermal: T,
    pub backaction: T,
    pub imprecision: T,
    pub cross: T,
    pub inefficiency: T,
    pub total: T,
    /// |χ_F(ω)|².
    pub chi_f_sq: T,
}

impl<T: Real> NoiseComponents<T> {
    pub fn component_sum(&self) -> T {
        self.thermal + self.backaction + self.imprecision + self.cross + self.inefficiency
    }

    /// Amplitude sensitivity sqrt(η), N/√Hz.
    pub fn amplitude(&self) -> T {
        self.total.sqrt()
    }
}

/// η(ω) = 2mγk_BT + ½|(χ_X - iχ_Y)/χ_F|².
///
/// The optical part is split as ½|A + B|² with
/// A = 2ℏ√κG/(κ - iω + iΔ) (back-action) and
/// B = [(κ - iΔ)² + ω²]/(2√κG)·(sinθ - i cosθ)/(Δ sinθ + (κ - iω) cosθ)·χ⁻¹
/// (imprecision).
pub fn sensitivity_at<T: Real>(model: &LinearModel<T>, theta: T, omega: T) -> Result<NoiseComponents<T>> {
    let triple = susceptibilities(model, theta, omega)?;
    let chi_f_sq = triple.chi_f.norm_sqr();
    if !(chi_f_sq > T::zero()) {
        return Err(Error::NoForceTransduction {
            omega: omega.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = lit::<T>(0.5);
    let thermal = model.thermal_force_psd();
    let optical = half * (triple.optical() / triple.chi_f).norm_sqr();

    let c = |v: T| Complex::new(v, T::zero());
    let (s, co) = theta.sin_cos();
    let (k, d, g) = (model.kappa, model.delta, model.coupling);
    let sqrt_k = k.sqrt();
    let a = c(T::two() * hbar::<T>() * sqrt_k * g) / Complex::new(k, d - omega);
    let chi_inv = susceptibility(model, omega)?.inv();
    let kd = Complex::new(k, -d);
    let b = (kd * kd + c(sq(omega))) / c(T::two() * sqrt_k * g) * Complex::new(s, -co)
        / (c(d * s) + Complex::new(k, -omega) * c(co))
        * chi_inv;

    Ok(NoiseComponents {
        omega,
        thermal,
        backaction: half * a.norm_sqr(),
        imprecision: half * b.norm_sqr(),
        cross: (a * b.conj()).re,
        inefficiency: T::zero(),
        total: thermal + optical,
        chi_f_sq,
    })
}

/// ½[η(ω) + η(-ω)]: the spectrum of a real, time-stationary record, which
/// is what a periodogram of simulated data estimates.
pub fn symmetrized_sensitivity<T: Real>(model: &LinearModel<T>, theta: T, omega: T) -> Result<T> {
    let a = sensitivity_at(model, theta, omega)?.total;
    let b = sensitivity_at(model, theta, -omega)?.total;
    Ok((a + b) / T::two())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum<T> {
    pub theta: T,
    pub points: Vec<NoiseComponents<T>>,
}

impl<T: Real> NoiseSpectrum<T> {
    pub fn omega(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.omega)
    }

    pub fn total(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.total)
    }
}

pub fn sensitivity<T: Real>(model: &LinearModel<T>, theta: T, grid: &[T]) -> Result<NoiseSpectrum<T>> {
    let points = grid
        .iter()
        .map(|&w| sensitivity_at(model, theta, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseSpectrum { theta, points })
}

/// Squeezing spectrum of the homodyne record at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingPoint<T> {
    pub omega: T,
    /// 2mγk_BT·|χ_F|².
    pub thermal: T,
    /// ½|χ_X - iχ_Y|².
    pub optical: T,
    pub inefficiency: T,
    pub total: T,
}

impl<T: Real> SqueezingPoint<T> {
    /// 10·log10(S̃), relative to 1 (negative means below 1).
    pub fn db_rel_unity(&self) -> T {
        lit::<T>(10.0) * self.total.log10()
    }

    /// 10·log10(S̃/½), relative to the vacuum level.
    pub fn db_rel_vacuum(&self) -> T {
        lit::<T>(10.0) * (self.total * T::two()).log10()
    }

    pub fn component_sum(&self) -> T {
        self.thermal + self.optical + self.inefficiency
    }
}

/// S̃(ω) = 2mγk_BT|χ_F|² + ½|χ_X - iχ_Y|².
pub fn squeezing_at<T: Real>(model: &LinearModel<T>, theta: T, omega: T) -> Result<SqueezingPoint<T>> {
    let t = susceptibilities(model, theta, omega)?;
    let thermal = model.thermal_force_psd() * t.chi_f.norm_sqr();
    let optical = lit::<T>(0.5) * t.optical().norm_sqr();
    Ok(SqueezingPoint {
        omega,
        thermal,
        optical,
        inefficiency: T::zero(),
        total: thermal + optical,
    })
}

pub fn symmetrized_squeezing<T: Real>(model: &LinearModel<T>, theta: T, omega: T) -> Result<T> {
    let a = squeezing_at(model, theta, omega)?.total;
    let b = squeezing_at(model, theta, -omega)?.total;
    Ok((a + b) / T::two())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum<T> {
    pub theta: T,
    pub points: Vec<SqueezingPoint<T>>,
}

pub fn squeezing_spectrum<T: Real>(model: &LinearModel<T>, theta: T, grid: &[T]) -> Result<SqueezingSpectrum<T>> {
    let points = grid
        .iter()
        .map(|&w| squeezing_at(model, theta, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SqueezingSpectrum { theta, points })
}

/// Finite homodyne efficiency P: the measured record is
/// sqrt(P)·S + sqrt(1-P)·X', with X' an extra vacuum quadrature.
pub trait DetectionEfficiency: Sized {
    fn with_efficiency(&self, efficiency: f64) -> Result<Self>;
}

fn check_efficiency(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("efficiency", format!("must lie in (0, 1], got {p}")))
    }
}

impl<T: Real> DetectionEfficiency for NoiseSpectrum<T> {
    /// η'(ω) = η(ω) + (1-P)/(2P·|χ_F(ω)|²).
    fn with_efficiency(&self, efficiency: f64) -> Result<Self> {
        check_efficiency(efficiency)?;
        let p: T = lit(efficiency);
        let points = self
            .points
            .iter()
            .map(|pt| {
                let extra = (T::one() - p) / (T::two() * p * pt.chi_f_sq);
                NoiseComponents {
                    inefficiency: pt.inefficiency + extra,
                    total: pt.total + extra,
                    ..*pt
                }
            })
            .collect();
        Ok(Self {
            theta: self.theta,
            points,
        })
    }
}

impl<T: Real> DetectionEfficiency for SqueezingSpectrum<T> {
    /// S̃' = P·S̃ + (1-P)/2, which tends to S̃ + (1-P)/2 as P → 1.
    fn with_efficiency(&self, efficiency: f64) -> Result<Self> {
        check_efficiency(efficiency)?;
        let p: T = lit(efficiency);
        let floor = (T::one() - p) / T::two();
        let points = self
            .points
            .iter()
            .map(|pt| SqueezingPoint {
                thermal: pt.thermal * p,
                optical: pt.optical * p,
                inefficiency: pt.inefficiency * p + floor,
                total: pt.total * p + floor,
                ..*pt
            })
            .collect();
        Ok(Self {
            theta: self.theta,
            points,
        })
    }
}

pub fn apply_efficiency<S: DetectionEfficiency>(spectrum: &S, efficiency: f64) -> Result<S> {
    spectrum.with_efficiency(efficiency)
}

/// DC efficiency penalty at the near-critical optimum,
/// ℏmω_m²·(1-P)/(1-ξ)·κ/Δ (leading order as P → 1).
pub fn dc_efficiency_penalty<T: Real>(model: &LinearModel<T>, xi: T, efficiency: T) -> T {
    hbar::<T>() * model.mass * sq(model.omega_m) * (T::one() - efficiency) / (T::one() - xi) * model.kappa / model.delta
}

/// Standard-quantum-limit force noise ℏ/|χ_bare(ω)|, N²/Hz.
pub fn sql_reference<T: Real>(model: &LinearModel<T>, omega: T) -> T {
    hbar::<T>() / bare_susceptibility(model, omega).norm()
}

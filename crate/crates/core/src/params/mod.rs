//! Parameter model: physical constants, mechanical and cavity parameters,
//! the operating point and every quantity derived from them.
//!
//! All internal math is SI with angular frequencies in rad/s. The amplitude
//! of the pumped mode, α, is taken real and non-negative throughout; the
//! pump phase is not a free parameter anywhere in the crate.

mod file;

pub use file::{ParamFile, KEY_GROUPS};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::optimize::{optimal_pump_ratio, PumpRule};
use crate::scalar::{lit, sq, Real};

/// CODATA values of the constants used by the model.
pub mod constants {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Speed of light in vacuum, m/s.
    pub const C_LIGHT: f64 = 299_792_458.0;
}

#[inline]
pub fn hbar<T: Real>() -> T {
    lit(constants::HBAR)
}

#[inline]
pub fn k_b<T: Real>() -> T {
    lit(constants::K_B)
}

#[inline]
pub fn c_light<T: Real>() -> T {
    lit(constants::C_LIGHT)
}

fn require_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Mechanical oscillator and its thermal bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams<T> {
    /// Effective mass, kg.
    pub mass: T,
    /// Bare resonance, rad/s.
    pub omega_m: T,
    /// Energy damping rate, rad/s.
    pub gamma: T,
    /// Bath temperature, K.
    pub temperature: T,
}

impl<T: Real> MechanicalParams<T> {
    /// Temperature may be zero (thermal force switched off); everything else
    /// must be strictly positive and the oscillator underdamped.
    pub fn new(mass: T, omega_m: T, gamma: T, temperature: T) -> Result<Self> {
        require_positive("mass_kg", mass)?;
        require_positive("omega_m_rad_s", omega_m)?;
        require_positive("gamma_rad_s", gamma)?;
        if !(temperature.is_finite() && temperature >= T::zero()) {
            return Err(Error::param(
                "temperature_K",
                format!("must be finite and >= 0, got {temperature}"),
            ));
        }
        if gamma >= omega_m {
            return Err(Error::param(
                "gamma_rad_s",
                format!("oscillator must be underdamped (gamma < omega_m), got {gamma} >= {omega_m}"),
            ));
        }
        Ok(Self {
            mass,
            omega_m,
            gamma,
            temperature,
        })
    }

    pub fn quality_factor(&self) -> T {
        self.omega_m / self.gamma
    }

    /// n_th = k_B T / ℏω_m (high-temperature occupancy).
    pub fn thermal_occupancy(&self) -> T {
        k_b::<T>() * self.temperature / (hbar::<T>() * self.omega_m)
    }

    /// White thermal force spectral density 2mγk_BT, N²/Hz.
    pub fn thermal_force_psd(&self) -> T {
        T::two() * self.mass * self.gamma * k_b::<T>() * self.temperature
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalFrequency<T> {
    /// Vacuum wavelength, m.
    Wavelength(T),
    /// Angular frequency ω_c, rad/s.
    Angular(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Linewidth<T> {
    /// Amplitude decay rate κ, rad/s.
    Kappa(T),
    /// Finesse F of a subcavity, κ = πc/(L·F).
    Finesse(T),
}

/// Three-mirror cavity: two identical subcavities of length L separated by a
/// partially transmitting middle mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    pub frequency: OpticalFrequency<T>,
    /// Length of each subcavity, m.
    pub subcavity_length: T,
    pub linewidth: Linewidth<T>,
    /// Amplitude reflectivity |r_d| of the middle mirror, in (0, 1).
    pub reflectivity: T,
}

impl<T: Real> CavityParams<T> {
    pub fn new(
        frequency: OpticalFrequency<T>,
        subcavity_length: T,
        linewidth: Linewidth<T>,
        reflectivity: T,
    ) -> Result<Self> {
        match frequency {
            OpticalFrequency::Wavelength(v) => require_positive("wavelength_m", v)?,
            OpticalFrequency::Angular(v) => require_positive("omega_c_rad_s", v)?,
        }
        require_positive("subcavity_length_m", subcavity_length)?;
        match linewidth {
            Linewidth::Kappa(v) => require_positive("kappa_rad_s", v)?,
            Linewidth::Finesse(v) => require_positive("finesse", v)?,
        }
        if !(reflectivity > T::zero() && reflectivity < T::one()) {
            return Err(Error::param(
                "middle_mirror_reflectivity",
                format!("must lie in (0, 1), got {reflectivity}"),
            ));
        }
        Ok(Self {
            frequency,
            subcavity_length,
            linewidth,
            reflectivity,
        })
    }

    pub fn omega_c(&self) -> T {
        match self.frequency {
            OpticalFrequency::Angular(w) => w,
            OpticalFrequency::Wavelength(l) => T::two() * T::PI() * c_light::<T>() / l,
        }
    }

    pub fn wavelength(&self) -> T {
        match self.frequency {
            OpticalFrequency::Wavelength(l) => l,
            OpticalFrequency::Angular(w) => T::two() * T::PI() * c_light::<T>() / w,
        }
    }

    /// Optical wave number k = ω_c / c.
    pub fn wavenumber(&self) -> T {
        self.omega_c() / c_light::<T>()
    }

    pub fn kappa(&self) -> T {
        match self.linewidth {
            Linewidth::Kappa(k) => k,
            Linewidth::Finesse(f) => T::PI() * c_light::<T>() / (self.subcavity_length * f),
        }
    }

    pub fn finesse(&self) -> T {
        match self.linewidth {
            Linewidth::Finesse(f) => f,
            Linewidth::Kappa(k) => T::PI() * c_light::<T>() / (self.subcavity_length * k),
        }
    }

    /// |t_d| = sqrt(1 - |r_d|²).
    pub fn transmissivity(&self) -> T {
        (T::one() - sq(self.reflectivity)).sqrt()
    }

    /// Q_c = ω_c / κ.
    pub fn quality_factor(&self) -> T {
        self.omega_c() / self.kappa()
    }

    /// Tunnel coupling g = arccos(|r_d|)·c/(2L) between the subcavity modes.
    pub fn coupling_g(&self) -> T {
        self.reflectivity.acos() * c_light::<T>() / (T::two() * self.subcavity_length)
    }

    /// Frequency pull per unit displacement,
    /// f = -sqrt(|r_d|·arcsin|t_d| / |t_d|)·ω_c/L.
    pub fn frequency_pull(&self) -> T {
        let t = self.transmissivity();
        let ratio = if t > T::zero() { t.asin() / t } else { T::one() };
        -(self.reflectivity * ratio).sqrt() * self.omega_c() / self.subcavity_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub mechanical: MechanicalParams<T>,
    pub cavity: CavityParams<T>,
}

impl<T: Real> SystemParams<T> {
    pub fn new(mechanical: MechanicalParams<T>, cavity: CavityParams<T>) -> Self {
        Self { mechanical, cavity }
    }
}

/// Which side of the critical angle θ₀ the homodyne angle sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// θ = θ₀ + δθ with δθ > 0; the default, stable approach.
    #[default]
    Above,
    /// θ = θ₀ - δθ; mirrored branch with the sign of the optimal-pump
    /// correction flipped.
    Below,
}

impl Branch {
    pub(crate) fn sign<T: Real>(self) -> T {
        match self {
            Branch::Above => T::one(),
            Branch::Below => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pump<T> {
    /// Input laser power P_in, W.
    Power(T),
    /// Intracavity amplitude α of the pumped mode (real, >= 0).
    Amplitude(T),
    /// Pump set to the optimum for the configured homodyne angle.
    Optimal(PumpRule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detuning<T> {
    /// Laser detuning Δ_c = ω_c - ω_L from the bare subcavity resonance.
    Cavity(T),
    /// Effective detuning Δ = Δ_c + g seen by the probe mode.
    Effective(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Homodyne<T> {
    /// Absolute homodyne angle θ, rad.
    Angle(T),
    /// Offset from θ₀ expressed through ξ = δθ·2κ/Δ.
    Offset { xi: T, branch: Branch },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    pub pump: Pump<T>,
    pub detuning: Detuning<T>,
    pub homodyne: Homodyne<T>,
    /// Homodyne detection efficiency in (0, 1].
    pub efficiency: T,
}

impl<T: Real> OperatingPoint<T> {
    pub fn new(pump: Pump<T>, detuning: Detuning<T>, homodyne: Homodyne<T>) -> Self {
        Self {
            pump,
            detuning,
            homodyne,
            efficiency: T::one(),
        }
    }

    pub fn with_efficiency(mut self, efficiency: T) -> Self {
        self.efficiency = efficiency;
        self
    }
}

/// The reduced single-mode linear model: oscillator coupled to the probe
/// mode with linearized strength G = ω_c·α/L.
///
/// This is what every frequency-domain routine consumes. Its fields are
/// public so that callers can explore configurations that `derive` would
/// refuse (e.g. negative detuning in a negative control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel<T> {
    pub mass: T,
    pub omega_m: T,
    pub gamma: T,
    pub temperature: T,
    pub kappa: T,
    /// Effective detuning Δ, rad/s.
    pub delta: T,
    /// G, rad/(s·m).
    pub coupling: T,
}

impl<T: Real> LinearModel<T> {
    /// Threshold G₀² = mω_m²(κ²+Δ²)/(2ℏΔ); G² = G₀² ⇔ α² = α₀².
    pub fn threshold_coupling_sq(&self) -> T {
        self.mass * sq(self.omega_m) * (sq(self.kappa) + sq(self.delta)) / (T::two() * hbar::<T>() * self.delta)
    }

    /// α²/α₀² (equivalently G²/G₀²).
    pub fn pump_ratio(&self) -> T {
        sq(self.coupling) / self.threshold_coupling_sq()
    }

    /// Critical angle θ₀ = -arctan(κ/Δ).
    pub fn theta0(&self) -> T {
        -(self.kappa / self.delta).atan()
    }

    /// Strength 2ℏG²Δ/m of the optical spring term, (rad/s)².
    pub fn spring_strength(&self) -> T {
        T::two() * hbar::<T>() * sq(self.coupling) * self.delta / self.mass
    }

    pub fn thermal_force_psd(&self) -> T {
        T::two() * self.mass * self.gamma * k_b::<T>() * self.temperature
    }

    pub fn with_coupling(mut self, coupling: T) -> Self {
        self.coupling = coupling;
        self
    }

    /// Same model with G chosen so that α²/α₀² = `ratio`.
    pub fn with_pump_ratio(self, ratio: T) -> Self {
        let g = (ratio * self.threshold_coupling_sq()).sqrt();
        self.with_coupling(g)
    }

    pub fn with_temperature(mut self, temperature: T) -> Self {
        self.temperature = temperature;
        self
    }

    /// Homodyne angle θ₀ ± ξΔ/(2κ).
    pub fn theta_from_offset(&self, xi: T, branch: Branch) -> T {
        theta_from_offset(xi, self.kappa, self.delta, branch)
    }
}

/// |E| = sqrt(P_in·κ/(ℏω_L)) with ω_L ≈ ω_c.
pub fn drive_from_power<T: Real>(power: T, kappa: T, omega_c: T) -> T {
    (power * kappa / (hbar::<T>() * omega_c)).sqrt()
}

pub fn power_from_drive<T: Real>(drive: T, kappa: T, omega_c: T) -> T {
    hbar::<T>() * omega_c * sq(drive) / kappa
}

/// Steady-state amplitude α = E/[i(Δ_c - g) + κ] for a real drive E.
pub fn amplitude_from_drive<T: Real>(drive: T, delta_c: T, g: T, kappa: T) -> Complex<T> {
    Complex::new(drive, T::zero()) / Complex::new(kappa, delta_c - g)
}

/// Drive |E| that produces an intracavity amplitude of modulus `alpha`.
pub fn drive_from_amplitude<T: Real>(alpha: T, delta_c: T, g: T, kappa: T) -> T {
    alpha * (sq(delta_c - g) + sq(kappa)).sqrt()
}

/// θ = θ₀ ± ξΔ/(2κ).
pub fn theta_from_offset<T: Real>(xi: T, kappa: T, delta: T, branch: Branch) -> T {
    let theta0 = -(kappa / delta).atan();
    theta0 + branch.sign::<T>() * xi * delta / (T::two() * kappa)
}

/// Everything derived from (`SystemParams`, `OperatingPoint`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities<T> {
    pub omega_c: T,
    pub kappa: T,
    pub finesse: T,
    /// Subcavity tunnel coupling g, rad/s.
    pub g: T,
    /// Frequency pull f, rad/(s·m).
    pub f: T,
    pub delta_c: T,
    pub delta: T,
    /// Stability threshold α₀².
    pub alpha0_sq: T,
    /// Real, non-negative pumped-mode amplitude α.
    pub alpha: T,
    /// Drive strength |E|, s⁻¹.
    pub drive: T,
    /// Input laser power, W.
    pub pump_power: T,
    /// G = ω_c·α/L.
    pub coupling: T,
    pub theta0: T,
    pub theta: T,
    /// θ - θ₀.
    pub delta_theta: T,
    /// ξ = |δθ|·2κ/Δ.
    pub xi: T,
    pub branch: Branch,
    pub n_th: T,
    pub q_m: T,
    pub q_c: T,
    pub efficiency: T,
    pub model: LinearModel<T>,
}

impl<T: Real> DerivedQuantities<T> {
    /// α²/α₀².
    pub fn pump_ratio(&self) -> T {
        sq(self.alpha) / self.alpha0_sq
    }

    /// The same operating point with the pump expressed as a laser power.
    pub fn power_point(&self) -> OperatingPoint<T> {
        OperatingPoint {
            pump: Pump::Power(self.pump_power),
            detuning: Detuning::Cavity(self.delta_c),
            homodyne: Homodyne::Angle(self.theta),
            efficiency: self.efficiency,
        }
    }

    /// The same operating point with the pump expressed as an amplitude.
    pub fn amplitude_point(&self) -> OperatingPoint<T> {
        OperatingPoint {
            pump: Pump::Amplitude(self.alpha),
            detuning: Detuning::Effective(self.delta),
            homodyne: Homodyne::Offset {
                xi: self.xi,
                branch: self.branch,
            },
            efficiency: self.efficiency,
        }
    }
}

/// Resolves an operating point against the system parameters.
///
/// Fails when the effective detuning Δ = Δ_c + g is not positive, when the
/// efficiency is outside (0, 1], or when an optimal pump is requested at an
/// angle where it would not lie in (0, α₀²). A pump above threshold is not
/// an error here; `dynamics::stability` reports it.
pub fn derive<T: Real>(params: &SystemParams<T>, op: &OperatingPoint<T>) -> Result<DerivedQuantities<T>> {
    let mech = &params.mechanical;
    let cav = &params.cavity;
    let omega_c = cav.omega_c();
    let kappa = cav.kappa();
    let g = cav.coupling_g();
    let f = cav.frequency_pull();
    let length = cav.subcavity_length;

    let (delta_c, delta) = match op.detuning {
        Detuning::Cavity(dc) => (dc, dc + g),
        Detuning::Effective(d) => (d - g, d),
    };
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::NonPositiveDetuning {
            delta: delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(op.efficiency > T::zero() && op.efficiency <= T::one()) {
        return Err(Error::param(
            "efficiency",
            format!("must lie in (0, 1], got {}", op.efficiency),
        ));
    }

    let alpha0_sq = mech.mass * sq(mech.omega_m) * sq(length) * (sq(kappa) + sq(delta))
        / (T::two() * hbar::<T>() * delta * sq(omega_c));
    let theta0 = -(kappa / delta).atan();

    let (theta, branch) = match op.homodyne {
        Homodyne::Angle(th) => {
            let b = if th >= theta0 { Branch::Above } else { Branch::Below };
            (th, b)
        }
        Homodyne::Offset { xi, branch } => {
            if !(xi.is_finite() && xi >= T::zero()) {
                return Err(Error::param("xi", format!("must be finite and >= 0, got {xi}")));
            }
            (theta_from_offset(xi, kappa, delta, branch), branch)
        }
    };
    let delta_theta = theta - theta0;
    let xi = delta_theta.abs() * T::two() * kappa / delta;

    let (alpha, drive) = match op.pump {
        Pump::Power(p) => {
            if !(p.is_finite() && p >= T::zero()) {
                return Err(Error::param(
                    "pump_power_W",
                    format!("must be finite and >= 0, got {p}"),
                ));
            }
            let e = drive_from_power(p, kappa, omega_c);
            (amplitude_from_drive(e, delta_c, g, kappa).norm(), e)
        }
        Pump::Amplitude(a) => {
            if !(a.is_finite() && a >= T::zero()) {
                return Err(Error::param("alpha", format!("must be finite and >= 0, got {a}")));
            }
            (a, drive_from_amplitude(a, delta_c, g, kappa))
        }
        Pump::Optimal(rule) => {
            let ratio = optimal_pump_ratio(kappa, delta, theta, branch, rule)?;
            let a = (ratio * alpha0_sq).sqrt();
            (a, drive_from_amplitude(a, delta_c, g, kappa))
        }
    };
    let pump_power = power_from_drive(drive, kappa, omega_c);
    let coupling = omega_c * alpha / length;

    let model = LinearModel {
        mass: mech.mass,
        omega_m: mech.omega_m,
        gamma: mech.gamma,
        temperature: mech.temperature,
        kappa,
        delta,
        coupling,
    };

    Ok(DerivedQuantities {
        omega_c,
        kappa,
        finesse: cav.finesse(),
        g,
        f,
        delta_c,
        delta,
        alpha0_sq,
        alpha,
        drive,
        pump_power,
        coupling,
        theta0,
        theta,
        delta_theta,
        xi,
        branch,
        n_th: mech.thermal_occupancy(),
        q_m: mech.quality_factor(),
        q_c: omega_c / kappa,
        efficiency: op.efficiency,
        model,
    })
}

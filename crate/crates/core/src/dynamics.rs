//! Steady state, Routh–Hurwitz stability and the linear frequency response
//! of the reduced model.
//!
//! Fourier convention: d/dt → -iω, so the cavity enters through κ - iω.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::{amplitude_from_drive, hbar, DerivedQuantities, LinearModel};
use crate::scalar::{lit, sq, Real};

pub type Matrix4<T> = [[T; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<T> {
    /// ⟨a⟩ of the pumped mode (complex; its modulus is the model's α).
    pub alpha: Complex<T>,
    /// ⟨b⟩ of the probe mode.
    pub beta: Complex<T>,
    pub x_mean: T,
    pub p_mean: T,
}

/// Low-power fixed point: ⟨a⟩ = E/[i(Δ_c - g) + κ], everything else zero.
pub fn steady_state<T: Real>(derived: &DerivedQuantities<T>) -> Result<SteadyState<T>> {
    let ratio = derived.pump_ratio();
    if !(ratio < T::one()) {
        return Err(Error::AboveThreshold {
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(SteadyState {
        alpha: amplitude_from_drive(derived.drive, derived.delta_c, derived.g, derived.kappa),
        beta: Complex::new(T::zero(), T::zero()),
        x_mean: T::zero(),
        p_mean: T::zero(),
    })
}

/// Drift matrix of the fluctuations (x, p, X, Y) in SI units.
pub fn drift_matrix<T: Real>(model: &LinearModel<T>) -> Matrix4<T> {
    let z = T::zero();
    let s2 = T::SQRT_2();
    let m = model.mass;
    [
        [z, T::one() / m, z, z],
        [
            -m * sq(model.omega_m),
            -model.gamma,
            s2 * hbar::<T>() * model.coupling,
            z,
        ],
        [z, z, -model.kappa, model.delta],
        [s2 * model.coupling, z, -model.delta, -model.kappa],
    ]
}

/// Drift matrix in the coordinates q = x/x_s, P = p/(mω_m x_s) with
/// x_s = sqrt(ℏ/(mω_m)); every entry is a rate in rad/s. Similar to
/// [`drift_matrix`], so it has the same spectrum.
pub fn scaled_drift_matrix<T: Real>(model: &LinearModel<T>) -> Matrix4<T> {
    let z = T::zero();
    let g = T::SQRT_2() * model.coupling * zero_point_length(model);
    [
        [z, model.omega_m, z, z],
        [-model.omega_m, -model.gamma, g, z],
        [z, z, -model.kappa, model.delta],
        [g, z, -model.delta, -model.kappa],
    ]
}

/// x_s = sqrt(ℏ/(mω_m)).
pub fn zero_point_length<T: Real>(model: &LinearModel<T>) -> T {
    (hbar::<T>() / (model.mass * model.omega_m)).sqrt()
}

fn matmul<T: Real>(a: &Matrix4<T>, b: &Matrix4<T>) -> Matrix4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

/// Coefficients [1, c₁, c₂, c₃, c₄] of det(sI - A) (Faddeev–LeVerrier).
pub fn characteristic_polynomial<T: Real>(a: &Matrix4<T>) -> [T; 5] {
    let mut coeffs = [T::one(), T::zero(), T::zero(), T::zero(), T::zero()];
    let mut m = [[T::zero(); 4]; 4];
    for k in 1..=4 {
        // M_k = A·M_{k-1} + c_{k-1}·I, c_k = -tr(A·M_k)/k
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i] + coeffs[k - 1];
        }
        m = next;
        let am = matmul(a, &m);
        let trace = (0..4).fold(T::zero(), |acc, i| acc + am[i][i]);
        coeffs[k] = -trace / lit::<T>(k as f64);
    }
    coeffs
}

/// Hurwitz determinants Δ₁..Δ₄ of a monic quartic, plus the magnitude
/// scale of each (sum of absolute values of the products it is built from).
fn hurwitz_minors<T: Real>(c: &[T; 5]) -> ([T; 4], [T; 4]) {
    let (a0, a1, a2, a3, a4) = (c[0], c[1], c[2], c[3], c[4]);
    let d1 = a1;
    let d2 = a1 * a2 - a0 * a3;
    let s2 = (a1 * a2).abs() + (a0 * a3).abs();
    let d3 = a3 * d2 - a1 * a1 * a4;
    let s3 = (a3.abs() * s2) + (a1 * a1 * a4).abs();
    let d4 = a4 * d3;
    let s4 = a4.abs() * s3;
    ([d1, d2, d3, d4], [a1.abs(), s2, s3, s4])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T> {
    /// Quartic Routh–Hurwitz verdict; marginal cases count as unstable.
    pub stable: bool,
    /// Characteristic polynomial of the SI drift matrix, s⁴ first.
    pub characteristic_coefficients: [T; 5],
    /// Hurwitz minors of the polynomial with s measured in units of
    /// max(ω_m, κ, Δ).
    pub hurwitz_minors: [T; 4],
    /// Some minor vanished to within 1e-12 of its magnitude.
    pub marginal: bool,
    /// α²/α₀².
    pub pump_ratio: T,
    /// Closed-form threshold verdict α² < α₀².
    pub threshold_stable: bool,
}

/// Routh–Hurwitz analysis of the 4×4 drift matrix.
pub fn stability<T: Real>(model: &LinearModel<T>) -> Result<StabilityReport<T>> {
    if !(model.delta > T::zero()) {
        return Err(Error::NonPositiveDetuning {
            delta: model.delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scaled = characteristic_polynomial(&scaled_drift_matrix(model));
    let reference = model.omega_m.max(model.kappa).max(model.delta);
    let mut normalized = scaled;
    let mut power = T::one();
    for c in normalized.iter_mut() {
        *c = *c / power;
        power = power * reference;
    }
    let (minors, scales) = hurwitz_minors(&normalized);
    let tol: T = lit(1e-12);
    let marginal = minors.iter().zip(scales.iter()).any(|(d, s)| d.abs() <= tol * *s);
    let positive = minors.iter().all(|d| *d > T::zero());
    let pump_ratio = model.pump_ratio();
    Ok(StabilityReport {
        stable: positive && !marginal,
        characteristic_coefficients: characteristic_polynomial(&drift_matrix(model)),
        hurwitz_minors: minors,
        marginal,
        pump_ratio,
        threshold_stable: pump_ratio < T::one(),
    })
}

/// Pump ratio α²/α₀² at which the quartic test first reports instability,
/// found by bisection to relative precision `rtol`.
pub fn routh_hurwitz_threshold<T: Real>(model: &LinearModel<T>, rtol: T) -> Result<T> {
    let stable_at = |r: T| stability(&model.with_pump_ratio(r)).map(|s| s.stable);
    let mut lo = T::zero();
    if !stable_at(lo)? {
        return Ok(T::zero());
    }
    let mut hi = T::two();
    let mut guard = 0;
    while stable_at(hi)? {
        lo = hi;
        hi = hi * T::two();
        guard += 1;
        if guard > 60 {
            return Err(Error::Numerical("no instability found while raising the pump".into()));
        }
    }
    while hi - lo > rtol * hi {
        let mid = (lo + hi) / T::two();
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::two())
}

/// D(ω) = (κ - iω)² + Δ².
#[inline]
pub fn cavity_denominator<T: Real>(model: &LinearModel<T>, omega: T) -> Complex<T> {
    let k = Complex::new(model.kappa, -omega);
    k * k + Complex::new(sq(model.delta), T::zero())
}

/// Bracket ω_m² - ω² - iγω - 2ℏG²Δ/[m·D(ω)] whose inverse (over m) is χ.
pub fn inverse_susceptibility_bracket<T: Real>(model: &LinearModel<T>, omega: T) -> Complex<T> {
    let spring = Complex::new(model.spring_strength(), T::zero()) / cavity_denominator(model, omega);
    Complex::new(sq(model.omega_m) - sq(omega), -model.gamma * omega) - spring
}

/// (ω_m'², γ') such that the bracket equals ω_m'² - ω² - iγ'ω.
///
/// At ω = 0 the damping is the limit γ + 2κK/(κ²+Δ²)², K = 2ℏG²Δ/m.
pub fn effective_spring<T: Real>(model: &LinearModel<T>, omega: T) -> (T, T) {
    let b = inverse_susceptibility_bracket(model, omega);
    let omega_sq = b.re + sq(omega);
    let gamma = if omega == T::zero() {
        let d0 = sq(model.kappa) + sq(model.delta);
        model.gamma + T::two() * model.kappa * model.spring_strength() / sq(d0)
    } else {
        -b.im / omega
    };
    (omega_sq, gamma)
}

/// DC optical-spring frequency ω_m'² = ω_m² - 2ℏΔω_c²α²/(mL²(κ²+Δ²)).
pub fn dc_spring_frequency_sq<T: Real>(model: &LinearModel<T>) -> T {
    sq(model.omega_m) - model.spring_strength() / (sq(model.kappa) + sq(model.delta))
}

/// Complex coefficients of the intracavity quadratures in terms of
/// (x, X_in, Y_in):
/// X = x_coeffs·(x, X_in, Y_in), Y = y_coeffs·(x, X_in, Y_in).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureTransfer<T> {
    pub x_coeffs: [Complex<T>; 3],
    pub y_coeffs: [Complex<T>; 3],
}

pub fn quadrature_transfer<T: Real>(model: &LinearModel<T>, omega: T) -> QuadratureTransfer<T> {
    let d_inv = cavity_denominator(model, omega).inv();
    let kw = Complex::new(model.kappa, -omega);
    let c = |v: T| Complex::new(v, T::zero());
    let g = T::SQRT_2() * model.coupling;
    let port = (T::two() * model.kappa).sqrt();
    QuadratureTransfer {
        x_coeffs: [
            c(g * model.delta) * d_inv,
            kw * c(port) * d_inv,
            c(port * model.delta) * d_inv,
        ],
        y_coeffs: [kw * c(g) * d_inv, c(-port * model.delta) * d_inv, kw * c(port) * d_inv],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseAtFrequency<T> {
    pub omega: T,
    /// Mechanical susceptibility χ(ω), m/N.
    pub chi: Complex<T>,
    pub omega_m_eff_sq: T,
    pub gamma_eff: T,
    pub transfer: QuadratureTransfer<T>,
}

/// χ(ω) = {m[ω_m² - ω² - iγω - 2ℏG²Δ/m/((κ-iω)²+Δ²)]}⁻¹.
pub fn mech_susceptibility<T: Real>(model: &LinearModel<T>, omega: T) -> Result<ResponseAtFrequency<T>> {
    Ok(ResponseAtFrequency {
        omega,
        chi: susceptibility(model, omega)?,
        omega_m_eff_sq: effective_spring(model, omega).0,
        gamma_eff: effective_spring(model, omega).1,
        transfer: quadrature_transfer(model, omega),
    })
}

/// χ(ω) alone; a vanishing bracket is reported as a singular response.
pub fn susceptibility<T: Real>(model: &LinearModel<T>, omega: T) -> Result<Complex<T>> {
    let b = inverse_susceptibility_bracket(model, omega);
    let scale = sq(model.omega_m)
        + sq(omega)
        + (model.gamma * omega).abs()
        + model.spring_strength().abs() / cavity_denominator(model, omega).norm();
    if b.norm() <= lit::<T>(8.0) * T::epsilon() * scale {
        return Err(Error::SingularResponse {
            omega: omega.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((b * Complex::new(model.mass, T::zero())).inv())
}

/// Bare oscillator susceptibility 1/[m(ω_m² - ω² - iγω)].
pub fn bare_susceptibility<T: Real>(model: &LinearModel<T>, omega: T) -> Complex<T> {
    Complex::new(
        model.mass * (sq(model.omega_m) - sq(omega)),
        -model.mass * model.gamma * omega,
    )
    .inv()
}

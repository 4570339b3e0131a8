//! Optimal operating point: critical angle, optimal pump, DC sensitivity,
//! optimal power and bandwidth, together with numeric searches that check
//! the closed forms.

use crate::detection::sensitivity_at;
use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_section, grid_then_golden};
use crate::params::{hbar, k_b, Branch, CavityParams, LinearModel, SystemParams};
use crate::scalar::{lit, sq, Real};

/// Smallest ξ any optimization path is allowed to approach.
pub const XI_FLOOR: f64 = 1e-4;

/// How the optimal pump is evaluated for a given homodyne angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpRule {
    /// α⋆² = α₀²[1 ∓ (2κ/Δ)(Δ sinθ + κ cosθ)/sqrt(κ²+Δ²)].
    #[default]
    Exact,
    /// α⋆² = α₀²(1 - 2κ|δθ|/Δ) = α₀²(1 - ξ), linearized around θ₀.
    NearCritical,
}

/// α⋆²/α₀² for the homodyne angle `theta`.
///
/// Rejects angles for which the ratio would exceed 1 (wrong side of θ₀ for
/// the branch) or fall below 0.
pub fn optimal_pump_ratio<T: Real>(kappa: T, delta: T, theta: T, branch: Branch, rule: PumpRule) -> Result<T> {
    let ratio = match rule {
        PumpRule::Exact => {
            let proj = (delta * theta.sin() + kappa * theta.cos()) / (sq(kappa) + sq(delta)).sqrt();
            T::one() - branch.sign::<T>() * T::two() * kappa / delta * proj
        }
        PumpRule::NearCritical => {
            let theta0 = -(kappa / delta).atan();
            let offset = branch.sign::<T>() * (theta - theta0);
            T::one() - T::two() * kappa / delta * offset
        }
    };
    let slack = lit::<T>(16.0) * T::epsilon();
    if !(ratio >= T::zero() && ratio <= T::one() + slack) {
        return Err(Error::InvalidHomodyneAngle {
            theta: theta.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(ratio.min(T::one()))
}

/// α₀² = mω_m²L²(κ²+Δ²)/(2ℏΔω_c²).
pub fn threshold_amplitude_sq<T: Real>(params: &SystemParams<T>, delta: T) -> T {
    let m = &params.mechanical;
    let c = &params.cavity;
    m.mass * sq(m.omega_m) * sq(c.subcavity_length) * (sq(c.kappa()) + sq(delta))
        / (T::two() * hbar::<T>() * delta * sq(c.omega_c()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPump<T> {
    pub alpha0_sq: T,
    /// Exact optimum α⋆².
    pub alpha_star_sq: T,
    /// Linearized α₀²(1 - 2κδθ/Δ).
    pub alpha_star_sq_near_critical: T,
}

pub fn optimal_pump<T: Real>(params: &SystemParams<T>, delta: T, theta: T, branch: Branch) -> Result<OptimalPump<T>> {
    if !(delta > T::zero()) {
        return Err(Error::NonPositiveDetuning {
            delta: delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kappa = params.cavity.kappa();
    let a0 = threshold_amplitude_sq(params, delta);
    Ok(OptimalPump {
        alpha0_sq: a0,
        alpha_star_sq: a0 * optimal_pump_ratio(kappa, delta, theta, branch, PumpRule::Exact)?,
        alpha_star_sq_near_critical: a0 * optimal_pump_ratio(kappa, delta, theta, branch, PumpRule::NearCritical)?,
    })
}

/// Model at the optimum for offset ξ on the given branch: returns the
/// model with its pump set by `rule`, and the homodyne angle.
pub fn configure_optimum<T: Real>(
    model: &LinearModel<T>,
    xi: T,
    branch: Branch,
    rule: PumpRule,
) -> Result<(LinearModel<T>, T)> {
    let theta = model.theta_from_offset(xi, branch);
    let ratio = optimal_pump_ratio(model.kappa, model.delta, theta, branch, rule)?;
    Ok((model.with_pump_ratio(ratio), theta))
}

/// DC sensitivity near the optimum,
/// 2mγk_BT + ℏmω_m²(Δ/4κ + κ/Δ)ξ².
pub fn dc_optimum<T: Real>(model: &LinearModel<T>, xi: T) -> T {
    let bracket = model.delta / (lit::<T>(4.0) * model.kappa) + model.kappa / model.delta;
    model.thermal_force_psd() + hbar::<T>() * model.mass * sq(model.omega_m) * bracket * sq(xi)
}

/// DC squeezing near the optimum,
/// (n_th/Q_m)(Δ/κ)(1-ξ) + ½[1 + (Δ/2κ)²]ξ².
pub fn dc_squeezing_optimum<T: Real>(model: &LinearModel<T>, xi: T) -> T {
    let n_over_q = k_b::<T>() * model.temperature * model.gamma / (hbar::<T>() * sq(model.omega_m));
    let r = model.delta / model.kappa;
    n_over_q * r * (T::one() - xi) + lit::<T>(0.5) * (T::one() + sq(r / T::two())) * sq(xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget<T> {
    /// Input power at the optimum, W.
    pub optimal: T,
    /// Circulating power P_opt·F/(2π), W.
    pub circulating: T,
}

/// P_opt = (5/4)(1-ξ)mω_m²(L/Q_c)²ω_c, for Δ_c = g = κ (Δ = 2κ).
pub fn optimal_power<T: Real>(params: &SystemParams<T>, xi: T) -> PowerBudget<T> {
    let cav: &CavityParams<T> = &params.cavity;
    let m = &params.mechanical;
    let q_c = cav.quality_factor();
    let optimal =
        lit::<T>(1.25) * (T::one() - xi) * m.mass * sq(m.omega_m) * sq(cav.subcavity_length / q_c) * cav.omega_c();
    PowerBudget {
        optimal,
        circulating: optimal * cav.finesse() / (T::two() * T::PI()),
    }
}

/// Estimated bandwidth [1 + (Δ/κ)²]ξκ.
pub fn bandwidth_estimate<T: Real>(kappa: T, delta: T, xi: T) -> T {
    (T::one() + sq(delta / kappa)) * xi * kappa
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth<T> {
    pub estimate: T,
    /// Smallest |ω| at which η(ω) = 2η(0).
    pub measured: T,
    /// η dipped below η(0) before the first crossing.
    pub non_monotone: bool,
}

/// 3 dB bandwidth of the force noise for the model at angle `theta`.
///
/// Both signs of ω are scanned outward from DC in steps of `estimate/400`
/// and the first crossing of 2η(0) is refined by bisection.
pub fn bandwidth<T: Real>(model: &LinearModel<T>, theta: T, xi: T) -> Result<Bandwidth<T>> {
    let estimate = bandwidth_estimate(model.kappa, model.delta, xi);
    let eta = |w: T| sensitivity_at(model, theta, w).map(|p| p.total);
    let eta0 = eta(T::zero())?;
    let target = T::two() * eta0;
    let limit = lit::<T>(100.0) * model.omega_m.max(model.kappa).max(model.delta);
    let scale = if estimate > T::zero() { estimate } else { model.kappa };
    let h = scale / lit(400.0);
    let dip = eta0 * (T::one() - lit::<T>(1e-9));

    let mut best: Option<T> = None;
    let mut non_monotone = false;
    for sign in [T::one(), -T::one()] {
        let mut prev = T::zero();
        let mut w = h;
        let mut crossing = None;
        while w <= limit {
            let v = eta(sign * w)?;
            if v < dip {
                non_monotone = true;
            }
            if v >= target {
                crossing = Some((prev, w));
                break;
            }
            prev = w;
            // grow the step once far beyond the estimate
            w = if w > lit::<T>(20.0) * scale {
                w * lit(1.01)
            } else {
                w + h
            };
        }
        if let Some((lo, hi)) = crossing {
            let root = bisect(
                |x| eta(sign * x).map(|v| v - target).unwrap_or(T::infinity()),
                lo,
                hi,
                hi * lit::<T>(1e-12),
            );
            best = Some(best.map_or(root, |b: T| b.min(root)));
        }
    }
    let measured = best.ok_or_else(|| Error::Numerical("force noise never doubles within the scanned band".into()))?;
    Ok(Bandwidth {
        estimate,
        measured,
        non_monotone,
    })
}

/// Analytic optimum for Δ = 2κ and offset ξ, with its figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPoint<T> {
    /// ξ used for the angle and pump (at least [`XI_FLOOR`]).
    pub xi: T,
    pub theta_star: T,
    pub alpha0_sq: T,
    pub alpha_star_sq: T,
    pub delta_star: T,
    pub p_opt: T,
    pub p_circ: T,
    /// Full η(0) at the point.
    pub eta_dc: T,
    /// Closed-form 2mγk_BT + ℏmω_m²(Δ/4κ + κ/Δ)ξ².
    pub eta_dc_closed_form: T,
    /// η(0)/ℏmω_m².
    pub sql_ratio: T,
    pub bandwidth_est: T,
    pub bandwidth_measured: T,
    pub bandwidth_non_monotone: bool,
}

/// Analytic optimum at Δ = 2κ on the upper branch.
///
/// The angle and pump use ξ raised to [`XI_FLOOR`]; the power formula uses
/// ξ as given, so ξ = 0 reproduces the threshold power.
pub fn analytic_optimum<T: Real>(params: &SystemParams<T>, xi: T, rule: PumpRule) -> Result<OptimalPoint<T>> {
    let power = optimal_power(params, xi);
    let xi = xi.max(lit(XI_FLOOR));
    let kappa = params.cavity.kappa();
    let delta = T::two() * kappa;
    let m = &params.mechanical;
    let base = LinearModel {
        mass: m.mass,
        omega_m: m.omega_m,
        gamma: m.gamma,
        temperature: m.temperature,
        kappa,
        delta,
        coupling: T::zero(),
    };
    let (model, theta) = configure_optimum(&base, xi, Branch::Above, rule)?;
    let a0 = threshold_amplitude_sq(params, delta);
    let eta_dc = sensitivity_at(&model, theta, T::zero())?.total;
    let bw = bandwidth(&model, theta, xi)?;
    Ok(OptimalPoint {
        xi,
        theta_star: theta,
        alpha0_sq: a0,
        alpha_star_sq: a0 * model.pump_ratio(),
        delta_star: delta,
        p_opt: power.optimal,
        p_circ: power.circulating,
        eta_dc,
        eta_dc_closed_form: dc_optimum(&model, xi),
        sql_ratio: eta_dc / (hbar::<T>() * m.mass * sq(m.omega_m)),
        bandwidth_est: bw.estimate,
        bandwidth_measured: bw.measured,
        bandwidth_non_monotone: bw.non_monotone,
    })
}

/// Numerically minimizes η(0) over α²/α₀² at fixed angle; returns the
/// optimal ratio.
pub fn minimize_pump_numerically<T: Real>(model: &LinearModel<T>, theta: T) -> Result<T> {
    // search on ln(1 - α²/α₀²), the distance to threshold
    let objective = |lq: T| {
        let q = lq.exp();
        sensitivity_at(&model.with_pump_ratio(T::one() - q), theta, T::zero())
            .map(|p| p.total)
            .unwrap_or(T::infinity())
    };
    let (lq, _) = grid_then_golden(objective, lit(-28.0), lit(-1e-9), 201, lit(1e-10));
    Ok(T::one() - lq.exp())
}

/// η(0) at the analytic point for offset ξ, as a function of Δ/κ.
pub fn dc_sensitivity_vs_detuning<T: Real>(
    model: &LinearModel<T>,
    xi: T,
    delta_over_kappa: T,
    rule: PumpRule,
) -> Result<T> {
    let mut m = *model;
    m.delta = delta_over_kappa * model.kappa;
    let (m, theta) = configure_optimum(&m, xi, Branch::Above, rule)?;
    Ok(sensitivity_at(&m, theta, T::zero())?.total)
}

/// Argmin over Δ/κ ∈ [lo, hi] of [`dc_sensitivity_vs_detuning`].
pub fn argmin_detuning<T: Real>(model: &LinearModel<T>, xi: T, rule: PumpRule, lo: T, hi: T) -> T {
    let f = |r: T| dc_sensitivity_vs_detuning(model, xi, r, rule).unwrap_or(T::infinity());
    grid_then_golden(f, lo, hi, 151, lit(1e-7)).0
}

/// Outcome of the unconstrained numeric search over (θ, α²/α₀², Δ/κ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalCheck<T> {
    pub theta: T,
    pub pump_ratio: T,
    pub delta_over_kappa: T,
    pub eta_dc: T,
    /// θ₀ + ξΔ/(2κ) evaluated at the numeric Δ with ξ = 1 - α²/α₀².
    pub analytic_theta: T,
    pub analytic_eta_dc: T,
    /// Numeric minus analytic angle, rad.
    pub theta_deviation: T,
    /// α²/α₀² ended on the ξ floor (closest allowed approach to threshold).
    pub pump_at_floor: bool,
    /// Δ/κ ended on one of the search bounds.
    pub detuning_at_bound: bool,
}

/// Grid + golden-section search of η(0) over the homodyne offset, the
/// distance to threshold q = 1 - α²/α₀² ∈ [ξ_floor, 1) and Δ/κ in
/// `detuning_bounds`. Nested searches: Δ/κ outermost, then q, then θ.
pub fn numeric_global_check<T: Real>(
    model: &LinearModel<T>,
    xi_floor: T,
    detuning_bounds: (T, T),
) -> Result<GlobalCheck<T>> {
    let xi_floor = xi_floor.max(lit(XI_FLOOR));
    let ln_floor = xi_floor.ln();
    let eval = |r: T, lq: T, lx: T| -> T {
        let mut m = *model;
        m.delta = r * model.kappa;
        let theta = m.theta_from_offset(lx.exp(), Branch::Above);
        let m = m.with_pump_ratio(T::one() - lq.exp());
        sensitivity_at(&m, theta, T::zero())
            .map(|p| p.total)
            .unwrap_or(T::infinity())
    };
    let best_angle = |r: T, lq: T| -> (T, T) {
        // η is unimodal in θ at fixed pump: a single golden search suffices
        let lx_max = (T::PI() / r).ln();
        golden_section(|lx| eval(r, lq, lx), ln_floor, lx_max, lit(1e-11))
    };
    let best_pump = |r: T| -> (T, T, T) {
        let (lq, _) = grid_then_golden(|lq| best_angle(r, lq).1, ln_floor, lit(-1e-6), 41, lit(1e-9));
        let (lx, v) = best_angle(r, lq);
        (lq, lx, v)
    };
    let (lo, hi) = detuning_bounds;
    let (r, _) = grid_then_golden(|r| best_pump(r).2, lo, hi, 31, lit(1e-6));
    let (lq, lx, eta) = best_pump(r);

    let q = lq.exp();
    let mut m = *model;
    m.delta = r * model.kappa;
    let theta = m.theta_from_offset(lx.exp(), Branch::Above);
    let analytic_theta = m.theta_from_offset(q, Branch::Above);
    let span = hi - lo;
    Ok(GlobalCheck {
        theta,
        pump_ratio: T::one() - q,
        delta_over_kappa: r,
        eta_dc: eta,
        analytic_theta,
        analytic_eta_dc: dc_optimum(&m, q),
        theta_deviation: theta - analytic_theta,
        pump_at_floor: (lq - ln_floor).abs() < lit(1e-4),
        detuning_at_bound: (r - lo).abs() < lit::<T>(1e-4) * span || (hi - r).abs() < lit::<T>(1e-4) * span,
    })
}

use optoforce_core::detection::{susceptibilities, symmetrized_sensitivity, symmetrized_squeezing};
use optoforce_core::LinearModel;

use crate::discretize::discrete_homodyne_psd;
use crate::simulate::{stream_psd, Observable, SimulationConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationBin {
    pub omega: f64,
    /// Monte Carlo PSD of the homodyne record.
    pub psd: f64,
    pub stderr: f64,
    /// Symmetrized analytic S̃.
    pub squeezing_ref: f64,
    /// Monte Carlo PSD divided by |χ_F|², N²/Hz.
    pub force_psd: f64,
    /// Symmetrized analytic η.
    pub force_ref: f64,
    /// Exact spectrum of the discretized process (no sampling noise).
    pub discrete_ref: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub theta: f64,
    pub n_trajectories: usize,
    pub n_segments: usize,
    pub segment_len: usize,
    pub dt: f64,
    pub bin_width: f64,
    pub band_max: f64,
    pub tolerance: f64,
    /// Max |MC/S̃ - 1| over the band (DC bin excluded).
    pub squeezing_max_rel_dev: f64,
    pub squeezing_worst_omega: f64,
    /// Max |MC/η - 1| for the force-referred channel.
    pub force_max_rel_dev: f64,
    pub force_worst_omega: f64,
    /// Max |discrete/S̃ - 1|: integrator bias, free of sampling noise.
    pub discretization_max_rel_dev: f64,
    /// Largest stderr/psd over the band.
    pub max_rel_stderr: f64,
    /// Record variance against the integrated PSD.
    pub parseval_rel_dev: f64,
    pub passed: bool,
    pub bins: Vec<ValidationBin>,
}

/// Simulates the homodyne record for `model` and compares its Welch PSD
/// with the analytic spectra of the same model over 0 < ω ≤ `band_max`.
pub fn validate(
    model: &LinearModel,
    theta: f64,
    config: &SimulationConfig,
    band_max: f64,
    tolerance: f64,
) -> Result<ValidationReport> {
    validate_against(model, model, theta, config, band_max, tolerance)
}

/// As [`validate`], but the analytic references come from `reference`.
/// With a deliberately wrong reference this is the negative control.
pub fn validate_against(
    simulated: &LinearModel,
    reference: &LinearModel,
    theta: f64,
    config: &SimulationConfig,
    band_max: f64,
    tolerance: f64,
) -> Result<ValidationReport> {
    let (disc, est) = stream_psd(simulated, theta, config, Observable::Homodyne)?;
    let mut bins = Vec::new();
    for k in 1..est.omega.len() {
        let omega = est.omega[k];
        if omega > band_max {
            break;
        }
        let chi_f_sq = susceptibilities(reference, theta, omega)?.chi_f.norm_sqr();
        bins.push(ValidationBin {
            omega,
            psd: est.psd[k],
            stderr: est.stderr[k],
            squeezing_ref: symmetrized_squeezing(reference, theta, omega)?,
            force_psd: est.psd[k] / chi_f_sq,
            force_ref: symmetrized_sensitivity(reference, theta, omega)?,
            discrete_ref: discrete_homodyne_psd(&disc, omega),
        });
    }

    let worst = |f: &dyn Fn(&ValidationBin) -> f64| {
        bins.iter()
            .map(|b| (f(b), b.omega))
            .fold((0.0f64, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc })
    };
    let (sq_dev, sq_w) = worst(&|b| (b.psd / b.squeezing_ref - 1.0).abs());
    let (f_dev, f_w) = worst(&|b| (b.force_psd / b.force_ref - 1.0).abs());
    let (d_dev, _) = worst(&|b| (b.discrete_ref / b.squeezing_ref - 1.0).abs());
    let (se, _) = worst(&|b| b.stderr / b.psd);
    let passed = !bins.is_empty() && sq_dev <= tolerance && f_dev <= tolerance;

    Ok(ValidationReport {
        theta,
        n_trajectories: config.n_trajectories,
        n_segments: est.n_segments,
        segment_len: est.segment_len,
        dt: config.dt,
        bin_width: est.bin_width(),
        band_max,
        tolerance,
        squeezing_max_rel_dev: sq_dev,
        squeezing_worst_omega: sq_w,
        force_max_rel_dev: f_dev,
        force_worst_omega: f_w,
        discretization_max_rel_dev: d_dev,
        max_rel_stderr: se,
        parseval_rel_dev: (est.integrated_power() / est.variance - 1.0).abs(),
        passed,
        bins,
    })
}

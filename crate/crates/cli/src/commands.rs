use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use optoforce_core::cavity::{linear_domain_limit, ModeStructure};
use optoforce_core::detection::{apply_efficiency, sensitivity, squeezing_spectrum};
use optoforce_core::dynamics::stability as routh_hurwitz;
use optoforce_core::optimize::{
    analytic_optimum, argmin_detuning, bandwidth, configure_optimum, numeric_global_check, PumpRule,
};
use optoforce_core::params::{Branch, Homodyne, Pump};
use optoforce_core::{Error, LinearModel};
use optoforce_oracle::{stream_psd, validate_against, Observable, PsdEstimate, SimulationConfig, ValidationReport};
use serde_json::{json, Value};

use crate::config::Setup;
use crate::output::{commit, loglog_svg, Artifact, Table};
use crate::{Failure, GridArgs, SimArgs, SweepParam};

/// What a subcommand produced, before anything touches the filesystem.
pub struct Outcome {
    primary: Vec<u8>,
    extra: Vec<Artifact>,
    summary: String,
    code: u8,
}

impl Outcome {
    fn new(primary: Vec<u8>, summary: String) -> Self {
        Self {
            primary,
            extra: Vec::new(),
            summary,
            code: 0,
        }
    }
}

/// Writes the outcome (plus a manifest when any file is written) and
/// prints the summary line.
pub fn finish(outcome: Outcome, setup: &Setup, subcommand: &str, output: Option<&Path>) -> Result<u8, Failure> {
    let mut artifacts = Vec::new();
    if let Some(path) = output {
        artifacts.push(Artifact::new(path, outcome.primary.clone()));
    }
    artifacts.extend(outcome.extra);
    if !artifacts.is_empty() {
        let manifest = json!({
            "manifest_version": 1,
            "tool": "optoforce",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "argv": std::env::args().collect::<Vec<_>>(),
            "params": serde_json::from_str::<Value>(&setup.file.to_json()).expect("param file is JSON"),
            "outputs": artifacts.iter().map(|a| a.path.display().to_string()).collect::<Vec<_>>(),
            "exit_code": outcome.code,
            "created_unix_s": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        });
        let mut path = artifacts[0].path.clone().into_os_string();
        path.push(".manifest.json");
        artifacts.push(Artifact::json(PathBuf::from(path), &manifest));
    }
    commit(&artifacts)?;
    if output.is_none() {
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        out.write_all(&outcome.primary)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::input(format!("stdout: {e}")))?;
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
    }
    Ok(outcome.code)
}

fn require_stable(model: &LinearModel) -> Result<(), Failure> {
    let report = routh_hurwitz(model)?;
    if report.stable {
        Ok(())
    } else {
        Err(Error::AboveThreshold {
            ratio: report.pump_ratio,
        }
        .into())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            a * (1.0 - t) + b * t
        })
        .collect()
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

fn frequency_grid(args: &GridArgs, model: &LinearModel) -> Result<Vec<f64>, Failure> {
    let hi = args
        .omega_max
        .unwrap_or(2.0 * model.omega_m.max(model.kappa).max(model.delta));
    let lo = if args.log && args.omega_min == 0.0 {
        hi * 1e-4
    } else {
        args.omega_min
    };
    if args.points < 2 {
        return Err(Failure::input("--points must be at least 2"));
    }
    if !(hi > lo && lo.is_finite() && hi.is_finite()) || (args.log && lo <= 0.0) {
        return Err(Failure::input(format!("invalid frequency range [{lo}, {hi}]")));
    }
    Ok(if args.log {
        geomspace(lo, hi, args.points)
    } else {
        linspace(lo, hi, args.points)
    })
}

pub fn cavity_sweep(setup: &Setup, x_max: Option<f64>, points: usize) -> Result<Outcome, Failure> {
    let cav = &setup.system.cavity;
    let x_max = x_max.unwrap_or_else(|| linear_domain_limit(cav.wavenumber()));
    if points < 2 || x_max.is_nan() || x_max <= 0.0 {
        return Err(Failure::input("need --points >= 2 and --x-max > 0"));
    }
    let modes = ModeStructure::sweep(cav, &linspace(-x_max, x_max, points))?;
    let mut t = Table::new(&["x_m", "splitting_rad_s", "omega_plus_rad_s", "omega_minus_rad_s"]);
    for i in 0..modes.len() {
        t.push(&[
            modes.x[i],
            modes.splitting[i],
            modes.omega_plus[i],
            modes.omega_minus[i],
        ]);
    }
    let min = modes.splitting.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(
        t.to_csv(),
        format!("cavity-sweep: {points} points over |x| <= {x_max:.4e} m, min splitting {min:.6e} rad/s"),
    ))
}

pub fn stability(setup: &Setup) -> Result<Outcome, Failure> {
    let d = setup.derive()?;
    let r = routh_hurwitz(&d.model)?;
    let value = json!({
        "stable": r.stable,
        "pump_ratio": r.pump_ratio,
        "minors": r.hurwitz_minors,
        "marginal": r.marginal,
        "threshold_stable": r.threshold_stable,
        "characteristic_coefficients": r.characteristic_coefficients,
        "alpha_sq": d.alpha * d.alpha,
        "alpha0_sq": d.alpha0_sq,
        "pump_power_W": d.pump_power,
        "delta_rad_s": d.delta,
        "kappa_rad_s": d.kappa,
        "theta_rad": d.theta,
        "xi": d.xi,
    });
    Ok(Outcome::new(
        json_bytes(&value),
        format!(
            "stability: {} at alpha^2/alpha0^2 = {:.9}",
            if r.stable { "stable" } else { "unstable" },
            r.pump_ratio
        ),
    ))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("json values serialize");
    b.push(b'\n');
    b
}

fn noise_table(
    model: &LinearModel,
    theta: f64,
    grid: &[f64],
    efficiency: f64,
) -> Result<(Table, Vec<[f64; 5]>), Failure> {
    let mut spec = sensitivity(model, theta, grid)?;
    if efficiency < 1.0 {
        spec = apply_efficiency(&spec, efficiency)?;
    }
    let mut t = Table::new(&[
        "omega_rad_s",
        "total_N2_per_Hz",
        "thermal_N2_per_Hz",
        "backaction_N2_per_Hz",
        "imprecision_N2_per_Hz",
        "cross_N2_per_Hz",
        "inefficiency_N2_per_Hz",
        "amplitude_N_per_rtHz",
    ]);
    let mut curves = Vec::with_capacity(spec.points.len());
    for p in &spec.points {
        t.push(&[
            p.omega,
            p.total,
            p.thermal,
            p.backaction,
            p.imprecision,
            p.cross,
            p.inefficiency,
            p.amplitude(),
        ]);
        curves.push([p.omega, p.total, p.thermal, p.backaction, p.imprecision]);
    }
    Ok((t, curves))
}

pub fn spectrum(setup: &Setup, grid: &GridArgs, svg: Option<&Path>) -> Result<Outcome, Failure> {
    let d = setup.derive()?;
    require_stable(&d.model)?;
    let omega = frequency_grid(grid, &d.model)?;
    let (table, curves) = noise_table(&d.model, d.theta, &omega, d.efficiency)?;
    let best = curves
        .iter()
        .min_by(|a, b| a[1].total_cmp(&b[1]))
        .expect("non-empty grid");
    let mut out = Outcome::new(
        table.to_csv(),
        format!(
            "spectrum: {} points, eta({:.4e}) = {:.6e} N^2/Hz, minimum {:.6e} at {:.4e} rad/s",
            table.len(),
            curves[0][0],
            curves[0][1],
            best[1],
            best[0]
        ),
    );
    if let Some(path) = svg {
        let names = ["total", "thermal", "backaction", "imprecision"];
        let series = names
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, curves.iter().map(|c| (c[0], c[i + 1])).collect()))
            .collect::<Vec<_>>();
        out.extra.push(Artifact::new(
            path,
            loglog_svg(&series, "omega (rad/s)", "eta (N^2/Hz)"),
        ));
    }
    Ok(out)
}

pub fn squeezing(setup: &Setup, grid: &GridArgs, svg: Option<&Path>) -> Result<Outcome, Failure> {
    let d = setup.derive()?;
    require_stable(&d.model)?;
    let omega = frequency_grid(grid, &d.model)?;
    let mut spec = squeezing_spectrum(&d.model, d.theta, &omega)?;
    if d.efficiency < 1.0 {
        spec = apply_efficiency(&spec, d.efficiency)?;
    }
    let mut t = Table::new(&[
        "omega_rad_s",
        "total",
        "thermal",
        "optical",
        "inefficiency",
        "dB_rel_unity",
        "dB_rel_vacuum",
    ]);
    for p in &spec.points {
        t.push(&[
            p.omega,
            p.total,
            p.thermal,
            p.optical,
            p.inefficiency,
            p.db_rel_unity(),
            p.db_rel_vacuum(),
        ]);
    }
    let best = spec
        .points
        .iter()
        .min_by(|a, b| a.total.total_cmp(&b.total))
        .expect("non-empty grid");
    let mut out = Outcome::new(
        t.to_csv(),
        format!(
            "squeezing: {} points, deepest {:.3} dB rel. vacuum at {:.4e} rad/s",
            t.len(),
            best.db_rel_vacuum(),
            best.omega
        ),
    );
    if let Some(path) = svg {
        let series = vec![
            ("total", spec.points.iter().map(|p| (p.omega, p.total)).collect()),
            ("vacuum", spec.points.iter().map(|p| (p.omega, 0.5)).collect()),
        ];
        out.extra.push(Artifact::new(
            path,
            loglog_svg(&series, "omega (rad/s)", "S (rel. unity)"),
        ));
    }
    Ok(out)
}

fn pump_rule(setup: &Setup) -> PumpRule {
    match setup.op.pump {
        Pump::Optimal(rule) => rule,
        _ => PumpRule::Exact,
    }
}

fn configured_xi(setup: &Setup) -> Result<f64, Failure> {
    match setup.op.homodyne {
        Homodyne::Offset { xi, .. } => Ok(xi),
        Homodyne::Angle(_) => Err(Error::Config {
            key: "xi".into(),
            reason: "this subcommand needs the homodyne offset xi, not an absolute angle".into(),
        }
        .into()),
    }
}

/// Model with Δ = `delta` and no pump; the optimum routines set the pump.
fn bare_model(setup: &Setup, kappa: f64, delta: f64) -> LinearModel {
    let m = &setup.system.mechanical;
    LinearModel {
        mass: m.mass,
        omega_m: m.omega_m,
        gamma: m.gamma,
        temperature: m.temperature,
        kappa,
        delta,
        coupling: 0.0,
    }
}

pub fn optimize(setup: &Setup, check: bool, spectrum_path: Option<&Path>, grid: &GridArgs) -> Result<Outcome, Failure> {
    let xi_req = configured_xi(setup)?;
    let rule = pump_rule(setup);
    let p = analytic_optimum(&setup.system, xi_req, rule)?;
    let mut value = json!({
        "xi_requested": xi_req,
        "xi": p.xi,
        "pump_rule": match rule { PumpRule::Exact => "optimal", PumpRule::NearCritical => "optimal_near_critical" },
        "theta_star_rad": p.theta_star,
        "alpha0_sq": p.alpha0_sq,
        "alpha_star_sq": p.alpha_star_sq,
        "delta_star_rad_s": p.delta_star,
        "kappa_rad_s": setup.system.cavity.kappa(),
        "p_opt_W": p.p_opt,
        "p_circ_W": p.p_circ,
        "eta_dc_N2_per_Hz": p.eta_dc,
        "eta_dc_closed_form_N2_per_Hz": p.eta_dc_closed_form,
        "sql_ratio": p.sql_ratio,
        "sql_ratio_dB": 10.0 * p.sql_ratio.log10(),
        "bandwidth_estimate_rad_s": p.bandwidth_est,
        "bandwidth_measured_rad_s": p.bandwidth_measured,
        "bandwidth_non_monotone": p.bandwidth_non_monotone,
    });
    let kappa = setup.system.cavity.kappa();
    let base = bare_model(setup, kappa, p.delta_star);
    if check {
        let argmin = argmin_detuning(&base, p.xi, rule, 0.5, 8.0);
        let g = numeric_global_check(&base, p.xi, (0.5, 8.0))?;
        value["numeric"] = json!({
            "argmin_delta_over_kappa_at_fixed_xi": argmin,
            "joint_search": {
                "theta_rad": g.theta,
                "pump_ratio": g.pump_ratio,
                "delta_over_kappa": g.delta_over_kappa,
                "eta_dc_N2_per_Hz": g.eta_dc,
                "analytic_theta_rad": g.analytic_theta,
                "analytic_eta_dc_N2_per_Hz": g.analytic_eta_dc,
                "theta_deviation_rad": g.theta_deviation,
                "pump_at_floor": g.pump_at_floor,
                "detuning_at_bound": g.detuning_at_bound,
            },
        });
    }
    let mut out = Outcome::new(
        json_bytes(&value),
        format!(
            "optimize: P_opt = {:.6e} W, P_circ = {:.6e} W, eta(0)/hbar m w_m^2 = {:.6e} ({:.2} dB)",
            p.p_opt,
            p.p_circ,
            p.sql_ratio,
            10.0 * p.sql_ratio.log10()
        ),
    );
    if let Some(path) = spectrum_path {
        let (model, theta) = configure_optimum(&base, p.xi, Branch::Above, rule)?;
        let omega = frequency_grid(grid, &model)?;
        let (table, _) = noise_table(&model, theta, &omega, setup.op.efficiency)?;
        out.extra.push(Artifact::new(path, table.to_csv()));
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), Failure> {
    let bad = || Failure::input(format!("--range expects start:stop:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

pub fn sweep(setup: &Setup, param: SweepParam, range: &str, log: bool) -> Result<Outcome, Failure> {
    let (a, b, n) = parse_range(range)?;
    if a <= 0.0 || b <= 0.0 {
        return Err(Failure::input("--range values must be positive"));
    }
    let values = if log { geomspace(a, b, n) } else { linspace(a, b, n) };
    let d = setup.derive()?;
    let rule = pump_rule(setup);
    let (kappa0, ratio0, xi0) = (d.kappa, d.delta / d.kappa, d.xi);
    let column = match param {
        SweepParam::Kappa => "kappa_over_omega_m",
        SweepParam::Xi => "xi",
        SweepParam::Delta => "delta_over_kappa",
    };
    let mut t = Table::new(&[
        column,
        "kappa_rad_s",
        "delta_rad_s",
        "xi",
        "theta_rad",
        "pump_ratio",
        "eta_dc_N2_per_Hz",
        "sql_ratio",
        "bandwidth_measured_rad_s",
        "bandwidth_estimate_rad_s",
        "bandwidth_non_monotone",
    ]);
    let omega_m = setup.system.mechanical.omega_m;
    let sql = optoforce_core::params::hbar::<f64>() * setup.system.mechanical.mass * omega_m * omega_m;
    for v in values {
        let (kappa, ratio, xi) = match param {
            SweepParam::Kappa => (v * omega_m, ratio0, xi0),
            SweepParam::Xi => (kappa0, ratio0, v),
            SweepParam::Delta => (kappa0, v, xi0),
        };
        let base = bare_model(setup, kappa, ratio * kappa);
        let (model, theta) = configure_optimum(&base, xi, Branch::Above, rule)?;
        let eta = optoforce_core::detection::sensitivity_at(&model, theta, 0.0)?.total;
        let bw = bandwidth(&model, theta, xi)?;
        t.push(&[
            v,
            kappa,
            model.delta,
            xi,
            theta,
            model.pump_ratio(),
            eta,
            eta / sql,
            bw.measured,
            bw.estimate,
            if bw.non_monotone { 1.0 } else { 0.0 },
        ]);
    }
    Ok(Outcome::new(
        t.to_csv(),
        format!("sweep: {} points over {column} in [{a}, {b}]", t.len()),
    ))
}

struct SimDefaults {
    ntraj: usize,
    segment_len: usize,
    /// Default duration in segment lengths; 2k - 1 segments per trajectory
    /// at 50% overlap for k + ½.
    segments: f64,
}

fn sim_config(
    sim: &SimArgs,
    model: &LinearModel,
    defaults: SimDefaults,
) -> Result<(SimulationConfig, Observable), Failure> {
    let observable = Observable::parse(&sim.observable).ok_or_else(|| {
        Failure::input(format!(
            "unknown observable `{}`; expected x, p, X, Y or S",
            sim.observable
        ))
    })?;
    let dt = sim.dt.unwrap_or_else(|| SimulationConfig::max_dt(model));
    let segment_len = sim.segment_len.unwrap_or(defaults.segment_len);
    let config = SimulationConfig {
        dt,
        duration: sim.duration.unwrap_or(defaults.segments * segment_len as f64 * dt),
        n_trajectories: sim.ntraj.unwrap_or(defaults.ntraj),
        seed: sim.seed,
        record: vec![observable],
        burn_in: sim.burn_in,
        segment_len,
    };
    Ok((config, observable))
}

fn report_json(r: &ValidationReport, config: &SimulationConfig) -> Value {
    json!({
        "passed": r.passed,
        "tolerance": r.tolerance,
        "band_max_rad_s": r.band_max,
        "bins_compared": r.bins.len(),
        "squeezing_max_rel_dev": r.squeezing_max_rel_dev,
        "squeezing_worst_omega_rad_s": r.squeezing_worst_omega,
        "force_max_rel_dev": r.force_max_rel_dev,
        "force_worst_omega_rad_s": r.force_worst_omega,
        "discretization_max_rel_dev": r.discretization_max_rel_dev,
        "max_rel_stderr": r.max_rel_stderr,
        "parseval_rel_dev": r.parseval_rel_dev,
        "theta_rad": r.theta,
        "n_trajectories": r.n_trajectories,
        "n_segments": r.n_segments,
        "segment_len": r.segment_len,
        "bin_width_rad_s": r.bin_width,
        "dt_s": r.dt,
        "duration_s": config.duration,
        "seed": config.seed,
    })
}

fn bins_table(r: &ValidationReport) -> Table {
    let mut t = Table::new(&[
        "omega_rad_s",
        "psd_per_Hz",
        "stderr_per_Hz",
        "squeezing_ref_per_Hz",
        "force_psd_N2_per_Hz",
        "force_ref_N2_per_Hz",
        "discrete_ref_per_Hz",
    ]);
    for b in &r.bins {
        t.push(&[
            b.omega,
            b.psd,
            b.stderr,
            b.squeezing_ref,
            b.force_psd,
            b.force_ref,
            b.discrete_ref,
        ]);
    }
    t
}

fn psd_table(est: &PsdEstimate, observable: Observable) -> Table {
    let (psd, err) = match observable {
        Observable::Position => ("psd_m2_per_Hz", "stderr_m2_per_Hz"),
        Observable::Momentum => ("psd_kg2_m2_per_s2_per_Hz", "stderr_kg2_m2_per_s2_per_Hz"),
        _ => ("psd_per_Hz", "stderr_per_Hz"),
    };
    let mut t = Table::new(&["omega_rad_s", psd, err]);
    for k in 0..est.omega.len() {
        t.push(&[est.omega[k], est.psd[k], est.stderr[k]]);
    }
    t
}

fn sibling(output: Option<&Path>, explicit: Option<&Path>, suffix: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        output.map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        })
    })
}

/// PSD of one observable. For the homodyne record the report also holds
/// the comparison with the analytic spectra up to `--band-max` (Nyquist
/// by default); the exit status does not depend on it.
pub fn montecarlo(
    setup: &Setup,
    sim: &SimArgs,
    output: Option<&Path>,
    report: Option<&Path>,
) -> Result<Outcome, Failure> {
    let d = setup.derive()?;
    require_stable(&d.model)?;
    let defaults = SimDefaults {
        ntraj: 8,
        segment_len: 4096,
        segments: 16.5,
    };
    let (config, observable) = sim_config(sim, &d.model, defaults)?;
    let (table, value, summary) = if observable == Observable::Homodyne {
        let band = sim.band_max.unwrap_or(std::f64::consts::PI / config.dt);
        let r = validate_against(&d.model, &d.model, d.theta, &config, band, sim.tolerance)?;
        let summary = format!(
            "montecarlo: S over {} segments, max deviation {:.3}% (squeezing) / {:.3}% (force) up to {band:.4e} rad/s",
            r.n_segments,
            100.0 * r.squeezing_max_rel_dev,
            100.0 * r.force_max_rel_dev
        );
        (bins_table(&r), report_json(&r, &config), summary)
    } else {
        let (_, est) = stream_psd(&d.model, d.theta, &config, observable)?;
        let value = json!({
            "observable": observable.name(),
            "n_trajectories": config.n_trajectories,
            "n_segments": est.n_segments,
            "segment_len": est.segment_len,
            "bin_width_rad_s": est.bin_width(),
            "dt_s": config.dt,
            "duration_s": config.duration,
            "seed": config.seed,
            "variance": est.variance,
            "integrated_psd": est.integrated_power(),
        });
        let summary = format!(
            "montecarlo: {} over {} segments, variance {:.6e}",
            observable.name(),
            est.n_segments,
            est.variance
        );
        (psd_table(&est, observable), value, summary)
    };
    let mut out = Outcome::new(table.to_csv(), summary);
    if let Some(path) = sibling(output, report, ".report.json") {
        out.extra.push(Artifact::json(path, &value));
    }
    Ok(out)
}

/// Monte Carlo against the analytic spectra over |ω| up to 3× the measured
/// bandwidth unless `--band-max` is given.
pub fn validate(setup: &Setup, sim: &SimArgs, output: Option<&Path>, bins: Option<&Path>) -> Result<Outcome, Failure> {
    let d = setup.derive()?;
    require_stable(&d.model)?;
    let defaults = SimDefaults {
        ntraj: 64,
        segment_len: 1 << 18,
        segments: 68.5,
    };
    let (config, observable) = sim_config(sim, &d.model, defaults)?;
    if observable != Observable::Homodyne {
        return Err(Failure::input(
            "validate compares the homodyne record; use --observable S",
        ));
    }
    let band = match sim.band_max {
        Some(b) => b,
        None if d.xi > 0.0 => 3.0 * bandwidth(&d.model, d.theta, d.xi)?.measured,
        None => return Err(Failure::input("xi = 0 has no bandwidth; pass --band-max")),
    };
    let r = validate_against(&d.model, &d.model, d.theta, &config, band, sim.tolerance)?;
    let value = report_json(&r, &config);
    let mut out = Outcome::new(
        json_bytes(&value),
        format!(
            "validate: {} (squeezing {:.3}%, force {:.3}%, tolerance {:.1}%, {} bins up to {band:.4e} rad/s)",
            if r.passed { "PASS" } else { "FAIL" },
            100.0 * r.squeezing_max_rel_dev,
            100.0 * r.force_max_rel_dev,
            100.0 * r.tolerance,
            r.bins.len()
        ),
    );
    out.code = if r.passed { 0 } else { 1 };
    if let Some(path) = sibling(output, bins, ".bins.csv") {
        out.extra.push(Artifact::new(path, bins_table(&r).to_csv()));
    }
    Ok(out)
}

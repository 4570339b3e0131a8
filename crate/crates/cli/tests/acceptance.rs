//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use optoforce_core::detection::{
    apply_efficiency, sensitivity_at, sql_reference, squeezing_at, squeezing_spectrum, susceptibilities,
};
use optoforce_core::dynamics::{dc_spring_frequency_sq, routh_hurwitz_threshold, stability};
use optoforce_core::optimize::{argmin_detuning, bandwidth, configure_optimum, PumpRule};
use optoforce_core::params::{hbar, k_b, Branch};
use optoforce_core::LinearModel;
use optoforce_oracle::{validate, SimulationConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Base point: ω_m = 2π·1 MHz, κ = 0.2ω_m, Δ = 2κ, Q_m = 1e5, T = 0.
fn base() -> LinearModel {
    let omega_m = TAU * 1e6;
    let kappa = 0.2 * omega_m;
    LinearModel {
        mass: 5.36e-10,
        omega_m,
        gamma: omega_m * 1e-5,
        temperature: 0.0,
        kappa,
        delta: 2.0 * kappa,
        coupling: 0.0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn sql_dc(m: &LinearModel) -> f64 {
    hbar::<f64>() * m.mass * m.omega_m * m.omega_m
}

/// Coefficient of determination of a least-squares line through (x, y).
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn optimal_power() -> Outcome {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/reference_point.json");
    let out = Command::new(env!("CARGO_BIN_EXE_optoforce"))
        .args(["optimize", "--config", config])
        .output()
        .expect("binary runs");
    if !out.status.success() {
        return check(
            false,
            format!(
                "optimize exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ),
        );
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    let p_opt = v["p_opt_W"].as_f64().unwrap();
    let p_circ = v["p_circ_W"].as_f64().unwrap();
    let (d1, d2) = (rel(p_opt, 0.816e-3), rel(p_circ, 2.56));
    check(
        d1 <= 0.01 && d2 <= 0.05,
        format!(
            "P_opt = {:.4} mW ({:.2}% off 0.816), P_circ = {p_circ:.3} W ({:.2}% off 2.56)",
            p_opt * 1e3,
            d1 * 100.0,
            d2 * 100.0
        ),
    )
}

fn dc_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for xi in [0.001, 0.01] {
        let (m, theta) = configure_optimum(&base(), xi, Branch::Above, PumpRule::Exact).unwrap();
        let eta = sensitivity_at(&m, theta, 0.0).unwrap().total;
        let d = rel(eta, sql_dc(&m) * xi * xi);
        worst = worst.max(d);
        parts.push(format!("xi={xi}: {:.3}%", d * 100.0));
    }
    check(
        worst <= 0.01,
        format!("eta(0) vs hbar m w_m^2 xi^2: {} (tol 1%)", parts.join(", ")),
    )
}

fn optimal_detuning() -> Outcome {
    let r = argmin_detuning(&base(), 0.01, PumpRule::NearCritical, 0.5, 8.0);
    check(
        (r - 2.0).abs() <= 0.04,
        format!("argmin over Delta/kappa in [0.5, 8] = {r:.4} (target 2.00 +- 0.04)"),
    )
}

fn bandwidth_scalings() -> Outcome {
    let measured = |kappa_over_wm: f64, xi: f64| {
        let mut b = base();
        b.kappa = kappa_over_wm * b.omega_m;
        b.delta = 2.0 * b.kappa;
        let (m, theta) = configure_optimum(&b, xi, Branch::Above, PumpRule::NearCritical).unwrap();
        bandwidth(&m, theta, xi).unwrap()
    };
    let xis: Vec<f64> = (0..10).map(|i| 1e-3 * 10f64.powf(i as f64 / 9.0)).collect();
    let bw_xi: Vec<f64> = xis.iter().map(|&x| measured(0.2, x).measured).collect();
    let kappas: Vec<f64> = (0..11).map(|i| 0.05 + 0.025 * i as f64).collect();
    let bw_k: Vec<f64> = kappas.iter().map(|&k| measured(k, 0.01).measured).collect();
    let (r_xi, r_k) = (r_squared(&xis, &bw_xi), r_squared(&kappas, &bw_k));
    let at_base = measured(0.2, 0.01);
    let ratio = at_base.measured / at_base.estimate;
    check(
        r_xi > 0.99 && r_k > 0.99 && (0.5..=2.0).contains(&ratio),
        format!(
            "R^2 vs xi (1e-3..1e-2) = {r_xi:.5}, R^2 vs kappa (0.05..0.3 w_m) = {r_k:.5}, measured/estimate = {ratio:.3} ({:.0} / {:.0} rad/s)",
            at_base.measured, at_base.estimate
        ),
    )
}

fn squeezing_floor() -> Outcome {
    let xi = 0.01;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for temperature in [0.0, 1e-3] {
        let b = base().with_temperature(temperature);
        let (m, theta) = configure_optimum(&b, xi, Branch::Above, PumpRule::NearCritical).unwrap();
        let n_over_q = k_b::<f64>() * temperature / (hbar::<f64>() * m.omega_m) * m.gamma / m.omega_m;
        let expected = 2.0 * (1.0 - xi) * n_over_q + xi * xi;
        let d = rel(squeezing_at(&m, theta, 0.0).unwrap().total, expected);
        worst = worst.max(d);
        parts.push(format!("T={temperature} K: {:.3}%", d * 100.0));
    }
    // P = 0.99, T = 0, xi -> 0
    let (m, theta) = configure_optimum(&base(), 1e-4, Branch::Above, PumpRule::NearCritical).unwrap();
    let s = apply_efficiency(&squeezing_spectrum(&m, theta, &[0.0]).unwrap(), 0.99).unwrap();
    let floor = s.points[0].total;
    let db = s.points[0].db_rel_unity();
    check(
        worst <= 0.01 && rel(floor, 0.005) <= 0.01 && (db + 23.0).abs() <= 0.1,
        format!(
            "S(0) closed form {} (tol 1%); floor at P=0.99 = {floor:.6} = {db:.3} dB (target -23 +- 0.1)",
            parts.join(", ")
        ),
    )
}

fn passive_unitarity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let omega_m = TAU * 1e6;
        let kappa = omega_m * 10f64.powf(rng.gen_range(-2.0..1.0));
        let m = LinearModel {
            mass: 1e-10,
            omega_m,
            gamma: omega_m * 1e-5,
            temperature: 0.0,
            kappa,
            delta: kappa * 10f64.powf(rng.gen_range(-2.0..1.5)),
            coupling: 0.0,
        };
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let omega = rng.gen_range(-5.0..5.0) * omega_m;
        let t = susceptibilities(&m, theta, omega).unwrap();
        worst = worst.max((t.optical().norm() - 1.0).abs());
    }
    check(
        worst <= 1e-9,
        format!("max ||chi_X - i chi_Y| - 1| over 1000 tuples = {worst:.2e} (tol 1e-9)"),
    )
}

fn stability_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut flips = 0;
    for _ in 0..100 {
        let omega_m = TAU * 10f64.powf(rng.gen_range(4.0..7.0));
        let kappa = omega_m * 10f64.powf(rng.gen_range(-1.5..1.0));
        let m = LinearModel {
            mass: 10f64.powf(rng.gen_range(-13.0..-8.0)),
            omega_m,
            gamma: kappa * 10f64.powf(rng.gen_range(-7.0..-3.0)),
            temperature: 0.0,
            kappa,
            delta: kappa * 10f64.powf(rng.gen_range(-1.0..1.0)),
            coupling: 0.0,
        };
        let r = routh_hurwitz_threshold(&m, 1e-9).unwrap();
        worst = worst.max((r - 1.0).abs());
        let below = stability(&m.with_pump_ratio(0.999)).unwrap().stable;
        let above = stability(&m.with_pump_ratio(1.001)).unwrap().stable;
        if below && !above {
            flips += 1;
        }
    }
    check(
        worst <= 1e-3 && flips == 100,
        format!(
            "max |threshold/alpha0^2 - 1| = {worst:.2e} (tol 1e-3); verdict flips across 0.999/1.001 in {flips}/100"
        ),
    )
}

fn optical_spring() -> Outcome {
    let mut worst: f64 = 0.0;
    for xi in [1e-3, 1e-2, 0.1] {
        let (m, _) = configure_optimum(&base(), xi, Branch::Above, PumpRule::NearCritical).unwrap();
        worst = worst.max(rel(dc_spring_frequency_sq(&m) / (m.omega_m * m.omega_m), xi));
    }
    check(
        worst <= 1e-6,
        format!("max |w_m'^2/w_m^2 / xi - 1| over xi in {{1e-3, 1e-2, 0.1}} = {worst:.2e} (tol 1e-6)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let xi = 0.01;
    let (m, theta) = configure_optimum(&base(), xi, Branch::Above, PumpRule::NearCritical).unwrap();
    let dt = SimulationConfig::max_dt(&m);
    let band = 3.0 * bandwidth(&m, theta, xi).unwrap().measured;
    let segment_len = 1 << 18;
    let config = SimulationConfig {
        dt,
        duration: 68.5 * segment_len as f64 * dt,
        n_trajectories: 64,
        seed: 2024,
        record: vec![],
        burn_in: None,
        segment_len,
    };
    let report = validate(&m, theta, &config, band, 0.05).unwrap();

    let small = SimulationConfig {
        duration: 16.5 * 4096.0 * dt,
        n_trajectories: 6,
        segment_len: 4096,
        ..config.clone()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| validate(&m, theta, &small, band, 0.05).unwrap())
    };
    let (a, b) = (run(1), run(3));
    let deterministic = a.bins.len() == b.bins.len()
        && a.bins
            .iter()
            .zip(&b.bins)
            .all(|(x, y)| x.psd.to_bits() == y.psd.to_bits());

    check(
        report.passed && deterministic,
        format!(
            "{} bins to {band:.0} rad/s: squeezing {:.2}%, force {:.2}% (tol 5%, stderr {:.2}%); bit-identical on 1 vs 3 threads: {deterministic}",
            report.bins.len(),
            report.squeezing_max_rel_dev * 100.0,
            report.force_max_rel_dev * 100.0,
            report.max_rel_stderr * 100.0
        ),
    )
}

fn sql_headline() -> Outcome {
    let xi = 0.01;
    let (m, theta) = configure_optimum(&base(), xi, Branch::Above, PumpRule::NearCritical).unwrap();
    let ratio = sensitivity_at(&m, theta, 0.0).unwrap().total / sql_reference(&m, 0.0);
    let db = 10.0 * ratio.log10();
    check(
        rel(ratio, xi * xi) <= 0.01,
        format!(
            "eta(0)/SQL = {ratio:.4e} vs xi^2 = 1e-4 ({:.3}%, tol 1%), {db:.2} dB",
            rel(ratio, xi * xi) * 100.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("optimal power", optimal_power, Duration::from_secs(1)),
        ("DC optimum closed form", dc_closed_form, Duration::from_secs(1)),
        ("optimal detuning", optimal_detuning, Duration::from_secs(10)),
        ("bandwidth scalings", bandwidth_scalings, Duration::from_secs(30)),
        (
            "squeezing closed form and efficiency floor",
            squeezing_floor,
            Duration::from_secs(1),
        ),
        ("passive unitarity", passive_unitarity, Duration::from_secs(1)),
        ("stability equivalence", stability_equivalence, Duration::from_secs(5)),
        ("optical spring identity", optical_spring, Duration::from_secs(1)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(300)),
        ("SQL-beating headline", sql_headline, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {} [{:.2} s, limit {} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

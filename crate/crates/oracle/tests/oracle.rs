use optoforce_core::dynamics::bare_susceptibility;
use optoforce_core::optimize::{bandwidth, configure_optimum, PumpRule};
use optoforce_core::params::constants::K_B;
use optoforce_core::params::Branch;
use optoforce_core::LinearModel;
use optoforce_oracle::{
    discrete_homodyne_psd, estimate_psd, simulate, stream_psd, validate, validate_against, Discretization, Observable,
    OracleError, SimulationConfig,
};

const TAU: f64 = std::f64::consts::TAU;

fn uncoupled(temperature: f64, q_m: f64) -> LinearModel {
    let omega_m = TAU * 1e5;
    LinearModel {
        mass: 1e-12,
        omega_m,
        gamma: omega_m / q_m,
        temperature,
        kappa: 0.2 * omega_m,
        delta: 0.4 * omega_m,
        coupling: 0.0,
    }
}

fn base_optimum(xi: f64) -> (LinearModel, f64) {
    let omega_m = TAU * 1e6;
    let m = LinearModel {
        mass: 5.36e-10,
        omega_m,
        gamma: omega_m * 1e-5,
        temperature: 0.0,
        kappa: 0.2 * omega_m,
        delta: 0.4 * omega_m,
        coupling: 0.0,
    };
    configure_optimum(&m, xi, Branch::Above, PumpRule::NearCritical).unwrap()
}

fn config(model: &LinearModel, segment_len: usize, segments_per_traj: usize, n_traj: usize) -> SimulationConfig {
    let dt = SimulationConfig::max_dt(model);
    SimulationConfig {
        dt,
        duration: dt * (segment_len * (segments_per_traj + 1) / 2) as f64,
        n_trajectories: n_traj,
        seed: 20240611,
        record: vec![Observable::Homodyne],
        burn_in: None,
        segment_len,
    }
}

#[test]
fn uncoupled_cavity_reflects_vacuum() {
    // T > 0 drives the membrane, but nothing reaches the light at G = 0
    for (temp, delta) in [(0.0, 0.4), (300.0, 0.0)] {
        let mut m = uncoupled(temp, 10.0);
        m.delta = delta * m.omega_m;
        let theta = std::f64::consts::FRAC_PI_2;
        let cfg = config(&m, 1024, 100, 4);
        let (_, est) = stream_psd(&m, theta, &cfg, Observable::Homodyne).unwrap();
        let n = est.psd.len();
        let mean: f64 = est.psd[1..n - 1].iter().sum::<f64>() / (n - 2) as f64;
        assert!((mean / 0.5 - 1.0).abs() < 0.01, "T={temp}: {mean}");
        let outliers = (1..n - 1)
            .filter(|&k| (est.psd[k] - 0.5).abs() > 4.0 * est.stderr[k])
            .count();
        assert!(outliers <= 2, "{outliers}");
    }
}

#[test]
fn thermal_lorentzian_and_equipartition() {
    let m = uncoupled(4.0, 10.0);
    let cfg = config(&m, 8192, 1500, 4);
    let (_, est) = stream_psd(&m, 0.0, &cfg, Observable::Position).unwrap();
    let floor = 2.0 * m.mass * m.gamma * K_B * m.temperature;
    for (k, &w) in est.omega.iter().enumerate() {
        if (w - m.omega_m).abs() > 2.0 * m.gamma {
            continue;
        }
        let reference = floor * bare_susceptibility(&m, w).norm_sqr();
        assert!(
            (est.psd[k] / reference - 1.0).abs() < 0.05,
            "ω={w}: {} vs {reference}",
            est.psd[k]
        );
    }
    let expected = K_B * m.temperature / (m.mass * m.omega_m.powi(2));
    assert!(
        (est.variance / expected - 1.0).abs() < 0.03,
        "{} vs {expected}",
        est.variance
    );
    assert!((est.integrated_power() / est.variance - 1.0).abs() < 0.02);
}

#[test]
fn identical_seed_is_bit_identical_across_thread_counts() {
    let (m, theta) = base_optimum(0.01);
    let mut cfg = config(&m, 1024, 8, 6);
    cfg.record = vec![Observable::Position, Observable::Homodyne];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&m, theta, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let pa = estimate_psd(&a, Observable::Homodyne).unwrap();
    let pb = estimate_psd(&b, Observable::Homodyne).unwrap();
    assert_eq!(pa, pb);
    cfg.seed += 1;
    let c = simulate(&m, theta, &cfg).unwrap();
    assert_ne!(a.trajectories[0], c.trajectories[0]);
}

#[test]
fn ensemble_means_vanish() {
    let (m, theta) = base_optimum(0.01);
    let mut cfg = config(&m, 1024, 200, 4);
    cfg.record = vec![
        Observable::Position,
        Observable::Momentum,
        Observable::QuadratureX,
        Observable::QuadratureY,
        Observable::Homodyne,
    ];
    let ens = simulate(&m, theta, &cfg).unwrap();
    for &obs in &cfg.record {
        let est = estimate_psd(&ens, obs).unwrap();
        let all: Vec<f64> = ens
            .trajectories
            .iter()
            .flat_map(|t| t.get(obs).unwrap().iter().copied())
            .collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // standard error of the mean from the DC spectral density
        let duration = cfg.duration * cfg.n_trajectories as f64;
        let sem = (est.psd[1].max(est.psd[0]) / duration).sqrt();
        assert!(mean.abs() < 5.0 * sem, "{}: mean {mean}, sem {sem}", obs.name());
    }
}

#[test]
fn halving_dt_leaves_spectrum_unchanged() {
    let (m, theta) = base_optimum(0.01);
    let dt = SimulationConfig::max_dt(&m);
    let coarse = Discretization::new(&m, theta, dt);
    let fine = Discretization::new(&m, theta, dt / 2.0);
    let bw = bandwidth(&m, theta, 0.01).unwrap().measured;
    for i in 1..=60 {
        let w = 3.0 * bw * i as f64 / 60.0;
        let a = discrete_homodyne_psd(&coarse, w);
        let b = discrete_homodyne_psd(&fine, w);
        assert!((a / b - 1.0).abs() < 0.01, "ω={w}: {a} vs {b}");
        let exact = symmetrized(&m, theta, w);
        assert!((a / exact - 1.0).abs() < 1e-3);
    }
    // and the sampled process realizes it
    // segments long enough that window smoothing is negligible
    let mut cfg = config(&m, 1 << 18, 32, 4);
    cfg.dt = dt / 2.0;
    cfg.duration = cfg.dt * ((1 << 18) * 33 / 2) as f64;
    let (_, est) = stream_psd(&m, theta, &cfg, Observable::Homodyne).unwrap();
    let mut chi2 = 0.0;
    let mut bins = 0;
    for k in 1..est.omega.len() {
        if est.omega[k] > 3.0 * bw {
            break;
        }
        let z = (est.psd[k] - discrete_homodyne_psd(&fine, est.omega[k])) / est.stderr[k];
        chi2 += z * z;
        bins += 1;
    }
    assert!(bins >= 3 && chi2 / (bins as f64) < 3.0, "χ²/n = {}", chi2 / bins as f64);
}

fn symmetrized(m: &LinearModel, theta: f64, w: f64) -> f64 {
    optoforce_core::detection::symmetrized_squeezing(m, theta, w).unwrap()
}

#[test]
fn thermal_floor_dominates_force_channel() {
    let (mut m, theta) = base_optimum(0.01);
    m.temperature = 300.0;
    m.gamma = m.omega_m / 10.0;
    let cfg = config(&m, 4096, 2500, 4);
    let report = validate(&m, theta, &cfg, 3e6, 0.05).unwrap();
    let floor = m.thermal_force_psd();
    for b in &report.bins {
        assert!((b.force_ref / floor - 1.0).abs() < 1e-3);
        assert!(
            (b.force_psd / floor - 1.0).abs() < 0.05,
            "ω={}: {}",
            b.omega,
            b.force_psd / floor
        );
    }
    assert!(report.passed);
}

#[test]
fn wrong_detuning_sign_is_flagged() {
    let (m, theta) = base_optimum(0.01);
    let mut flipped = m;
    flipped.delta = -m.delta;
    let bw = bandwidth(&m, theta, 0.01).unwrap().measured;
    let cfg = config(&m, 1 << 16, 16, 2);
    let honest = validate(&m, theta, &cfg, 3.0 * bw, 0.2).unwrap();
    let control = validate_against(&m, &flipped, theta, &cfg, 3.0 * bw, 0.2).unwrap();
    assert!(honest.discretization_max_rel_dev < 1e-3);
    assert!(control.squeezing_max_rel_dev > 0.2, "{}", control.squeezing_max_rel_dev);
    assert!(!control.passed);
}

#[test]
fn rejects_bad_configurations() {
    let (m, theta) = base_optimum(0.01);
    let mut cfg = config(&m, 1024, 8, 1);
    cfg.dt *= 1.5;
    assert!(matches!(simulate(&m, theta, &cfg), Err(OracleError::Config(_))));
    let mut cfg = config(&m, 1024, 8, 1);
    cfg.burn_in = Some(1e-9);
    assert!(matches!(simulate(&m, theta, &cfg), Err(OracleError::Config(_))));
    let above = m.with_pump_ratio(1.01);
    let cfg = config(&m, 1024, 8, 1);
    assert!(matches!(simulate(&above, theta, &cfg), Err(OracleError::Physics(_))));
    let cfg = config(&m, 1024, 4, 1);
    assert!(matches!(
        validate(&m, theta, &cfg, 1e5, 0.05),
        Err(OracleError::TooFewSegments { .. })
    ));
}

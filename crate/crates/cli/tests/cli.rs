use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_optoforce");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("OPTOFORCE_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Map<String, Value>)) -> PathBuf {
    let text = std::fs::read_to_string(config("base.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    edit(v.as_object_mut().unwrap());
    let path = dir.join("params.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_key_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |m| {
        m.remove("mass_kg");
    });
    let out_path = dir.path().join("eta.csv");
    let out = run(&["spectrum", "--config", s(&cfg), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass_kg"));
    let files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(files, vec![std::ffi::OsString::from("params.json")]);
}

#[test]
fn conflicting_and_unknown_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |m| {
        m.insert("finesse".into(), Value::from(1e4));
    });
    let out = run(&["stability", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("finesse"));

    let out = run(&["stability", "--config", s(&config("base.json")), "--set", "colour=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn spectrum_dc_value_and_manifest_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let out = run(&[
        "spectrum",
        "--config",
        s(&config("base.json")),
        "--theta-offset",
        "0.01",
        "--points",
        "64",
        "--output",
        s(&first),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(&first).unwrap();
    let (header, rows) = csv_rows(&bytes);
    assert_eq!(header[0], "omega_rad_s");
    assert_eq!(header[1], "total_N2_per_Hz");
    assert_eq!(rows.len(), 64);
    assert_eq!(rows[0][0], 0.0);
    let omega_m = std::f64::consts::TAU * 1e6;
    let expected = 1.054571817e-34 * 5.36e-10 * omega_m * omega_m * 1e-4;
    assert!((rows[0][1] / expected - 1.0).abs() < 0.01, "{}", rows[0][1]);
    // columns are components of the total
    for r in &rows {
        let sum = r[2] + r[3] + r[4] + r[5] + r[6];
        assert!((sum - r[1]).abs() <= 1e-6 * r[3].max(r[4]));
    }

    let manifest = dir.path().join("a.csv.manifest.json");
    let m: Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "spectrum");
    assert_eq!(m["params"]["xi"], 0.01);

    let second = dir.path().join("b.csv");
    let out = run(&[
        "spectrum",
        "--config",
        s(&manifest),
        "--points",
        "64",
        "--output",
        s(&second),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&second).unwrap(), bytes);
}

#[test]
fn physics_rejections_exit_3() {
    let base = config("base.json");
    let out = run(&[
        "spectrum",
        "--config",
        s(&base),
        "--set",
        "effective_detuning_over_kappa=-1",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |m| {
        m.remove("pump");
        m.insert("pump_power_W".into(), Value::from(10.0));
    });
    let out = run(&["stability", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stable"], false);
    assert_eq!(v["minors"].as_array().unwrap().len(), 4);
    let out = run(&["spectrum", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn override_replaces_alternative_key() {
    let base = s(&config("base.json")).to_string();
    let a = run(&["stability", "--config", &base]);
    let b = run(&["stability", "--config", &base, "--set", "kappa_Hz=2e5"]);
    assert!(a.status.success() && b.status.success());
    let (a, b): (Value, Value) = (
        serde_json::from_slice(&a.stdout).unwrap(),
        serde_json::from_slice(&b.stdout).unwrap(),
    );
    assert_eq!(a["kappa_rad_s"].as_f64().unwrap(), 0.2 * std::f64::consts::TAU * 1e6);
    assert!((b["kappa_rad_s"].as_f64().unwrap() / (std::f64::consts::TAU * 2e5) - 1.0).abs() < 1e-12);
}

#[test]
fn cavity_sweep_columns() {
    let out = run(&[
        "cavity-sweep",
        "--config",
        s(&config("reference_point.json")),
        "--points",
        "21",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(
        header,
        ["x_m", "splitting_rad_s", "omega_plus_rad_s", "omega_minus_rad_s"]
    );
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[10][0], 0.0);
    assert!(rows[0][1] > rows[10][1]);
    let out = run(&[
        "cavity-sweep",
        "--config",
        s(&config("reference_point.json")),
        "--x-max",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn squeezing_with_efficiency_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("s.svg");
    let out = run(&[
        "squeezing",
        "--config",
        s(&config("base.json")),
        "--efficiency",
        "0.99",
        "--points",
        "50",
        "--log",
        "--svg",
        s(&svg),
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(&header[5..], ["dB_rel_unity", "dB_rel_vacuum"]);
    assert!(rows.iter().all(|r| r[1] >= 0.005));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(dir.path().join("s.svg.manifest.json").exists());
}

#[test]
fn optimize_and_sweep() {
    let out = run(&["optimize", "--config", s(&config("base.json"))]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["sql_ratio"].as_f64().unwrap() / 1e-4 - 1.0).abs() < 0.01);

    let out = run(&[
        "sweep",
        "--config",
        s(&config("base.json")),
        "--param",
        "xi",
        "--range",
        "0.001:0.01:4",
        "--log",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header[0], "xi");
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][8] > w[0][8]));

    let out = run(&[
        "sweep",
        "--config",
        s(&config("base.json")),
        "--param",
        "kappa",
        "--range",
        "0.1:oops:3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn montecarlo(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = Command::new(BIN)
        .args([
            "montecarlo",
            "--config",
            s(&config("base.json")),
            "--ntraj",
            "3",
            "--segment-len",
            "1024",
            "--seed",
            "9",
            "--output",
            s(&path),
        ])
        .env("OPTOFORCE_THREADS", threads)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn montecarlo_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = montecarlo(dir.path(), "a.csv", "1");
    let b = montecarlo(dir.path(), "b.csv", "2");
    assert_eq!(a, b);
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.report.json")).unwrap()).unwrap();
    assert_eq!(report["n_segments"], 3 * 32);
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn bad_thread_count_exits_2() {
    let out = Command::new(BIN)
        .args(["stability", "--config", s(&config("base.json"))])
        .env("OPTOFORCE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_exit_status_follows_tolerance() {
    let args = |tol: &'static str| {
        vec![
            "validate",
            "--ntraj",
            "2",
            "--segment-len",
            "1024",
            "--duration",
            "1.4e-4",
            "--band-max",
            "2e6",
            "--tolerance",
            tol,
        ]
    };
    let base = config("base.json");
    let mut strict = args("1e-9");
    strict.extend(["--config", s(&base)]);
    let out = run(&strict);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);

    let mut loose = args("100");
    loose.extend(["--config", s(&base)]);
    let out = run(&loose);
    assert_eq!(out.status.code(), Some(0));
}

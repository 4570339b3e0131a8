//! `optoforce`: batch front end for the force-sensing model and its
//! Monte Carlo oracle.
//!
//! Exit status: 0 success, 1 validation outside tolerance, 2 invalid
//! input, 3 physically rejected operating point, 4 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optoforce_core::ErrorKind;
use optoforce_oracle::OracleError;
use serde_json::Value;

#[derive(Parser)]
#[command(
    name = "optoforce",
    version,
    about = "Quantum-limited force sensing near an optomechanical instability"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct Common {
    /// Parameter file (JSON), or a run manifest to repeat.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Primary output file; stdout when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Override a parameter-file key, e.g. `--set kappa_Hz=2e5`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = config::parse_assignment, global = true)]
    pub set: Vec<(String, Value)>,
    /// Same as `--set xi=...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_offset: Option<f64>,
    /// Same as `--set homodyne_angle_rad=...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Same as `--set efficiency=...`.
    #[arg(long, global = true)]
    pub efficiency: Option<f64>,
    /// Same as `--set temperature_K=...`.
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, Value)> {
        let mut out = self.set.clone();
        let named = [
            ("xi", self.theta_offset),
            ("homodyne_angle_rad", self.theta),
            ("efficiency", self.efficiency),
            ("temperature_K", self.temperature),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), Value::from(v)));
            }
        }
        out
    }
}

#[derive(Args, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    /// Defaults to 2·max(ω_m, κ, Δ).
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Logarithmic spacing (needs omega-min > 0; defaults to omega-max·1e-4).
    #[arg(long)]
    pub log: bool,
}

#[derive(Args, Clone)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Integration step, s. Defaults to the largest accepted step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Recorded time per trajectory after burn-in, s.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub ntraj: Option<usize>,
    /// One of x, p, X, Y, S.
    #[arg(long, default_value = "S")]
    pub observable: String,
    /// Welch segment length in samples (power of two).
    #[arg(long)]
    pub segment_len: Option<usize>,
    /// Discarded transient, s.
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Highest compared frequency, rad/s.
    #[arg(long)]
    pub band_max: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SweepParam {
    /// κ/ω_m at fixed Δ/κ.
    Kappa,
    /// ξ.
    Xi,
    /// Δ/κ.
    Delta,
}

#[derive(Subcommand)]
enum Command {
    /// Normal-mode frequencies against membrane displacement.
    CavitySweep {
        /// Largest |x|, m. Defaults to λ/8.
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Routh–Hurwitz report for the configured operating point.
    Stability,
    /// Force-noise spectrum η(ω) and its parts.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Squeezing spectrum of the homodyne record.
    Squeezing {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Analytic optimum at Δ = 2κ for the configured ξ.
    Optimize {
        /// Also run the unconstrained numeric searches.
        #[arg(long)]
        check: bool,
        /// Write η(ω) at the optimum to this CSV.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Optimum figures of merit along one parameter.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// start:stop:count
        #[arg(long)]
        range: String,
        #[arg(long)]
        log: bool,
    },
    /// Langevin ensemble and Welch PSD of one observable.
    Montecarlo {
        #[command(flatten)]
        sim: SimArgs,
        /// JSON report path; defaults to <output>.report.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo against analytic spectra; exits 1 when outside tolerance.
    Validate {
        #[command(flatten)]
        sim: SimArgs,
        /// Per-bin CSV path; defaults to <output>.bins.csv.
        #[arg(long)]
        bins: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CavitySweep { .. } => "cavity-sweep",
            Command::Stability => "stability",
            Command::Spectrum { .. } => "spectrum",
            Command::Squeezing { .. } => "squeezing",
            Command::Optimize { .. } => "optimize",
            Command::Sweep { .. } => "sweep",
            Command::Montecarlo { .. } => "montecarlo",
            Command::Validate { .. } => "validate",
        }
    }
}

/// An error carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<optoforce_core::Error> for Failure {
    fn from(e: optoforce_core::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::InvalidInput => 2,
            ErrorKind::Physics => 3,
            ErrorKind::Numerical => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Physics(inner) => inner.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("OPTOFORCE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::input(format!("OPTOFORCE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::input(format!("cannot start {n} threads: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    init_threads()?;
    let path = cli
        .common
        .config
        .as_deref()
        .ok_or_else(|| Failure::input("--config is required"))?;
    let mut file = config::load(path)?;
    config::apply(&mut file, &cli.common.overrides())?;
    let setup = config::resolve(file)?;

    let outcome = match &cli.command {
        Command::CavitySweep { x_max, points } => commands::cavity_sweep(&setup, *x_max, *points),
        Command::Stability => commands::stability(&setup),
        Command::Spectrum { grid, svg } => commands::spectrum(&setup, grid, svg.as_deref()),
        Command::Squeezing { grid, svg } => commands::squeezing(&setup, grid, svg.as_deref()),
        Command::Optimize { check, spectrum, grid } => commands::optimize(&setup, *check, spectrum.as_deref(), grid),
        Command::Sweep { param, range, log } => commands::sweep(&setup, *param, range, *log),
        Command::Montecarlo { sim, report } => {
            commands::montecarlo(&setup, sim, cli.common.output.as_deref(), report.as_deref())
        }
        Command::Validate { sim, bins } => {
            commands::validate(&setup, sim, cli.common.output.as_deref(), bins.as_deref())
        }
    }?;
    commands::finish(outcome, &setup, cli.command.name(), cli.common.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

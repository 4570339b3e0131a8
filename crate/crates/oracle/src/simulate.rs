use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use optoforce_core::dynamics::{scaled_drift_matrix, stability, zero_point_length};
use optoforce_core::LinearModel;

use crate::discretize::{Discretization, Vec5};
use crate::psd::{pairwise_merge, PsdEstimate, Welch};
use crate::{OracleError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Membrane displacement x, m.
    Position,
    /// Membrane momentum p, kg·m/s.
    Momentum,
    /// Intracavity amplitude quadrature X.
    QuadratureX,
    /// Intracavity phase quadrature Y.
    QuadratureY,
    /// Homodyne record S = sinθ·X_out + cosθ·Y_out, averaged over each step.
    Homodyne,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Position => "x",
            Observable::Momentum => "p",
            Observable::QuadratureX => "X",
            Observable::QuadratureY => "Y",
            Observable::Homodyne => "S",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "x" => Observable::Position,
            "p" => Observable::Momentum,
            "X" => Observable::QuadratureX,
            "Y" => Observable::QuadratureY,
            "S" => Observable::Homodyne,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Recorded duration per trajectory after burn-in, s.
    pub duration: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    pub record: Vec<Observable>,
    /// Discarded transient, s. `None` picks 10 slowest relaxation times.
    pub burn_in: Option<f64>,
    /// Welch segment length in samples.
    pub segment_len: usize,
}

impl SimulationConfig {
    /// Largest step allowed: 1/(20·max(κ, |Δ|, ω_m)).
    pub fn max_dt(model: &LinearModel) -> f64 {
        1.0 / (20.0 * model.kappa.max(model.delta.abs()).max(model.omega_m))
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub(crate) fn burn_in_steps(&self, model: &LinearModel) -> Result<usize> {
        let minimum = 10.0 / slowest_decay_rate(model);
        let burn = self.burn_in.unwrap_or(minimum);
        if burn < minimum * (1.0 - 1e-12) {
            return Err(OracleError::Config(format!(
                "burn-in {burn:e} s is shorter than 10 relaxation times ({minimum:e} s)"
            )));
        }
        Ok((burn / self.dt).ceil() as usize)
    }

    pub(crate) fn check(&self, model: &LinearModel) -> Result<()> {
        // an uncoupled passive cavity is stable at any detuning
        let uncoupled = model.coupling == 0.0 && model.gamma > 0.0 && model.kappa > 0.0;
        if !uncoupled {
            let report = stability(model)?;
            if !report.stable {
                return Err(OracleError::Physics(optoforce_core::Error::AboveThreshold {
                    ratio: report.pump_ratio,
                }));
            }
        }
        let max_dt = Self::max_dt(model);
        if !(self.dt > 0.0 && self.dt <= max_dt * (1.0 + 1e-12)) {
            return Err(OracleError::Config(format!(
                "dt = {:e} s exceeds {max_dt:e} s",
                self.dt
            )));
        }
        if self.n_trajectories == 0 || self.steps() == 0 {
            return Err(OracleError::Config("need at least one trajectory and one step".into()));
        }
        if self.segment_len < 16 || !self.segment_len.is_power_of_two() {
            return Err(OracleError::Config(format!(
                "segment length {} must be a power of two >= 16",
                self.segment_len
            )));
        }
        Ok(())
    }
}

/// Smallest decay rate -Re(λ) over the eigenvalues of the drift matrix.
pub fn slowest_decay_rate(model: &LinearModel) -> f64 {
    let a = scaled_drift_matrix(model);
    let m = nalgebra::Matrix4::from_fn(|i, j| a[i][j]);
    m.complex_eigenvalues()
        .iter()
        .map(|l| -l.re)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    pub series: Vec<(Observable, Vec<f64>)>,
}

impl Trajectory {
    pub fn get(&self, obs: Observable) -> Option<&[f64]> {
        self.series.iter().find(|(o, _)| *o == obs).map(|(_, v)| v.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub config: SimulationConfig,
    pub theta: f64,
    pub trajectories: Vec<Trajectory>,
}

/// Converts the zero-point-unit state to SI observables.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Readout {
    x_scale: f64,
    p_scale: f64,
    inv_dt: f64,
}

impl Readout {
    pub(crate) fn new(model: &LinearModel, dt: f64) -> Self {
        let xs = zero_point_length(model);
        Self {
            x_scale: xs,
            p_scale: model.mass * model.omega_m * xs,
            inv_dt: 1.0 / dt,
        }
    }

    #[inline]
    pub(crate) fn read(&self, state: &Vec5, obs: Observable) -> f64 {
        match obs {
            Observable::Position => state[0] * self.x_scale,
            Observable::Momentum => state[1] * self.p_scale,
            Observable::QuadratureX => state[2],
            Observable::QuadratureY => state[3],
            Observable::Homodyne => state[4] * self.inv_dt,
        }
    }
}

/// Runs one trajectory on its own RNG stream, calling `sink` with the state
/// after every recorded step.
pub(crate) fn run_trajectory(
    disc: &Discretization,
    seed: u64,
    index: usize,
    burn_steps: usize,
    steps: usize,
    mut sink: impl FnMut(&Vec5),
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut state = Vec5::zeros();
    let mut normals = Vec5::zeros();
    for k in 0..burn_steps + steps {
        for v in normals.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        state = disc.step(&state, &normals);
        if k >= burn_steps {
            sink(&state);
        }
    }
}

/// Integrates the linear Langevin equations exactly (matrix exponential
/// plus exactly sampled increments) and stores the requested records.
pub fn simulate(model: &LinearModel, theta: f64, config: &SimulationConfig) -> Result<TrajectoryEnsemble> {
    config.check(model)?;
    let disc = Discretization::new(model, theta, config.dt);
    let burn = config.burn_in_steps(model)?;
    let steps = config.steps();
    let readout = Readout::new(model, config.dt);
    let trajectories = (0..config.n_trajectories)
        .into_par_iter()
        .map(|index| {
            let mut series: Vec<(Observable, Vec<f64>)> =
                config.record.iter().map(|&o| (o, Vec::with_capacity(steps))).collect();
            run_trajectory(&disc, config.seed, index, burn, steps, |s| {
                for (obs, v) in series.iter_mut() {
                    v.push(readout.read(s, *obs));
                }
            });
            Trajectory { index, series }
        })
        .collect();
    Ok(TrajectoryEnsemble {
        config: config.clone(),
        theta,
        trajectories,
    })
}

/// Welch PSD of one observable accumulated while integrating, without
/// storing the records. Trajectories run in parallel; their sums are
/// merged pairwise in trajectory order.
pub fn stream_psd(
    model: &LinearModel,
    theta: f64,
    config: &SimulationConfig,
    observable: Observable,
) -> Result<(Discretization, PsdEstimate)> {
    config.check(model)?;
    let disc = Discretization::new(model, theta, config.dt);
    let burn = config.burn_in_steps(model)?;
    let steps = config.steps();
    let readout = Readout::new(model, config.dt);
    let template = Welch::new(config.segment_len, config.dt);
    let parts: Vec<Welch> = (0..config.n_trajectories)
        .into_par_iter()
        .map(|index| {
            let mut w = template.empty_like();
            run_trajectory(&disc, config.seed, index, burn, steps, |s| {
                w.push(readout.read(s, observable))
            });
            w.end_record();
            w
        })
        .collect();
    let est = pairwise_merge(parts).unwrap_or(template).finish()?;
    Ok((disc, est))
}

use serde::{Deserialize, Serialize};

use super::{
    Branch, CavityParams, Detuning, Homodyne, Linewidth, MechanicalParams, OperatingPoint, OpticalFrequency, Pump,
    SystemParams,
};
use crate::error::{Error, Result};
use crate::optimize::PumpRule;
use crate::scalar::Real;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Flat JSON parameter file with unit-suffixed keys.
///
/// Frequencies are accepted either in rad/s (`*_rad_s`) or in Hz (`*_Hz`,
/// converted with 2π); exactly one member of each alternative group must be
/// present. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_m_rad_s: Option<f64>,
    #[serde(rename = "f_m_Hz", skip_serializing_if = "Option::is_none")]
    pub f_m_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad_s: Option<f64>,
    #[serde(rename = "gamma_Hz", skip_serializing_if = "Option::is_none")]
    pub gamma_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanical_q: Option<f64>,
    #[serde(rename = "temperature_K", skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c_rad_s: Option<f64>,
    #[serde(rename = "f_c_Hz", skip_serializing_if = "Option::is_none")]
    pub f_c_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcavity_length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_rad_s: Option<f64>,
    #[serde(rename = "kappa_Hz", skip_serializing_if = "Option::is_none")]
    pub kappa_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub middle_mirror_reflectivity: Option<f64>,

    #[serde(rename = "pump_power_W", skip_serializing_if = "Option::is_none")]
    pub pump_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// `"optimal"` (exact optimum) or `"optimal_near_critical"` (linearized in δθ).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_rad_s: Option<f64>,
    #[serde(rename = "detuning_Hz", skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_detuning_rad_s: Option<f64>,
    #[serde(rename = "effective_detuning_Hz", skip_serializing_if = "Option::is_none")]
    pub effective_detuning_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_detuning_over_kappa: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub homodyne_angle_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// `"above"` (default) or `"below"` the critical angle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homodyne_branch: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
}

/// Picks the single present member of an either/or group.
fn one_of<const N: usize>(group: [(&str, Option<f64>); N], required: bool) -> Result<Option<(usize, f64)>> {
    let present: Vec<(usize, &str, f64)> = group
        .iter()
        .enumerate()
        .filter_map(|(i, (k, v))| v.map(|v| (i, *k, v)))
        .collect();
    match present.as_slice() {
        [] if required && N == 1 => Err(Error::config(group[0].0, "missing")),
        [] if required => {
            let names: Vec<&str> = group.iter().map(|(k, _)| *k).collect();
            Err(Error::config(
                names[0],
                format!("missing; supply exactly one of {}", names.join(", ")),
            ))
        }
        [] => Ok(None),
        [(i, k, v)] => {
            if v.is_finite() {
                Ok(Some((*i, *v)))
            } else {
                Err(Error::config(*k, "must be a finite number"))
            }
        }
        [(_, a, _), (_, b, _), ..] => Err(Error::config(*b, format!("conflicts with `{a}`; supply exactly one"))),
    }
}

fn required(key: &str, v: Option<f64>) -> Result<f64> {
    one_of([(key, v)], true).map(|o| o.expect("required").1)
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(name, reason),
        other => other,
    }
}

/// Keys describing the same quantity; setting one member drops the others.
pub const KEY_GROUPS: &[&[&str]] = &[
    &["omega_m_rad_s", "f_m_Hz"],
    &["gamma_rad_s", "gamma_Hz", "mechanical_q"],
    &["wavelength_m", "omega_c_rad_s", "f_c_Hz"],
    &["kappa_rad_s", "kappa_Hz", "finesse"],
    &["pump_power_W", "alpha", "pump"],
    &[
        "detuning_rad_s",
        "detuning_Hz",
        "effective_detuning_rad_s",
        "effective_detuning_Hz",
        "effective_detuning_over_kappa",
    ],
    &["homodyne_angle_rad", "xi"],
];

impl ParamFile {
    /// Overrides one key, removing the other members of its group.
    pub fn set(&mut self, key: &str, value: serde_json::Value) -> Result<()> {
        let mut obj = match serde_json::to_value(&*self).expect("plain data serializes") {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("ParamFile serializes to an object"),
        };
        if let Some(group) = KEY_GROUPS.iter().find(|g| g.contains(&key)) {
            for k in group.iter() {
                obj.remove(*k);
            }
        }
        obj.insert(key.to_string(), value);
        *self = Self::from_json(&serde_json::Value::Object(obj).to_string())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde reports the offending field inside backticks
            let key = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            Error::config(key, msg)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Validates the file and builds the typed parameter model.
    pub fn resolve<T: Real>(&self) -> Result<(SystemParams<T>, OperatingPoint<T>)> {
        let t = |v: f64| T::lit(v);

        let mass = required("mass_kg", self.mass_kg)?;
        let (i, w) = one_of([("omega_m_rad_s", self.omega_m_rad_s), ("f_m_Hz", self.f_m_hz)], true)?.unwrap();
        let omega_m = if i == 0 { w } else { TAU * w };
        let (i, v) = one_of(
            [
                ("gamma_rad_s", self.gamma_rad_s),
                ("gamma_Hz", self.gamma_hz),
                ("mechanical_q", self.mechanical_q),
            ],
            true,
        )?
        .unwrap();
        let gamma = match i {
            0 => v,
            1 => TAU * v,
            _ => omega_m / v,
        };
        let temperature = required("temperature_K", self.temperature_k)?;
        let mech = MechanicalParams::new(t(mass), t(omega_m), t(gamma), t(temperature)).map_err(as_config)?;

        let (i, v) = one_of(
            [
                ("wavelength_m", self.wavelength_m),
                ("omega_c_rad_s", self.omega_c_rad_s),
                ("f_c_Hz", self.f_c_hz),
            ],
            true,
        )?
        .unwrap();
        let frequency = match i {
            0 => OpticalFrequency::Wavelength(t(v)),
            1 => OpticalFrequency::Angular(t(v)),
            _ => OpticalFrequency::Angular(t(TAU * v)),
        };
        let length = required("subcavity_length_m", self.subcavity_length_m)?;
        let (i, v) = one_of(
            [
                ("kappa_rad_s", self.kappa_rad_s),
                ("kappa_Hz", self.kappa_hz),
                ("finesse", self.finesse),
            ],
            true,
        )?
        .unwrap();
        let linewidth = match i {
            0 => Linewidth::Kappa(t(v)),
            1 => Linewidth::Kappa(t(TAU * v)),
            _ => Linewidth::Finesse(t(v)),
        };
        let r = required("middle_mirror_reflectivity", self.middle_mirror_reflectivity)?;
        let cavity = CavityParams::new(frequency, t(length), linewidth, t(r)).map_err(as_config)?;
        let kappa = cavity.kappa();

        let pump_mode = match self.pump.as_deref() {
            None => None,
            Some("optimal") => Some(PumpRule::Exact),
            Some("optimal_near_critical") => Some(PumpRule::NearCritical),
            Some(other) => {
                return Err(Error::config(
                    "pump",
                    format!("unknown value `{other}`; expected \"optimal\" or \"optimal_near_critical\""),
                ))
            }
        };
        let numeric_pump = one_of([("pump_power_W", self.pump_power_w), ("alpha", self.alpha)], false)?;
        let pump = match (numeric_pump, pump_mode) {
            (Some(_), Some(_)) => {
                let key = if self.pump_power_w.is_some() {
                    "pump_power_W"
                } else {
                    "alpha"
                };
                return Err(Error::config(
                    "pump",
                    format!("conflicts with `{key}`; supply exactly one"),
                ));
            }
            (None, None) => {
                return Err(Error::config(
                    "pump_power_W",
                    "missing; supply exactly one of pump_power_W, alpha, pump",
                ))
            }
            (None, Some(rule)) => Pump::Optimal(rule),
            (Some((0, p)), None) => Pump::Power(t(p)),
            (Some((_, a)), None) => Pump::Amplitude(t(a)),
        };

        let (i, v) = one_of(
            [
                ("detuning_rad_s", self.detuning_rad_s),
                ("detuning_Hz", self.detuning_hz),
                ("effective_detuning_rad_s", self.effective_detuning_rad_s),
                ("effective_detuning_Hz", self.effective_detuning_hz),
                ("effective_detuning_over_kappa", self.effective_detuning_over_kappa),
            ],
            true,
        )?
        .unwrap();
        let detuning = match i {
            0 => Detuning::Cavity(t(v)),
            1 => Detuning::Cavity(t(TAU * v)),
            2 => Detuning::Effective(t(v)),
            3 => Detuning::Effective(t(TAU * v)),
            _ => Detuning::Effective(t(v) * kappa),
        };

        let branch = match self.homodyne_branch.as_deref() {
            None | Some("above") => Branch::Above,
            Some("below") => Branch::Below,
            Some(other) => {
                return Err(Error::config(
                    "homodyne_branch",
                    format!("unknown value `{other}`; expected \"above\" or \"below\""),
                ))
            }
        };
        let (i, v) = one_of([("homodyne_angle_rad", self.homodyne_angle_rad), ("xi", self.xi)], true)?.unwrap();
        let homodyne = if i == 0 {
            Homodyne::Angle(t(v))
        } else {
            Homodyne::Offset { xi: t(v), branch }
        };

        let efficiency = self.efficiency.unwrap_or(1.0);
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::config(
                "efficiency",
                format!("must lie in (0, 1], got {efficiency}"),
            ));
        }

        Ok((
            SystemParams::new(mech, cavity),
            OperatingPoint {
                pump,
                detuning,
                homodyne,
                efficiency: t(efficiency),
            },
        ))
    }
}

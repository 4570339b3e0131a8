//! Parameter file loading and command-line overrides.

use std::path::Path;

use optoforce_core::params::ParamFile;
use optoforce_core::params::{self, DerivedQuantities};
use optoforce_core::{OperatingPoint, SystemParams};
use serde_json::Value;

use crate::Failure;

/// A resolved configuration together with the file it was built from.
pub struct Setup {
    pub file: ParamFile,
    pub system: SystemParams,
    pub op: OperatingPoint,
}

impl Setup {
    pub fn derive(&self) -> Result<DerivedQuantities<f64>, Failure> {
        Ok(params::derive(&self.system, &self.op)?)
    }
}

/// Reads a parameter file, or the `params` object of a run manifest.
pub fn load(path: &Path) -> Result<ParamFile, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{} is not valid JSON: {e}", path.display())))?;
    let params = match value {
        Value::Object(mut map) if map.contains_key("manifest_version") => map
            .remove("params")
            .ok_or_else(|| Failure::input(format!("manifest {} has no `params` object", path.display())))?,
        other => other,
    };
    Ok(ParamFile::from_json(&params.to_string())?)
}

/// `key=value`; the value is read as JSON when it parses, else as a string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

pub fn apply(file: &mut ParamFile, overrides: &[(String, Value)]) -> Result<(), Failure> {
    for (k, v) in overrides {
        file.set(k, v.clone())?;
    }
    Ok(())
}

pub fn resolve(file: ParamFile) -> Result<Setup, Failure> {
    let (system, op) = file.resolve::<f64>()?;
    Ok(Setup { file, system, op })
}

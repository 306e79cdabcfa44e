//! TOML run configuration.
//!
//! A file may name a preset, give calibration targets, override individual
//! parameters and set kernels, the initial history, the integration grid and
//! tolerances. Everything is resolved into a [`Resolved`] value, which is what
//! the commands consume and what the manifest echoes back.

use std::path::Path;

use hpa_core::model::PRESET_PAPER_S6;
use hpa_core::scenario::{
    ScenarioPreset, DEFAULT_STEP, DEFAULT_STRIDE, PRESET_FIG_DIRAC_50, PRESET_FIG_GAMMA_19,
};
use hpa_core::{calibrate, CalibrationTargets, ModelParams, PathwayKernels, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const PRESETS: [&str; 3] = [PRESET_PAPER_S6, PRESET_FIG_DIRAC_50, PRESET_FIG_GAMMA_19];

/// Horizon used when neither the file nor a scenario preset sets one.
const DEFAULT_T_END: f64 = 5000.0;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub calibration: Option<CalibrationTargets>,
    pub params: Option<ParamOverrides>,
    pub kernels: Option<PathwayKernels>,
    pub initial: Option<Initial>,
    pub integration: Option<IntegrationSection>,
    pub tolerances: Option<Tolerances>,
}

/// Any subset of [`ModelParams`] fields.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub k4: Option<f64>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub w3: Option<f64>,
    pub w4: Option<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub mu: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, p: &mut ModelParams) {
        let pairs = [
            (&mut p.k1, self.k1),
            (&mut p.k2, self.k2),
            (&mut p.k3, self.k3),
            (&mut p.k4, self.k4),
            (&mut p.w1, self.w1),
            (&mut p.w2, self.w2),
            (&mut p.w3, self.w3),
            (&mut p.w4, self.w4),
            (&mut p.xi, self.xi),
            (&mut p.eta, self.eta),
            (&mut p.mu, self.mu),
            (&mut p.alpha1, self.alpha1),
            (&mut p.alpha2, self.alpha2),
            (&mut p.alpha3, self.alpha3),
            (&mut p.c1, self.c1),
            (&mut p.c2, self.c2),
            (&mut p.c3, self.c3),
        ];
        for (slot, value) in pairs {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
}

/// Constant initial history: either an explicit state or a relative
/// perturbation of a named equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub near: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub stride: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integration {
    pub t_end: f64,
    pub step: f64,
    pub stride: f64,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolved {
    pub params: ModelParams,
    pub integration: Integration,
    /// Absent: 1% above the highest-cortisol equilibrium.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Initial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernels: Option<PathwayKernels>,
    pub tolerances: Tolerances,
}

impl Resolved {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved configuration serializes")
    }

    /// Parses the output of [`Resolved::to_toml`].
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn kernels(&self) -> Result<PathwayKernels, CliError> {
        self.kernels.ok_or_else(|| {
            CliError::Config(format!(
                "no kernels: add a [kernels] section or use a scenario preset ({PRESET_FIG_DIRAC_50}, {PRESET_FIG_GAMMA_19})"
            ))
        })
    }
}

pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Resolves a file, with `preset` from the command line taking precedence
/// over the file's own preset, and `overrides` (`key=value`) applied to the
/// tolerances last.
pub fn resolve(
    file: &ConfigFile,
    preset: Option<&str>,
    overrides: &[String],
) -> Result<Resolved, CliError> {
    let preset = preset.or(file.preset.as_deref());
    let scenario = match preset {
        None | Some(PRESET_PAPER_S6) => None,
        Some(name) => Some(ScenarioPreset::get(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESETS.join(", ")
            ))
        })?),
    };

    let mut params = match &file.calibration {
        Some(t) => calibrate(t).map_err(|e| CliError::Config(format!("[calibration] {e}")))?,
        None => ModelParams::paper_s6(),
    };
    if let Some(o) = &file.params {
        o.apply(&mut params);
    }
    params
        .validate()
        .map_err(|e| CliError::Config(format!("[params] {e}")))?;

    let section = file.integration.clone().unwrap_or_default();
    let integration = Integration {
        t_end: section
            .t_end
            .or(scenario.map(|s| s.t_end))
            .unwrap_or(DEFAULT_T_END),
        step: section.step.unwrap_or(DEFAULT_STEP),
        stride: section.stride.unwrap_or(DEFAULT_STRIDE),
    };

    let kernels = file.kernels.or(scenario.map(|s| s.kernels));
    if let Some(k) = &kernels {
        k.validate()
            .map_err(|e| CliError::Config(format!("[kernels] {e}")))?;
    }

    if let Some(init) = &file.initial {
        match (&init.state, &init.near) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "[initial] give either state or near, not both".into(),
                ))
            }
            (Some(_), None) if init.perturbation.is_some() => {
                return Err(CliError::Config(
                    "[initial] perturbation only applies with near".into(),
                ))
            }
            (None, None) => return Err(CliError::Config("[initial] needs state or near".into())),
            _ => {}
        }
    }

    let mut tolerances = file.tolerances.clone().unwrap_or_default();
    for kv in overrides {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--tolerance expects KEY=VALUE, got '{kv}'"))
        })?;
        tolerances
            .set(key.trim(), value)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    Ok(Resolved {
        params,
        integration,
        initial: file.initial.clone(),
        kernels,
        tolerances,
    })
}

//! Simulation scenarios: a model, kernels, a constant initial history and the
//! integration grid.

use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumSet;
use crate::kernel::PathwayKernels;
use crate::model::{Model, State};

pub const PRESET_FIG_DIRAC_50: &str = "fig-dirac-50";
pub const PRESET_FIG_GAMMA_19: &str = "fig-gamma-19";

/// Default RK4 step in minutes.
pub const DEFAULT_STEP: f64 = 0.05;
/// Default output stride in minutes.
pub const DEFAULT_STRIDE: f64 = 0.5;

/// Constant initial history on `(-∞, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialHistory {
    Constant(State),
    /// `E * (1 + perturbation)` componentwise for the equilibrium labelled `label`.
    Near {
        label: String,
        perturbation: f64,
    },
}

impl InitialHistory {
    pub fn resolve(&self, equilibria: &EquilibriumSet) -> Option<State> {
        match self {
            InitialHistory::Constant(x) => Some(*x),
            InitialHistory::Near {
                label,
                perturbation,
            } => equilibria
                .get(label)
                .map(|e| e.state.map(|v| v * (1.0 + perturbation))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub model: Model,
    pub kernels: PathwayKernels,
    pub history: State,
    /// Final time (min).
    pub t_end: f64,
    /// Output sampling interval (min).
    pub stride: f64,
    /// Integrator step (min).
    pub step: f64,
}

/// Kernel layout and horizon of a named scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub kernels: PathwayKernels,
    pub t_end: f64,
}

impl ScenarioPreset {
    pub fn get(name: &str) -> Option<Self> {
        match name {
            // tau1 = 0, tau2 = 30, tau31 = tau32 = tau34 = 20 (total 50 min)
            PRESET_FIG_DIRAC_50 => Some(ScenarioPreset {
                name: PRESET_FIG_DIRAC_50,
                kernels: PathwayKernels::dirac(0.0, 30.0, 20.0, 20.0, 20.0),
                t_end: 5000.0,
            }),
            // p1 = 0, p2 = p31 = p32 = p34 = 2, theta = 19 (total 76 min)
            PRESET_FIG_GAMMA_19 => Some(ScenarioPreset {
                name: PRESET_FIG_GAMMA_19,
                kernels: PathwayKernels::gamma(19.0, [0, 2, 2, 2, 2]),
                t_end: 8000.0,
            }),
            _ => None,
        }
    }

    pub fn scenario(&self, model: Model, history: State) -> ScenarioConfig {
        ScenarioConfig {
            model,
            kernels: self.kernels,
            history,
            t_end: self.t_end,
            stride: DEFAULT_STRIDE,
            step: DEFAULT_STEP,
        }
    }
}

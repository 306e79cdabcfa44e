//! One-parameter sweeps for two-branch bifurcation diagrams.
//!
//! Each grid value is simulated from a perturbation of the highest- and the
//! lowest-cortisol equilibrium and the resulting trajectories are classified.
//! Rows are computed in parallel and returned in grid order.

use rayon::prelude::*;
use thiserror::Error;

use crate::cycle::{detect_cycle, CycleClass};
use crate::equilibria::EquilibriumSet;
use crate::kernel::{BifurcationParameter, KernelError, KernelFamily};
use crate::scenario::ScenarioConfig;
use crate::sim::{integrate, Monitor, SimError};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// Total discrete delay; every Dirac delay is scaled proportionally.
    Tau,
    /// Shared Gamma scale.
    Theta,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Tau => "tau",
            SweepParameter::Theta => "theta",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("sweep needs at least 2 steps and from <= to (got {steps} steps over [{from}, {to}])")]
    Grid { from: f64, to: f64, steps: usize },
    #[error("parameter {0} does not apply to these kernels")]
    Parameter(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Label of the equilibrium the initial history was taken near.
    pub branch: String,
    pub class: CycleClass,
    pub period: Option<f64>,
    pub x3_min: f64,
    pub x3_max: f64,
    pub matched: Option<String>,
}

/// Runs the sweep; `base` supplies model, kernels and integration grid (its
/// history is ignored).
pub fn run_sweep(
    base: &ScenarioConfig,
    equilibria: &EquilibriumSet,
    spec: &SweepSpec,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>, SweepError> {
    if spec.steps < 2 || spec.from.is_nan() || spec.to.is_nan() || spec.from > spec.to {
        return Err(SweepError::Grid {
            from: spec.from,
            to: spec.to,
            steps: spec.steps,
        });
    }
    let bif = base.kernels.bifurcation_parameter()?;
    let family = base.kernels.validate()?;
    let base_tau = match (spec.parameter, family, bif) {
        (SweepParameter::Tau, KernelFamily::Dirac, BifurcationParameter::Dirac { tau }) => tau,
        (SweepParameter::Theta, KernelFamily::Gamma, _) => 0.0,
        (p, _, _) => return Err(SweepError::Parameter(p.as_str())),
    };

    let mut branches = vec![equilibria.highest()];
    if equilibria.lowest().label != equilibria.highest().label {
        branches.push(equilibria.lowest());
    }
    let monitor = Monitor {
        positivity_slack: tol.positivity_slack,
        box_slack: tol.box_slack,
    };
    let jobs: Vec<(f64, usize)> = spec
        .values()
        .into_iter()
        .flat_map(|v| (0..branches.len()).map(move |b| (v, b)))
        .collect();

    jobs.par_iter()
        .map(|&(value, b)| {
            let eq = branches[b];
            let kernels = match spec.parameter {
                SweepParameter::Tau => base.kernels.scaled(value / base_tau),
                SweepParameter::Theta => base.kernels.with_theta(value),
            };
            let cfg = ScenarioConfig {
                kernels,
                history: eq.state.map(|v| v * (1.0 + tol.neighborhood_perturbation)),
                ..base.clone()
            };
            let tr = integrate(&cfg, &monitor)?;
            let report = detect_cycle(&tr, Some(equilibria), tol);
            Ok(SweepRow {
                value,
                branch: eq.label.clone(),
                class: report.class,
                period: report.period,
                x3_min: report.min[2],
                x3_max: report.max[2],
                matched: report.matched.map(|(l, _)| l),
            })
        })
        .collect()
}

/// Adjacent grid values `(before, after)` where a branch switches from
/// converged-to-point to limit-cycle.
pub fn onsets(rows: &[SweepRow], branch: &str) -> Vec<(f64, f64)> {
    let series: Vec<&SweepRow> = rows.iter().filter(|r| r.branch == branch).collect();
    series
        .windows(2)
        .filter(|w| {
            w[0].class == CycleClass::ConvergedToPoint && w[1].class == CycleClass::LimitCycle
        })
        .map(|w| (w[0].value, w[1].value))
        .collect()
}

//! Time-domain integration of the delayed system.
//!
//! Discrete delays are handled by the method of steps over a ring buffer of
//! past states ([`dirac`]); Gamma kernels are expanded into linear chains of
//! first-order filters and integrated as an ODE ([`gamma`]). Both use the
//! classical fixed-step RK4 scheme and record invariant violations as events.

pub mod dirac;
pub mod gamma;
mod history;

use thiserror::Error;

use crate::kernel::{KernelError, KernelFamily};
use crate::model::{InvariantBox, State};
use crate::scenario::ScenarioConfig;

pub use dirac::integrate_dirac;
pub use gamma::{integrate_gamma, GammaChain};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Negative values below `-positivity_slack` and exits from the invariant
/// box beyond `box_slack` are logged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monitor {
    pub positivity_slack: f64,
    pub box_slack: f64,
}

impl Default for Monitor {
    fn default() -> Self {
        Monitor {
            positivity_slack: 1e-9,
            box_slack: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// A state component went negative.
    Positivity,
    /// A state component left the invariant box.
    BoxExit,
    /// An interpolated delayed value went negative.
    NegativeHistory,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantEvent {
    pub t: f64,
    pub kind: EventKind,
    pub channel: usize,
    pub value: f64,
}

/// Events beyond this many are counted but not stored.
const MAX_STORED_EVENTS: usize = 64;

/// Sampled solution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<InvariantEvent>,
    /// Total number of events, including ones not stored.
    pub event_count: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub(crate) fn push_event(&mut self, event: InvariantEvent) {
        self.event_count += 1;
        if self.events.len() < MAX_STORED_EVENTS {
            self.events.push(event);
        }
    }

    pub(crate) fn check(
        &mut self,
        t: f64,
        x: &State,
        monitor: &Monitor,
        bounds: Option<&InvariantBox>,
    ) {
        for (channel, &value) in x.iter().enumerate() {
            if value < -monitor.positivity_slack || !value.is_finite() {
                self.push_event(InvariantEvent {
                    t,
                    kind: EventKind::Positivity,
                    channel,
                    value,
                });
            }
            if let Some(b) = bounds {
                if value > b.upper[channel] + monitor.box_slack {
                    self.push_event(InvariantEvent {
                        t,
                        kind: EventKind::BoxExit,
                        channel,
                        value,
                    });
                }
            }
        }
    }
}

/// Validated integration grid.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grid {
    pub step: f64,
    pub steps: usize,
    /// Output every `every` steps.
    pub every: usize,
}

pub(crate) fn grid(cfg: &ScenarioConfig) -> Result<Grid, SimError> {
    let bad = |m: String| Err(SimError::Config(m));
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return bad(format!("step must be > 0, got {}", cfg.step));
    }
    if !(cfg.t_end.is_finite() && cfg.t_end > 0.0) {
        return bad(format!("t_end must be > 0, got {}", cfg.t_end));
    }
    let ratio = cfg.stride / cfg.step;
    let every = ratio.round();
    if !(every >= 1.0 && (ratio - every).abs() <= 1e-9 * ratio) {
        return bad(format!(
            "step {} must divide the output stride {}",
            cfg.step, cfg.stride
        ));
    }
    let steps = (cfg.t_end / cfg.step).round();
    if ((cfg.t_end / cfg.step) - steps).abs() > 1e-6 * steps.max(1.0) {
        return bad(format!("step {} must divide t_end {}", cfg.step, cfg.t_end));
    }
    Ok(Grid {
        step: cfg.step,
        steps: steps as usize,
        every: every as usize,
    })
}

/// Monitoring bounds: the invariant box when the history starts inside it.
pub(crate) fn bounds_for(cfg: &ScenarioConfig, monitor: &Monitor) -> Option<InvariantBox> {
    let b = cfg.model.invariant_box();
    b.contains(&cfg.history, monitor.box_slack).then_some(b)
}

/// Integrates with the scheme matching the kernel family.
pub fn integrate(cfg: &ScenarioConfig, monitor: &Monitor) -> Result<Trajectory, SimError> {
    match cfg.kernels.validate()? {
        KernelFamily::Dirac => integrate_dirac(cfg, monitor),
        KernelFamily::Gamma => integrate_gamma(cfg, monitor),
    }
}

/// One classical RK4 step for `y' = f(t, y)`, in place.
pub(crate) struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Rk4 {
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }

    pub fn step<F>(&mut self, t: f64, h: f64, y: &mut [f64], mut f: F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        f(t, y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + h * k3[i];
        }
        f(t + h, tmp, k4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

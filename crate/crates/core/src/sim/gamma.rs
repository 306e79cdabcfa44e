//! Linear chain trick for Gamma kernels.
//!
//! Convolution with an Erlang kernel of order `p` and scale `θ` equals the
//! output of `p` cascaded first-order filters
//! `y1' = (x - y1)/θ, yj' = (y(j-1) - yj)/θ`. Each pathway gets its own
//! chain, so the augmented state has dimension `4 + Σ p`.

use super::{bounds_for, grid, Monitor, Rk4, SimError, Trajectory};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::model::{DelayedInputs, State};
use crate::scenario::ScenarioConfig;

/// Source channel for each pathway, in the order h1, h2, h31, h32, h34.
const SOURCES: [usize; 5] = [0, 1, 2, 2, 2];

fn chain_derivative(input: f64, stages: &[f64], theta: f64, out: &mut [f64]) {
    let mut prev = input;
    for (s, o) in stages.iter().zip(out.iter_mut()) {
        *o = (prev - s) / theta;
        prev = *s;
    }
}

fn chain_output(input: f64, stages: &[f64]) -> f64 {
    stages.last().copied().unwrap_or(input)
}

/// A standalone filter chain, driven by an external signal.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaChain {
    pub theta: f64,
    pub stages: Vec<f64>,
}

impl GammaChain {
    /// Chain equilibrated at a constant past input `initial`.
    pub fn new(order: u32, theta: f64, initial: f64) -> Self {
        GammaChain {
            theta,
            stages: vec![initial; order as usize],
        }
    }

    pub fn output(&self, input: f64) -> f64 {
        chain_output(input, &self.stages)
    }

    /// Filters `forcing` over `[0, t_end]` with RK4 and returns `(t, output)`
    /// every `every` steps, starting from the current stage values.
    pub fn response<F>(mut self, forcing: F, t_end: f64, step: f64, every: usize) -> Vec<(f64, f64)>
    where
        F: Fn(f64) -> f64,
    {
        let steps = (t_end / step).round() as usize;
        let theta = self.theta;
        let mut rk = Rk4::new(self.stages.len());
        let mut out = vec![(0.0, self.output(forcing(0.0)))];
        for n in 0..steps {
            let t = n as f64 * step;
            rk.step(t, step, &mut self.stages, |t, y, dy| {
                chain_derivative(forcing(t), y, theta, dy)
            });
            if (n + 1) % every.max(1) == 0 {
                let t1 = (n + 1) as f64 * step;
                out.push((t1, self.output(forcing(t1))));
            }
        }
        out
    }
}

/// Integrates the scenario through its chain-augmented ODE with RK4.
pub fn integrate_gamma(cfg: &ScenarioConfig, monitor: &Monitor) -> Result<Trajectory, SimError> {
    if cfg.kernels.validate()? != KernelFamily::Gamma {
        return Err(SimError::Config(
            "integrate_gamma needs Gamma kernels".into(),
        ));
    }
    let g = grid(cfg)?;
    let mut orders = [0usize; 5];
    let mut theta = 0.0;
    for (i, (_, k)) in cfg.kernels.all().iter().enumerate() {
        if let KernelSpec::Gamma { order, theta: t } = **k {
            orders[i] = order as usize;
            theta = t;
        }
    }
    let mut offsets = [0usize; 6];
    offsets[0] = 4;
    for i in 0..5 {
        offsets[i + 1] = offsets[i] + orders[i];
    }
    let dim = offsets[5];

    let mut y = vec![0.0; dim];
    y[..4].copy_from_slice(&cfg.history);
    for i in 0..5 {
        y[offsets[i]..offsets[i + 1]].fill(cfg.history[SOURCES[i]]);
    }

    let model = &cfg.model;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let x: State = [y[0], y[1], y[2], y[3]];
        let out = |i: usize| chain_output(x[SOURCES[i]], &y[offsets[i]..offsets[i + 1]]);
        let d = DelayedInputs {
            x1: out(0),
            x2: out(1),
            x3_31: out(2),
            x3_32: out(3),
            x3_34: out(4),
        };
        dy[..4].copy_from_slice(&model.rhs(&x, &d));
        for i in 0..5 {
            let (a, b) = (offsets[i], offsets[i + 1]);
            chain_derivative(x[SOURCES[i]], &y[a..b], theta, &mut dy[a..b]);
        }
    };

    let bounds = bounds_for(cfg, monitor);
    let mut tr = Trajectory::default();
    tr.times.push(0.0);
    tr.states.push(cfg.history);
    tr.check(0.0, &cfg.history, monitor, bounds.as_ref());
    let mut rk = Rk4::new(dim);
    for n in 0..g.steps {
        let t = n as f64 * g.step;
        rk.step(t, g.step, &mut y, rhs);
        let x: State = [y[0], y[1], y[2], y[3]];
        let t1 = (n + 1) as f64 * g.step;
        tr.check(t1, &x, monitor, bounds.as_ref());
        if (n + 1) % g.every == 0 {
            tr.times.push(t1);
            tr.states.push(x);
        }
    }
    Ok(tr)
}

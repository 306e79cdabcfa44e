//! Method of steps for discrete delays.

use super::history::History;
use super::{bounds_for, grid, EventKind, InvariantEvent, Monitor, SimError, Trajectory};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::model::{DelayedInputs, State};
use crate::scenario::ScenarioConfig;

/// Source channel for each pathway, in the order h1, h2, h31, h32, h34.
const SOURCES: [usize; 5] = [0, 1, 2, 2, 2];

/// Integrates the scenario with RK4 and discrete delays.
///
/// Delayed values are exact at grid-aligned lags and cubic Hermite
/// interpolated otherwise. Zero delays read the current stage value.
pub fn integrate_dirac(cfg: &ScenarioConfig, monitor: &Monitor) -> Result<Trajectory, SimError> {
    if cfg.kernels.validate()? != KernelFamily::Dirac {
        return Err(SimError::Config(
            "integrate_dirac needs Dirac kernels".into(),
        ));
    }
    let g = grid(cfg)?;
    let h = g.step;
    let taus: Vec<f64> = cfg
        .kernels
        .all()
        .iter()
        .map(|(_, k)| match k {
            KernelSpec::Dirac { tau } => *tau,
            KernelSpec::Gamma { .. } => unreachable!(),
        })
        .collect();
    let min_delay = taus
        .iter()
        .copied()
        .filter(|&t| t > 0.0)
        .fold(f64::INFINITY, f64::min);
    if h > min_delay {
        return Err(SimError::Config(format!(
            "step {h} exceeds the smallest nonzero delay {min_delay}"
        )));
    }
    let max_delay = cfg.kernels.max_dirac_delay();
    if cfg.t_end <= max_delay {
        return Err(SimError::Config(format!(
            "t_end {} must exceed the largest delay {max_delay}",
            cfg.t_end
        )));
    }
    let lags: Vec<f64> = taus.iter().map(|t| t / h).collect();

    let model = &cfg.model;
    let bounds = bounds_for(cfg, monitor);
    let mut hist = History::new(cfg.history, h, max_delay / h);
    let mut tr = Trajectory::default();
    let mut x = cfg.history;
    tr.times.push(0.0);
    tr.states.push(x);
    tr.check(0.0, &x, monitor, bounds.as_ref());
    hist.push(0, x);

    let delayed = |hist: &History, pos: f64, stage: &State| -> DelayedInputs {
        let mut v = [0.0; 5];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = if lags[i] == 0.0 {
                stage[SOURCES[i]]
            } else {
                hist.value(pos - lags[i], SOURCES[i])
            };
        }
        DelayedInputs {
            x1: v[0],
            x2: v[1],
            x3_31: v[2],
            x3_32: v[3],
            x3_34: v[4],
        }
    };
    let axpy = |x: &State, a: f64, k: &State| -> State {
        [
            x[0] + a * k[0],
            x[1] + a * k[1],
            x[2] + a * k[2],
            x[3] + a * k[3],
        ]
    };

    for n in 0..g.steps {
        let pos = n as f64;
        let d1 = delayed(&hist, pos, &x);
        let k1 = model.rhs(&x, &d1);
        hist.set_derivative(n, k1);
        let s2 = axpy(&x, 0.5 * h, &k1);
        let k2 = model.rhs(&s2, &delayed(&hist, pos + 0.5, &s2));
        let s3 = axpy(&x, 0.5 * h, &k2);
        let k3 = model.rhs(&s3, &delayed(&hist, pos + 0.5, &s3));
        let s4 = axpy(&x, h, &k3);
        let k4 = model.rhs(&s4, &delayed(&hist, pos + 1.0, &s4));
        for i in 0..4 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        hist.push(n + 1, x);

        let t = (n + 1) as f64 * h;
        for (channel, value) in [d1.x1, d1.x2, d1.x3_31, d1.x3_32, d1.x3_34]
            .into_iter()
            .enumerate()
        {
            if value < -monitor.positivity_slack {
                tr.push_event(InvariantEvent {
                    t: n as f64 * h,
                    kind: EventKind::NegativeHistory,
                    channel: SOURCES[channel],
                    value,
                });
            }
        }
        tr.check(t, &x, monitor, bounds.as_ref());
        if (n + 1) % g.every == 0 {
            tr.times.push(t);
            tr.states.push(x);
        }
    }
    Ok(tr)
}

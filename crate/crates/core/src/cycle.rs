//! Classification of simulated trajectories.
//!
//! After a transient is discarded, cortisol (x3) decides the verdict:
//!
//! * converged-to-point: the terminal window is flat to within the noise
//!   floor, or the trajectory is a regular oscillation whose peak-to-peak
//!   envelope decays, or it relaxes monotonically with geometrically
//!   shrinking increments. Slow modes (GR turnover has a half-life near
//!   700 min, and a focus close to a Hopf point decays just as slowly) never
//!   reach the floor within a practical horizon;
//! * limit-cycle: at least `cycle_min_peaks` prominent maxima with regular
//!   spacing and a non-decaying envelope;
//! * undecided: anything else.

use std::fmt;

use crate::equilibria::EquilibriumSet;
use crate::model::State;
use crate::sim::Trajectory;
use crate::tolerances::Tolerances;

const CORTISOL: usize = 2;
/// Fraction of the analysis window treated as the terminal window.
const TERMINAL_FRACTION: f64 = 0.1;
/// Periods over which limit-cycle ranges are reported.
const RANGE_PERIODS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleClass {
    ConvergedToPoint,
    LimitCycle,
    Undecided,
}

impl CycleClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CycleClass::ConvergedToPoint => "converged-to-point",
            CycleClass::LimitCycle => "limit-cycle",
            CycleClass::Undecided => "undecided",
        }
    }
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub class: CycleClass,
    /// Mean inter-peak spacing of x3 (min), when at least two peaks exist.
    pub period: Option<f64>,
    /// Coefficient of variation of the inter-peak spacing.
    pub period_cv: Option<f64>,
    /// Fitted growth rate of the log peak-to-peak amplitude (1/min).
    pub envelope_rate: Option<f64>,
    pub peak_count: usize,
    /// Per-channel minimum over the last periods (cycles) or the terminal
    /// window (otherwise).
    pub min: State,
    pub max: State,
    /// Terminal state for converged trajectories.
    pub limit: Option<State>,
    /// Nearest equilibrium label and its relative distance.
    pub matched: Option<(String, f64)>,
}

/// Indices of 3-point local maxima with prominence at least `min_prominence`.
pub fn find_peaks(x: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = x.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                let mid = (i + j) / 2;
                if prominence(x, mid) >= min_prominence {
                    peaks.push(mid);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height of a peak above the higher of its two bases; each base is the
/// minimum between the peak and the nearest higher sample on that side.
fn prominence(x: &[f64], i: usize) -> f64 {
    let top = x[i];
    let mut left = top;
    for &v in x[..i].iter().rev() {
        if v > top {
            break;
        }
        left = left.min(v);
    }
    let mut right = top;
    for &v in &x[i + 1..] {
        if v > top {
            break;
        }
        right = right.min(v);
    }
    top - left.max(right)
}

/// Parabolic refinement of a sampled maximum: `(time, value)`.
fn refine_peak(t: &[f64], x: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return (t[i], b);
    }
    let d = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    let dt = t[i + 1] - t[i];
    (t[i] + d * dt, b - 0.25 * (a - c) * d)
}

fn channel_ranges(states: &[State]) -> (State, State) {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for s in states {
        for c in 0..4 {
            lo[c] = lo[c].min(s[c]);
            hi[c] = hi[c].max(s[c]);
        }
    }
    (lo, hi)
}

fn mean_state(states: &[State]) -> State {
    let mut m = [0.0; 4];
    for s in states {
        for c in 0..4 {
            m[c] += s[c];
        }
    }
    m.map(|v| v / states.len().max(1) as f64)
}

/// Least-squares slope of `y` against `t`.
fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let den: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Limit of a monotone relaxation seen in three samples `k` apart at the end
/// of `states`, by Aitken extrapolation. `None` unless every channel is
/// either flat or has successive increments of one sign shrinking by at
/// least `exp(-decay)`.
fn relaxation_limit(states: &[State], k: usize, floors: &State, decay: f64) -> Option<State> {
    let n = states.len();
    if k == 0 || n < 2 * k + 1 {
        return None;
    }
    let (a, b, c) = (states[n - 1 - 2 * k], states[n - 1 - k], states[n - 1]);
    let mut limit = c;
    for i in 0..4 {
        let (d1, d2) = (b[i] - a[i], c[i] - b[i]);
        if d1.abs() < floors[i] && d2.abs() < floors[i] {
            continue;
        }
        let ratio = d2 / d1;
        if !(ratio > 0.0 && ratio < (-decay).exp()) {
            return None;
        }
        limit[i] = c[i] + d2 * ratio / (1.0 - ratio);
    }
    Some(limit)
}

/// Classifies `tr` after discarding its leading `tol.transient_fraction`.
pub fn detect_cycle(
    tr: &Trajectory,
    equilibria: Option<&EquilibriumSet>,
    tol: &Tolerances,
) -> CycleReport {
    let n = tr.len();
    let start = ((tol.transient_fraction.clamp(0.0, 0.99)) * n as f64).floor() as usize;
    let times = &tr.times[start.min(n)..];
    let states = &tr.states[start.min(n)..];
    let matched = |x: &State| {
        equilibria.map(|s| {
            let (e, d) = s.nearest(x);
            (e.label.clone(), d)
        })
    };
    let undecided = |peaks: usize, period: Option<f64>, cv: Option<f64>| {
        let (min, max) = channel_ranges(states);
        CycleReport {
            class: CycleClass::Undecided,
            period,
            period_cv: cv,
            envelope_rate: None,
            peak_count: peaks,
            min,
            max,
            limit: None,
            matched: None,
        }
    };
    if states.len() < 8 {
        return undecided(0, None, None);
    }

    let means = mean_state(states);
    let floors = means.map(|m| tol.noise_floor_rel * m.abs());
    let terminal_start =
        states.len() - ((states.len() as f64 * TERMINAL_FRACTION).ceil() as usize).max(2);
    let terminal = &states[terminal_start..];
    let (tmin, tmax) = channel_ranges(terminal);
    if (0..4).all(|c| tmax[c] - tmin[c] < floors[c]) {
        let limit = *states.last().unwrap();
        return CycleReport {
            class: CycleClass::ConvergedToPoint,
            period: None,
            period_cv: None,
            envelope_rate: None,
            peak_count: 0,
            min: tmin,
            max: tmax,
            limit: Some(limit),
            matched: matched(&limit),
        };
    }

    let x3: Vec<f64> = states.iter().map(|s| s[CORTISOL]).collect();
    let peaks = find_peaks(&x3, floors[CORTISOL]);
    if peaks.len() < tol.cycle_min_peaks {
        let k = states.len() - 1 - terminal_start;
        if let Some(limit) = relaxation_limit(states, k, &floors, tol.envelope_decay) {
            return CycleReport {
                class: CycleClass::ConvergedToPoint,
                period: None,
                period_cv: None,
                envelope_rate: None,
                peak_count: peaks.len(),
                min: tmin,
                max: tmax,
                limit: Some(limit),
                matched: matched(&limit),
            };
        }
    }
    if peaks.len() < 2 || peaks[0] == 0 || *peaks.last().unwrap() + 1 >= x3.len() {
        return undecided(peaks.len(), None, None);
    }
    let refined: Vec<(f64, f64)> = peaks.iter().map(|&i| refine_peak(times, &x3, i)).collect();
    let spacing: Vec<f64> = refined.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let period = spacing.iter().sum::<f64>() / spacing.len() as f64;
    let var = spacing.iter().map(|s| (s - period).powi(2)).sum::<f64>() / spacing.len() as f64;
    let cv = var.sqrt() / period;
    if peaks.len() < tol.cycle_min_peaks || cv >= tol.cycle_period_cv {
        return undecided(peaks.len(), Some(period), Some(cv));
    }

    // peak-to-peak amplitude of each cycle: peak minus the trough before it
    let mut amp_t = Vec::with_capacity(peaks.len());
    let mut amp_log = Vec::with_capacity(peaks.len());
    for (k, w) in peaks.windows(2).enumerate() {
        let trough = x3[w[0]..=w[1]]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let amp = refined[k + 1].1 - trough;
        if amp > 0.0 {
            amp_t.push(refined[k + 1].0);
            amp_log.push(amp.ln());
        }
    }
    let rate = slope(&amp_t, &amp_log);
    let span = amp_t.last().unwrap_or(&0.0) - amp_t.first().unwrap_or(&0.0);

    let from = peaks[peaks.len().saturating_sub(RANGE_PERIODS + 1)];
    let tail = &states[from..];
    let (min, max) = channel_ranges(tail);
    if rate * span < -tol.envelope_decay {
        let limit = mean_state(&states[peaks[peaks.len() - 2]..*peaks.last().unwrap()]);
        return CycleReport {
            class: CycleClass::ConvergedToPoint,
            period: Some(period),
            period_cv: Some(cv),
            envelope_rate: Some(rate),
            peak_count: peaks.len(),
            min,
            max,
            limit: Some(limit),
            matched: matched(&limit),
        };
    }
    CycleReport {
        class: CycleClass::LimitCycle,
        period: Some(period),
        period_cv: Some(cv),
        envelope_rate: Some(rate),
        peak_count: peaks.len(),
        min,
        max,
        limit: None,
        matched: matched(&mean_state(tail)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, t_end: f64, dt: f64) -> Trajectory {
        let n = (t_end / dt) as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let states = times.iter().map(|&t| [1.0, 1.0, f(t), 1.0]).collect();
        Trajectory {
            times,
            states,
            ..Default::default()
        }
    }

    #[test]
    fn constant_is_converged() {
        let r = detect_cycle(
            &synthetic(|_| 3.0, 1000.0, 1.0),
            None,
            &Tolerances::default(),
        );
        assert_eq!(r.class, CycleClass::ConvergedToPoint);
        assert_eq!(r.limit.unwrap()[2], 3.0);
    }

    #[test]
    fn sine_is_a_cycle_with_its_period() {
        let period = 120.0;
        let tr = synthetic(
            |t| 3.0 + 0.2 * (2.0 * std::f64::consts::PI * t / period).sin(),
            3000.0,
            0.5,
        );
        let r = detect_cycle(&tr, None, &Tolerances::default());
        assert_eq!(r.class, CycleClass::LimitCycle);
        assert!((r.period.unwrap() - period).abs() < 0.01);
        assert!((r.max[2] - 3.2).abs() < 1e-3 && (r.min[2] - 2.8).abs() < 1e-3);
    }

    #[test]
    fn damped_oscillation_is_converging() {
        let tr = synthetic(
            |t| 3.0 + 0.2 * (-t / 2000.0).exp() * (t / 20.0).sin(),
            4000.0,
            0.5,
        );
        let r = detect_cycle(&tr, None, &Tolerances::default());
        assert_eq!(r.class, CycleClass::ConvergedToPoint);
        assert!(r.envelope_rate.unwrap() < 0.0);
    }

    #[test]
    fn slow_relaxation_is_converging() {
        let tr = synthetic(|t| 3.0 + 0.05 * (-t / 1500.0).exp(), 5000.0, 0.5);
        let r = detect_cycle(&tr, None, &Tolerances::default());
        assert_eq!(r.class, CycleClass::ConvergedToPoint);
        assert!((r.limit.unwrap()[2] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn linear_drift_is_undecided() {
        let tr = synthetic(|t| 3.0 + 1e-4 * t, 5000.0, 0.5);
        let r = detect_cycle(&tr, None, &Tolerances::default());
        assert_eq!(r.class, CycleClass::Undecided);
    }

    #[test]
    fn irregular_spacing_is_undecided() {
        // chirp: frequency doubles over the window
        let tr = synthetic(
            |t| 3.0 + 0.2 * (t * t / 40000.0 + t / 20.0).sin(),
            3000.0,
            0.5,
        );
        let r = detect_cycle(&tr, None, &Tolerances::default());
        assert_eq!(r.class, CycleClass::Undecided);
    }

    #[test]
    fn small_ripples_are_not_peaks() {
        let x: Vec<f64> = (0..2000)
            .map(|i| {
                let t = i as f64;
                (t / 50.0).sin() + 1e-6 * (t * 3.0).sin()
            })
            .collect();
        let peaks = find_peaks(&x, 1e-3);
        // sin(t/50) has maxima at t = 50(π/2 + 2kπ): 78.5, 392.7, 706.9, 1021, 1335, 1649, 1963
        assert_eq!(peaks.len(), 7);
    }
}

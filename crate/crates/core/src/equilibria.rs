//! Steady states.
//!
//! At equilibrium every component is a function of the cortisol level `x0`:
//! `x1 = L1 f1(x0)`, `x2 = w3 x0 / k3`, `x3 = x0` and
//! `x4 = f2⁻¹(g(x0)) / x0` with `g(x) = x / (L3 f1(x))`. The remaining
//! condition, GR balance, is the scalar equation solved here. Roots are
//! isolated by a sign-change scan and refined by bisection so that every
//! root on the grid is found, which matters because the model is bistable.

use thiserror::Error;

use crate::model::{Model, State};
use crate::roots::bisect;
use crate::tolerances::Tolerances;
use crate::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("x = {x} is infeasible: {bound}")]
    Infeasible { x: f64, bound: String },
    #[error("grid needs at least 100 points, got {0}")]
    GridTooSmall(usize),
    #[error("no equilibrium found on the feasible interval ({lo}, {hi}); the feedback functions violate their assumptions")]
    NoEquilibrium { lo: f64, hi: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A steady state together with its linearization coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    /// Reporting label: `En`/`Eu`/`Ed` for three states, otherwise `E1..` by
    /// descending cortisol.
    pub label: String,
    /// Cortisol level solving the scalar reduction (ng/ml).
    pub x0: f64,
    pub state: State,
    /// GR availability at equilibrium, equal to `state[3]`.
    pub r0: f64,
    /// Loop gain of the pituitary GR feedback (1/min²).
    pub a: f64,
    /// Loop gain of the hypothalamic feedback (1/min³).
    pub b: f64,
    /// Effective GR turnover `w4 - k4 x0 f3'(x0 r0)` (1/min).
    pub w4tilde: f64,
}

/// Every equilibrium found on the feasible interval.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumSet {
    /// Sorted ascending by `x0`.
    pub equilibria: Vec<Equilibrium>,
    /// Grid points where |residual| fell below the tangency threshold without
    /// a sign change (double roots). Not analysed further.
    pub degenerate: Vec<f64>,
    /// Feasible interval `(lo, hi)` for `x0`.
    pub domain: (f64, f64),
    pub grid_points: usize,
    /// Grid spacing.
    pub resolution: f64,
}

impl EquilibriumSet {
    pub fn get(&self, label: &str) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| e.label == label)
    }

    /// Equilibrium with the highest cortisol level.
    pub fn highest(&self) -> &Equilibrium {
        self.equilibria
            .iter()
            .max_by(|a, b| a.x0.total_cmp(&b.x0))
            .expect("set is never empty")
    }

    /// Equilibrium with the lowest cortisol level.
    pub fn lowest(&self) -> &Equilibrium {
        self.equilibria
            .iter()
            .min_by(|a, b| a.x0.total_cmp(&b.x0))
            .expect("set is never empty")
    }

    /// Closest equilibrium to `x` in relative (per-component) distance.
    pub fn nearest(&self, x: &State) -> (&Equilibrium, f64) {
        self.equilibria
            .iter()
            .map(|e| (e, relative_distance(x, &e.state)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("set is never empty")
    }
}

/// Max over components of `|x - y| / |y|`.
pub fn relative_distance(x: &State, y: &State) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-300))
        .fold(0.0, f64::max)
}

/// `g(x) = x / (L3 f1(x))`, the argument of `f2⁻¹` in the reduction.
pub fn cortisol_ratio(model: &Model, x: f64) -> f64 {
    x / (model.derived().l3 * model.f1().value(x))
}

/// GR balance residual `L4 (xi + f3(u)) - u / x` with `u = f2⁻¹(g(x))`.
pub fn residual(model: &Model, x: f64) -> Result<f64, EquilibriumError> {
    residual_parts(model, x).map(|(supply, demand)| supply - demand)
}

/// Residual divided by the magnitude of its two terms.
pub fn scaled_residual(model: &Model, x: f64) -> Result<f64, EquilibriumError> {
    residual_parts(model, x)
        .map(|(supply, demand)| (supply - demand) / (supply.abs() + demand.abs()))
}

fn residual_parts(model: &Model, x: f64) -> Result<(f64, f64), EquilibriumError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(EquilibriumError::Infeasible {
            x,
            bound: "cortisol level must be > 0".into(),
        });
    }
    let y = cortisol_ratio(model, x);
    let (inf, sup) = model.f2().range();
    if !(y > inf && y <= sup) {
        return Err(EquilibriumError::Infeasible {
            x,
            bound: format!("x/(L3 f1(x)) = {y} must lie in ({inf}, {sup}]"),
        });
    }
    let u = model.f2().inverse(y)?;
    let p = model.params();
    let supply = model.derived().l4 * (p.xi + model.f3().value(u));
    Ok((supply, u / x))
}

fn solve_ratio(model: &Model, target: f64) -> f64 {
    let l3 = model.derived().l3;
    // g is strictly increasing with g(0) = 0 and g(L3) = 1 / f1(L3) > 1.
    let g = |x: f64| cortisol_ratio(model, x) - target;
    bisect(&g, 0.0, l3, 1e-12 * l3, 400).unwrap_or(l3)
}

/// Upper end of the feasible interval: the solution of `g(x) = 1`.
pub fn feasible_upper_bound(model: &Model) -> f64 {
    solve_ratio(model, model.f2().range().1)
}

/// Lower end of the feasible interval: 0 for a full-depth `f2`, otherwise the
/// solution of `g(x) = inf f2`.
pub fn feasible_lower_bound(model: &Model) -> f64 {
    let inf = model.f2().range().0;
    if inf <= 0.0 {
        0.0
    } else {
        solve_ratio(model, inf)
    }
}

/// Builds the full equilibrium from its cortisol level.
pub fn assemble(
    model: &Model,
    x0: f64,
    label: impl Into<String>,
) -> Result<Equilibrium, EquilibriumError> {
    let u = model.f2().inverse(cortisol_ratio(model, x0))?;
    Ok(assemble_at(model, x0, u, label))
}

fn assemble_at(model: &Model, x0: f64, u: f64, label: impl Into<String>) -> Equilibrium {
    let p = model.params();
    let d = model.derived();
    // Equal to u / x0 at an exact root. GR balance is the better-conditioned
    // form where f2⁻¹ is steep, and it keeps r0 inside the invariant box.
    let r0 = d.l4 * (p.xi + model.f3().value(u));
    let f1 = model.f1().value(x0);
    let df1 = model.f1().derivative(x0);
    let f2 = model.f2().value(u);
    let df2 = model.f2().derivative(u);
    let df3 = model.f3().derivative(u);
    let k123 = p.k1 * p.k2 * p.k3;
    Equilibrium {
        label: label.into(),
        x0,
        state: [d.l1 * f1, p.w3 * x0 / p.k3, x0, r0],
        r0,
        a: -k123 / p.w1 * f1 * df2 * r0,
        b: -k123 * df1 * f2,
        w4tilde: p.w4 - p.k4 * x0 * df3,
    }
}

/// Root below `x_first` found in terms of `u`: with `x3(u) = u / (L4 (xi +
/// f3(u)))` the condition is `g(x3(u)) = f2(u)`. Returns `(x0, u)`.
fn edge_root(model: &Model, x_first: f64) -> Option<(f64, f64)> {
    let p = model.params();
    let l4 = model.derived().l4;
    let x3 = |u: f64| u / (l4 * (p.xi + model.f3().value(u)));
    let phi = |u: f64| cortisol_ratio(model, x3(u)) - model.f2().value(u);
    let u_lo = model.f2().inverse(cortisol_ratio(model, x_first)).ok()?;
    let mut u_hi = 2.0 * u_lo;
    for _ in 0..200 {
        if phi(u_hi) > 0.0 {
            let u = bisect(&phi, u_lo, u_hi, 1e-15 * u_hi, 400)?;
            return Some((x3(u), u));
        }
        u_hi *= 2.0;
    }
    None
}

fn labels_for(count: usize) -> Vec<String> {
    // index 0 = highest cortisol
    if count == 3 {
        vec!["En".into(), "Eu".into(), "Ed".into()]
    } else {
        (1..=count).map(|i| format!("E{i}")).collect()
    }
}

/// Finds all equilibria on the feasible interval.
pub fn find_equilibria(
    model: &Model,
    tol: &Tolerances,
) -> Result<EquilibriumSet, EquilibriumError> {
    let n = tol.equilibrium_grid_points;
    if n < 100 {
        return Err(EquilibriumError::GridTooSmall(n));
    }
    let lo = feasible_lower_bound(model);
    let hi = feasible_upper_bound(model);
    let span = hi - lo;
    let start = lo + tol.equilibrium_margin * span;
    let end = hi - tol.equilibrium_margin * span;
    let step = (end - start) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
    let rs: Vec<f64> = xs
        .iter()
        .map(|&x| residual(model, x))
        .collect::<Result<_, _>>()?;

    let xtol = tol.equilibrium_xtol * hi;
    let f = |x: f64| residual(model, x).unwrap_or(f64::NAN);
    let mut roots = Vec::new();
    let mut degenerate = Vec::new();
    // The residual tends to -inf at the lower edge, where f2⁻¹ blows up, so
    // a positive first sample means a root inside the margin. It can sit
    // closer to the edge than x resolves, so solve for u = x3 x4 instead.
    let mut edge = None;
    if rs[0] > 0.0 {
        edge = edge_root(model, xs[0]).filter(|(x, _)| *x < xs[0]);
    }
    for i in 0..n {
        if rs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < n && rs[i + 1] != 0.0 && rs[i].signum() != rs[i + 1].signum() {
            if let Some(r) = bisect(&f, xs[i], xs[i + 1], xtol, 200) {
                roots.push(r);
            }
            continue;
        }
        let scaled = scaled_residual(model, xs[i])?;
        let prev_same = i == 0 || rs[i - 1].signum() == rs[i].signum();
        let next_same = i + 1 == n || rs[i + 1].signum() == rs[i].signum();
        if scaled.abs() < tol.tangency_residual && prev_same && next_same {
            degenerate.push(xs[i]);
        }
    }
    if roots.is_empty() && edge.is_none() {
        return Err(EquilibriumError::NoEquilibrium { lo, hi });
    }

    // label by descending cortisol, keep ascending order
    let count = roots.len() + edge.is_some() as usize;
    let labels = labels_for(count);
    let mut equilibria = Vec::with_capacity(count);
    if let Some((x0, u)) = edge {
        equilibria.push(assemble_at(model, x0, u, labels[count - 1].clone()));
    }
    for &x0 in &roots {
        let label = labels[count - 1 - equilibria.len()].clone();
        equilibria.push(assemble(model, x0, label)?);
    }

    Ok(EquilibriumSet {
        equilibria,
        degenerate,
        domain: (lo, hi),
        grid_points: n,
        resolution: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DelayedInputs, ModelParams};

    fn set() -> EquilibriumSet {
        find_equilibria(&Model::paper_s6(), &Tolerances::default()).unwrap()
    }

    #[test]
    fn three_states_for_the_calibrated_model() {
        let s = set();
        assert_eq!(s.equilibria.len(), 3);
        let labels: Vec<_> = s.equilibria.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["Ed", "Eu", "En"]);
        let expect = [
            ("En", [7.659, 21.0, 3.055, 0.1]),
            ("Ed", [38.425, 10.04, 1.4606, 0.967]),
            ("Eu", [8.3097, 20.495, 2.981, 0.16]),
        ];
        for (label, want) in expect {
            let e = s.get(label).unwrap();
            for (c, (got, want)) in e.state.iter().zip(want).enumerate() {
                if label == "Eu" && c == 3 {
                    // printed with two decimals; the root itself is 0.1627
                    assert!((got - want).abs() < 0.005, "{label}: {:?}", e.state);
                    continue;
                }
                assert!((got - want).abs() / want < 0.005, "{label}: {:?}", e.state);
            }
        }
    }

    #[test]
    fn residual_vanishes_at_calibrated_mean() {
        let m = Model::paper_s6();
        assert!(residual(&m, 3.055).unwrap().abs() < 1e-8);
        let ed = set().get("Ed").unwrap().x0;
        assert!((ed - 1.4606).abs() < 5e-5);
        assert!(residual(&m, ed).unwrap().abs() < 1e-8);
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let m = Model::paper_s6();
        for e in &set().equilibria {
            assert!(scaled_residual(&m, e.x0).unwrap().abs() <= 1e-10);
            let dx = m.rhs(&e.state, &DelayedInputs::constant(&e.state));
            for v in dx {
                assert!(v.abs() < 1e-9, "{}: {dx:?}", e.label);
            }
            assert!(m.invariant_box().contains(&e.state, 0.0));
            assert!(e.a > 0.0 && e.b > 0.0 && e.w4tilde < m.params().w4);
        }
    }

    #[test]
    fn upper_bound_properties() {
        let m = Model::paper_s6();
        let hi = feasible_upper_bound(&m);
        assert!(hi < m.derived().l3);
        assert!((cortisol_ratio(&m, hi) - 1.0).abs() < 1e-10);
        assert_eq!(feasible_lower_bound(&m), 0.0);
        let mut prev = 0.0;
        for i in 1..=1000 {
            let g = cortisol_ratio(&m, hi * i as f64 / 1000.0);
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn residual_outside_domain_is_infeasible() {
        let m = Model::paper_s6();
        let hi = feasible_upper_bound(&m);
        assert!(matches!(
            residual(&m, hi * 1.01),
            Err(EquilibriumError::Infeasible { .. })
        ));
        assert!(residual(&m, 0.0).is_err());
        assert!(residual(&m, -1.0).is_err());
    }

    #[test]
    fn shallow_pituitary_feedback_has_lower_bound() {
        let mut p = ModelParams::paper_s6();
        p.mu = 0.05;
        let m = Model::new(p).unwrap();
        let lo = feasible_lower_bound(&m);
        assert!(lo > 0.0);
        assert!((cortisol_ratio(&m, lo) - 0.95).abs() < 1e-10);
        // the GR loop alone still produces three states here
        let s = find_equilibria(&m, &Tolerances::default()).unwrap();
        assert_eq!(s.equilibria.len(), 3);
        assert!(s.equilibria.iter().all(|e| e.x0 > lo));
    }

    #[test]
    fn non_cooperative_gr_loop_has_one_state() {
        let mut t = crate::model::CalibrationTargets::paper_s6();
        t.alpha3 = 1.0;
        let m = Model::new(crate::model::calibrate(&t).unwrap()).unwrap();
        let s = find_equilibria(&m, &Tolerances::default()).unwrap();
        assert_eq!(s.equilibria.len(), 1);
        assert_eq!(s.equilibria[0].label, "E1");
        assert!(residual(&m, 3.055).unwrap().abs() < 1e-8);
    }

    #[test]
    fn tiny_grid_is_rejected() {
        let tol = Tolerances {
            equilibrium_grid_points: 99,
            ..Tolerances::default()
        };
        assert_eq!(
            find_equilibria(&Model::paper_s6(), &tol),
            Err(EquilibriumError::GridTooSmall(99))
        );
    }

    #[test]
    fn halving_spacing_keeps_root_count() {
        let m = Model::paper_s6();
        for n in [5_000, 10_000, 20_000] {
            let tol = Tolerances {
                equilibrium_grid_points: n,
                ..Tolerances::default()
            };
            assert_eq!(find_equilibria(&m, &tol).unwrap().equilibria.len(), 3);
        }
    }
}

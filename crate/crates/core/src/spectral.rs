//! Linear stability and Hopf crossings at an equilibrium.
//!
//! With all five kernels tied to a single composite kernel `H`, the
//! characteristic equation reduces to `1 / H(z) = Q(z)` with
//!
//! ```text
//! Q(z) = -[a (z + w1)(z + w4) + b (z + w̃4)] / [(z + w1)(z + w2)(z + w3)(z + w̃4)]
//! ```
//!
//! `|Q(iω)|` decreases strictly, so purely imaginary roots can only sit at the
//! unique `ω0` with `|Q(iω0)| = 1`. Dirac kernels give `e^{τz} = Q(z)` and
//! Gamma kernels of total order `p` give `(θz + 1)^p = Q(z)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

use crate::equilibria::Equilibrium;
use crate::model::Model;
use crate::tolerances::Tolerances;

/// The stability inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inequality {
    I0,
    I1,
    I2,
    I3,
    I3bar,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::I0 => "I0",
            Inequality::I1 => "I1",
            Inequality::I2 => "I2",
            Inequality::I3 => "I3",
            Inequality::I3bar => "I3bar",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("hypothesis failed: {}", join(.failed))]
    Hypothesis { failed: Vec<Inequality> },
    #[error("no crossing: |Q(i0)| = {q0} <= 1, so |Q(iω)| = 1 has no positive root")]
    NoCrossing { q0: f64 },
    #[error("no Gamma crossing of order {order} in (0, ω0 = {omega0})")]
    NoGammaCrossing { order: u32, omega0: f64 },
    #[error("Gamma crossing needs total order >= 2, got {0}")]
    OrderTooSmall(u32),
}

fn join(items: &[Inequality]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("/")
}

/// Stability flags and Routh–Hurwitz data for the non-delayed system.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub i0: bool,
    pub i1: bool,
    pub i2: bool,
    pub i3: bool,
    pub i3bar: bool,
    /// Coefficients of `z^4 + c1 z^3 + c2 z^2 + c3 z + c4`.
    pub c: [f64; 4],
    /// `c1 c2 c3 - c3^2 - c1^2 c4`.
    pub discriminant: f64,
    /// Full Routh–Hurwitz verdict for the non-delayed system.
    pub nondelayed_stable: bool,
    /// `I0 ∧ I1 ∧ I2`, the sufficient condition for non-delayed stability.
    pub sufficient_conditions: bool,
    /// `I0 ∧ I3`: stable for every choice of delay kernels.
    pub delay_independent_stable: bool,
}

impl StabilityReport {
    /// Inequalities among I0, I1, I2, I3bar that fail (the Hopf hypotheses).
    pub fn failed_hopf_hypotheses(&self) -> Vec<Inequality> {
        [
            (Inequality::I0, self.i0),
            (Inequality::I1, self.i1),
            (Inequality::I2, self.i2),
            (Inequality::I3bar, self.i3bar),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(i, _)| i)
        .collect()
    }

    /// An unstable equilibrium with `I0` must satisfy `I3bar`.
    pub fn unstable_implies_i3bar(&self) -> bool {
        self.nondelayed_stable || !self.i0 || self.i3bar
    }
}

/// Non-delayed characteristic polynomial coefficients `[c1, c2, c3, c4]`.
pub fn characteristic_coefficients(eq: &Equilibrium, model: &Model) -> [f64; 4] {
    let p = model.params();
    let (w1, w2, w3, w4) = (p.w1, p.w2, p.w3, p.w4);
    let (a, b, wt) = (eq.a, eq.b, eq.w4tilde);
    let e2 = w1 * w2 + w2 * w3 + w1 * w3;
    [
        w1 + w2 + w3 + wt,
        e2 + (w1 + w2 + w3) * wt + a,
        w1 * w2 * w3 + e2 * wt + a * (w1 + w4) + b,
        (w1 * w2 * w3 + b) * wt + a * w1 * w4,
    ]
}

/// Routh–Hurwitz test for a monic quartic.
pub fn routh_hurwitz_quartic(c: &[f64; 4]) -> bool {
    let [c1, c2, c3, c4] = *c;
    c1 > 0.0
        && c3 > 0.0
        && c4 > 0.0
        && c1 * c2 - c3 > 0.0
        && c1 * c2 * c3 - c3 * c3 - c1 * c1 * c4 > 0.0
}

pub fn stability_report(eq: &Equilibrium, model: &Model) -> StabilityReport {
    let p = model.params();
    let (w1, w2, w3, w4) = (p.w1, p.w2, p.w3, p.w4);
    let (a, b, wt) = (eq.a, eq.b, eq.w4tilde);

    let i0 = wt > 0.0;
    let i1 = (w1 + wt) * (w2 + wt) * (w3 + wt) >= (wt - w1) * (wt - w4) * (w1 + w2 + w3 + wt);
    let i2 = a * (w1 + w4) + b <= (w1 + w2) * (w2 + w3) * (w1 + w3);
    let lhs = a * w4 / wt + b / w1;
    let i3 = i0 && lhs < w2 * w3;
    let i3bar = i0 && lhs >= w2 * w3;

    let c = characteristic_coefficients(eq, model);
    let discriminant = c[0] * c[1] * c[2] - c[2] * c[2] - c[0] * c[0] * c[3];
    StabilityReport {
        i0,
        i1,
        i2,
        i3,
        i3bar,
        c,
        discriminant,
        nondelayed_stable: routh_hurwitz_quartic(&c),
        sufficient_conditions: i0 && i1 && i2,
        delay_independent_stable: i0 && i3,
    }
}

/// Jacobian of the non-delayed system, taken directly from the partial
/// derivatives of the right-hand side.
pub fn jacobian_nondelayed(eq: &Equilibrium, model: &Model) -> Matrix4<f64> {
    let p = model.params();
    let [x1, _, x3, x4] = eq.state;
    let u = x3 * x4;
    let df1 = model.f1().derivative(x3);
    let f2 = model.f2().value(u);
    let df2 = model.f2().derivative(u);
    let df3 = model.f3().derivative(u);
    #[rustfmt::skip]
    let j = Matrix4::new(
        -p.w1,       0.0,   p.k1 * df1,             0.0,
        p.k2 * f2,  -p.w2,  p.k2 * df2 * x4 * x1,   p.k2 * df2 * x3 * x1,
        0.0,         p.k3, -p.w3,                   0.0,
        0.0,         0.0,   p.k4 * df3 * x4,        p.k4 * df3 * x3 - p.w4,
    );
    j
}

/// Eigenvalues of the non-delayed Jacobian (independent check of Routh–Hurwitz).
pub fn eigen_oracle_nondelayed(eq: &Equilibrium, model: &Model) -> [Complex64; 4] {
    let ev = jacobian_nondelayed(eq, model).complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out
}

/// Monic quartic coefficients `[c1..c4]` rebuilt from roots (Vieta).
pub fn coefficients_from_roots(roots: &[Complex64; 4]) -> [f64; 4] {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        poly = next;
    }
    [poly[1].re, poly[2].re, poly[3].re, poly[4].re]
}

/// `Q(z)` at an arbitrary complex point.
pub fn q_at(z: Complex64, eq: &Equilibrium, model: &Model) -> Complex64 {
    let p = model.params();
    let num = eq.a * (z + p.w1) * (z + p.w4) + eq.b * (z + eq.w4tilde);
    let den = (z + p.w1) * (z + p.w2) * (z + p.w3) * (z + eq.w4tilde);
    -num / den
}

/// `Q(iω)`.
pub fn q_function(omega: f64, eq: &Equilibrium, model: &Model) -> Complex64 {
    q_at(Complex64::new(0.0, omega), eq, model)
}

/// `|Q(iω)|` from its real closed form.
pub fn q_modulus(omega: f64, eq: &Equilibrium, model: &Model) -> f64 {
    let p = model.params();
    let (a, b, wt) = (eq.a, eq.b, eq.w4tilde);
    let o2 = omega * omega;
    let re = b * wt + a * p.w1 * p.w4 - a * o2;
    let im = a * (p.w1 + p.w4) + b;
    let num = re * re + o2 * im * im;
    let den = (o2 + p.w1 * p.w1) * (o2 + p.w2 * p.w2) * (o2 + p.w3 * p.w3) * (o2 + wt * wt);
    (num / den).sqrt()
}

/// Unique `ω0 > 0` with `|Q(iω0)| = 1`.
pub fn omega0_solve(
    eq: &Equilibrium,
    model: &Model,
    tol: &Tolerances,
) -> Result<f64, SpectralError> {
    if eq.w4tilde <= 0.0 {
        return Err(SpectralError::Hypothesis {
            failed: vec![Inequality::I0],
        });
    }
    let q0 = q_modulus(0.0, eq, model);
    if q0 <= 1.0 {
        return Err(SpectralError::NoCrossing { q0 });
    }
    let f = |w: f64| q_modulus(w, eq, model) - 1.0;
    let mut lo = 0.0;
    let mut hi = model.params().w1;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol.omega_rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical delays for discrete (Dirac) kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracCrossing {
    pub q: Complex64,
    /// `τ_0 .. τ_P` in minutes.
    pub taus: Vec<f64>,
    /// `max_p |e^{iω0 τ_p} - Q(iω0)|`.
    pub residual: f64,
    /// `arccos(Re Q(iω0)) / ω0` when `Im Q(iω0) >= 0`.
    pub arccos_tau0: Option<f64>,
}

/// Critical scale for Gamma kernels of total order `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCrossing {
    pub order: u32,
    pub omega: f64,
    pub theta: f64,
    /// Total average delay `p θ_p`.
    pub total_delay: f64,
    /// `|(iθω + 1)^p - Q(iω)|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Crossing {
    Dirac(DiracCrossing),
    Gamma(GammaCrossing),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopfResult {
    pub omega0: f64,
    pub crossing: Crossing,
}

impl HopfResult {
    /// First critical value of the bifurcation parameter (τ_0 or θ_p).
    pub fn critical_value(&self) -> f64 {
        match &self.crossing {
            Crossing::Dirac(d) => d.taus[0],
            Crossing::Gamma(g) => g.theta,
        }
    }

    pub fn residual(&self) -> f64 {
        match &self.crossing {
            Crossing::Dirac(d) => d.residual,
            Crossing::Gamma(g) => g.residual,
        }
    }

    /// Local stability at parameter value `v` (total delay τ or scale θ).
    /// For Gamma kernels this is only certain on `(0, θ_p)`.
    pub fn is_stable_at(&self, v: f64) -> bool {
        v < self.critical_value()
    }
}

fn require_hopf_hypotheses(eq: &Equilibrium, model: &Model) -> Result<(), SpectralError> {
    let failed = stability_report(eq, model).failed_hopf_hypotheses();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(SpectralError::Hypothesis { failed })
    }
}

/// Principal argument mapped to `[0, 2π)`.
fn arg_positive(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Hopf delays `τ_p = (Arg₊ Q(iω0) + 2pπ) / ω0`, `p = 0..=pmax`.
pub fn dirac_critical_delays(
    eq: &Equilibrium,
    model: &Model,
    pmax: usize,
    tol: &Tolerances,
) -> Result<HopfResult, SpectralError> {
    require_hopf_hypotheses(eq, model)?;
    let omega0 = omega0_solve(eq, model, tol)?;
    let q = q_function(omega0, eq, model);
    let phase = arg_positive(q);
    let taus: Vec<f64> = (0..=pmax)
        .map(|p| (phase + 2.0 * PI * p as f64) / omega0)
        .collect();
    let residual = taus
        .iter()
        .map(|&tau| (Complex64::new(0.0, omega0 * tau).exp() - q).norm())
        .fold(0.0, f64::max);
    let arccos_tau0 = (q.im >= 0.0).then(|| q.re.clamp(-1.0, 1.0).acos() / omega0);
    if let Some(t) = arccos_tau0 {
        debug_assert!(
            (t - taus[0]).abs() <= tol.arccos_agreement * taus[0].max(1.0),
            "arccos and atan2 forms disagree: {t} vs {}",
            taus[0]
        );
    }
    Ok(HopfResult {
        omega0,
        crossing: Crossing::Dirac(DiracCrossing {
            q,
            taus,
            residual,
            arccos_tau0,
        }),
    })
}

/// Chebyshev polynomial of the first kind on `[-1, 1]`.
pub fn chebyshev_t(order: u32, x: f64) -> f64 {
    (order as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

/// `T_p(|Q|^{-1/p}) - Re Q / |Q|` at `ω`; zero at Gamma crossing candidates.
pub fn gamma_crossing_function(omega: f64, order: u32, eq: &Equilibrium, model: &Model) -> f64 {
    let q = q_function(omega, eq, model);
    let m = q.norm();
    chebyshev_t(order, m.powf(-1.0 / order as f64)) - q.re / m
}

fn gamma_candidate(omega: f64, order: u32, eq: &Equilibrium, model: &Model) -> GammaCrossing {
    let q = q_function(omega, eq, model);
    let theta = (q.norm().powf(2.0 / order as f64) - 1.0).max(0.0).sqrt() / omega;
    let lhs = Complex64::new(1.0, theta * omega).powu(order);
    GammaCrossing {
        order,
        omega,
        theta,
        total_delay: order as f64 * theta,
        residual: (lhs - q).norm(),
    }
}

/// Critical Gamma scale `θ_p` from the largest crossing frequency in `(0, ω0)`.
///
/// The Chebyshev equation only matches the cosine of the phase, so a root is
/// accepted only if the full characteristic residual is within tolerance;
/// the scan then continues downward.
pub fn gamma_critical_theta(
    eq: &Equilibrium,
    model: &Model,
    order: u32,
    tol: &Tolerances,
) -> Result<HopfResult, SpectralError> {
    if order < 2 {
        return Err(SpectralError::OrderTooSmall(order));
    }
    require_hopf_hypotheses(eq, model)?;
    let omega0 = omega0_solve(eq, model, tol)?;
    let n = tol.gamma_grid_points.max(2);
    let f = |w: f64| gamma_crossing_function(w, order, eq, model);
    let grid = |i: usize| omega0 * i as f64 / n as f64;

    let mut upper = omega0;
    let mut f_upper = f(upper);
    for i in (1..n).rev() {
        let lower = grid(i);
        let f_lower = f(lower);
        if f_lower == 0.0 || f_lower.signum() != f_upper.signum() {
            let root = crate::roots::bisect(&f, lower, upper, 1e-15 * omega0, 200).unwrap_or(lower);
            let c = gamma_candidate(root, order, eq, model);
            if c.residual <= tol.crossing_residual {
                return Ok(HopfResult {
                    omega0,
                    crossing: Crossing::Gamma(c),
                });
            }
        }
        upper = lower;
        f_upper = f_lower;
    }
    Err(SpectralError::NoGammaCrossing { order, omega0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::find_equilibria;

    fn setup() -> (Model, Vec<Equilibrium>) {
        let m = Model::paper_s6();
        let s = find_equilibria(&m, &Tolerances::default()).unwrap();
        (m, s.equilibria)
    }

    fn by_label<'a>(eqs: &'a [Equilibrium], label: &str) -> &'a Equilibrium {
        eqs.iter().find(|e| e.label == label).unwrap()
    }

    #[test]
    fn nondelayed_verdicts() {
        let (m, eqs) = setup();
        for (label, stable) in [("En", true), ("Ed", true), ("Eu", false)] {
            let r = stability_report(by_label(&eqs, label), &m);
            assert_eq!(r.nondelayed_stable, stable, "{label}");
            assert!(r.unstable_implies_i3bar());
        }
        for label in ["En", "Ed"] {
            let r = stability_report(by_label(&eqs, label), &m);
            assert!(r.i0 && r.i1 && r.i2 && r.i3bar && !r.i3);
            assert!(r.sufficient_conditions && r.discriminant > 0.0);
            assert!(!r.delay_independent_stable);
        }
        let eu = stability_report(by_label(&eqs, "Eu"), &m);
        assert!(!eu.i0);
        assert!(eu.failed_hopf_hypotheses().contains(&Inequality::I0));
    }

    #[test]
    fn eigenvalues_match_polynomial() {
        let (m, eqs) = setup();
        for e in &eqs {
            let ev = eigen_oracle_nondelayed(e, &m);
            let c = characteristic_coefficients(e, &m);
            let from_roots = coefficients_from_roots(&ev);
            for (x, y) in c.iter().zip(from_roots) {
                assert!(
                    (x - y).abs() <= 1e-8 * x.abs(),
                    "{}: {c:?} vs {from_roots:?}",
                    e.label
                );
            }
            let stable = ev.iter().all(|z| z.re < 0.0);
            assert_eq!(stable, stability_report(e, &m).nondelayed_stable);
        }
    }

    #[test]
    fn modulus_closed_form() {
        let (m, eqs) = setup();
        let e = by_label(&eqs, "En");
        let p = m.params();
        let q0 = (e.a * p.w1 * p.w4 + e.b * e.w4tilde) / (p.w1 * p.w2 * p.w3 * e.w4tilde);
        assert!((q_modulus(0.0, e, &m) - q0).abs() < 1e-12 * q0);
        for k in 0..50 {
            let w = 0.001 + 0.37 * k as f64 / 7.0;
            let direct = q_function(w, e, &m).norm();
            assert!((direct - q_modulus(w, e, &m)).abs() <= 1e-10 * direct.max(1.0));
        }
    }

    #[test]
    fn critical_delays() {
        let (m, eqs) = setup();
        let tol = Tolerances::default();
        for (label, tau0) in [("En", 49.8505), ("Ed", 37.8362)] {
            let h = dirac_critical_delays(by_label(&eqs, label), &m, 3, &tol).unwrap();
            assert!(
                (h.critical_value() - tau0).abs() < 0.01,
                "{label}: {}",
                h.critical_value()
            );
            assert!(h.residual() <= 1e-7);
            let Crossing::Dirac(d) = &h.crossing else {
                panic!()
            };
            let t0 = d.arccos_tau0.unwrap();
            assert!((t0 - d.taus[0]).abs() < 1e-9 * d.taus[0]);
            for w in d.taus.windows(2) {
                assert!((w[1] - w[0] - 2.0 * PI / h.omega0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gamma_scales() {
        let (m, eqs) = setup();
        let tol = Tolerances::default();
        for (label, theta) in [("En", 18.9), ("Ed", 12.625)] {
            let h = gamma_critical_theta(by_label(&eqs, label), &m, 4, &tol).unwrap();
            assert!(
                (h.critical_value() - theta).abs() < 0.05,
                "{label}: {}",
                h.critical_value()
            );
            assert!(h.residual() <= 1e-7);
            let Crossing::Gamma(g) = &h.crossing else {
                panic!()
            };
            assert!(g.omega < h.omega0);
            assert!((g.total_delay - 4.0 * g.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn hypotheses_enforced() {
        let (m, eqs) = setup();
        let tol = Tolerances::default();
        let eu = by_label(&eqs, "Eu");
        assert!(matches!(
            dirac_critical_delays(eu, &m, 0, &tol),
            Err(SpectralError::Hypothesis { .. })
        ));
        assert_eq!(
            gamma_critical_theta(by_label(&eqs, "En"), &m, 1, &tol),
            Err(SpectralError::OrderTooSmall(1))
        );
    }

    #[test]
    fn chebyshev_matches_recurrence() {
        for k in 0..=40 {
            let x = -1.0 + k as f64 / 20.0;
            let (mut t0, mut t1) = (1.0, x);
            for n in 2..=6u32 {
                let t2 = 2.0 * x * t1 - t0;
                assert!((chebyshev_t(n, x) - t2).abs() < 1e-12);
                t0 = t1;
                t1 = t2;
            }
        }
    }
}

#![allow(dead_code)]

use hpa_core::{Model, ModelParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Paper parameters with every rate and shape constant perturbed at random.
/// Depths, exponents and positivity stay within the model assumptions.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let base = ModelParams::paper_s6();
    let mut scale = |v: f64| v * (rng.gen_range(-1.0f64..1.0) * 2f64.ln()).exp();
    let mut p = ModelParams {
        k1: scale(base.k1),
        k2: scale(base.k2),
        k3: scale(base.k3),
        k4: scale(base.k4),
        w1: scale(base.w1),
        w2: scale(base.w2),
        w3: scale(base.w3),
        w4: scale(base.w4),
        xi: scale(base.xi),
        c1: scale(base.c1),
        c2: scale(base.c2),
        c3: scale(base.c3),
        ..base
    };
    p.eta = rng.gen_range(0.05..=1.0);
    p.mu = rng.gen_range(0.05..=1.0);
    p.alpha1 = rng.gen_range(1.0..6.0);
    p.alpha2 = rng.gen_range(1.0..6.0);
    p.alpha3 = rng.gen_range(1.0..6.0);
    p
}

pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    Model::new(random_params(rng)).expect("random parameters are valid")
}

/// Independent steady-state oracle. Parametrizes by the GR-weighted cortisol
/// `u = x3 x4`: GR balance gives `x4(u)`, so `x3 = u / x4`, and the remaining
/// condition is `L3 f1(x3) f2(u) = x3`. Returns the grid points just left of
/// each sign change of that residual.
pub fn oracle_roots(model: &Model, points: usize) -> Vec<f64> {
    let p = model.params();
    let d = model.derived();
    let u_max = d.l3 * (p.xi + 1.0) * d.l4;
    let h = |u: f64| {
        let x4 = d.l4 * (p.xi + model.f3().value(u));
        let x3 = u / x4;
        d.l3 * model.f1().value(x3) * model.f2().value(u) - x3
    };
    let mut roots = Vec::new();
    let mut prev_u = u_max * 1e-12;
    let mut prev = h(prev_u);
    for i in 1..=points {
        let u = u_max * i as f64 / points as f64;
        let v = h(u);
        if v.signum() != prev.signum() {
            roots.push(prev_u / (d.l4 * (p.xi + model.f3().value(prev_u))));
        }
        prev_u = u;
        prev = v;
    }
    roots
}

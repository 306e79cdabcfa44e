mod common;

use hpa_core::equilibria::{find_equilibria, residual};
use hpa_core::{calibrate, CalibrationTargets, DelayedInputs, Model, ModelParams, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle_roots, random_model};

#[test]
fn oracle_agrees_on_the_calibrated_model() {
    let m = Model::paper_s6();
    let mut oracle = oracle_roots(&m, 100_000);
    oracle.sort_by(f64::total_cmp);
    let set = find_equilibria(&m, &Tolerances::default()).unwrap();
    assert_eq!(oracle.len(), 3);
    assert_eq!(set.equilibria.len(), 3);
    for (e, x) in set.equilibria.iter().zip(&oracle) {
        assert!((e.x0 - x).abs() < 1e-3 * e.x0, "{} vs {x}", e.x0);
    }
}

#[test]
fn non_cooperative_gr_has_a_single_state() {
    let mut t = CalibrationTargets::paper_s6();
    t.alpha3 = 1.0;
    let m = Model::new(calibrate(&t).unwrap()).unwrap();
    assert_eq!(oracle_roots(&m, 100_000).len(), 1);
    assert_eq!(
        find_equilibria(&m, &Tolerances::default())
            .unwrap()
            .equilibria
            .len(),
        1
    );
}

#[test]
fn shallow_pituitary_feedback_matches_oracle() {
    let mut p = ModelParams::paper_s6();
    p.mu = 0.05;
    let m = Model::new(p).unwrap();
    let oracle = oracle_roots(&m, 100_000);
    let set = find_equilibria(&m, &Tolerances::default()).unwrap();
    assert_eq!(set.equilibria.len(), oracle.len());
}

#[test]
fn random_parameters_always_have_an_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tol = Tolerances::default();
    for i in 0..200 {
        let m = random_model(&mut rng);
        let set = find_equilibria(&m, &tol).unwrap_or_else(|e| panic!("set {i}: {e}"));
        assert!(!set.equilibria.is_empty());
        let bounds = m.invariant_box();
        for e in &set.equilibria {
            // near the lower domain edge f2⁻¹ is steep, so check the bracket
            // rather than the residual value
            let dx = 2e-12 * set.domain.1;
            let lo = residual(&m, e.x0 - dx).unwrap_or(f64::NAN);
            let hi = residual(&m, e.x0 + dx).unwrap();
            assert!(lo.is_nan() || lo * hi <= 0.0, "set {i}: {e:?}");
            assert!(bounds.contains(&e.state, 1e-9), "set {i}: {:?}", e.state);
            assert!(e.a > 0.0 && e.b > 0.0, "set {i}");
            assert!(e.w4tilde < m.params().w4, "set {i}");
            let dx = m.rhs(&e.state, &DelayedInputs::constant(&e.state));
            let scale = e.state.iter().cloned().fold(1.0, f64::max);
            assert!(dx.iter().all(|v| v.abs() < 1e-9 * scale), "set {i}: {dx:?}");
        }
    }
}

#[test]
fn random_root_counts_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let tol = Tolerances::default();
    let mut mismatches = 0;
    for _ in 0..50 {
        let m = random_model(&mut rng);
        let set = find_equilibria(&m, &tol).unwrap();
        if oracle_roots(&m, 100_000).len() != set.equilibria.len() {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

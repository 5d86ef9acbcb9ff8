mod common;

use common::{literal_rates, reference_solve};
use gbm_core::ode::{
    classify_equilibrium, integrate, omega_limit_estimate, rk4_step, EquilibriumKind, Integrator,
    OdeMethod,
};
use gbm_core::{Kinetics, Params, StateTriple};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = StateTriple> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(t, n, v)| {
        let s = t + n + v;
        let shrink = if s > 1.0 { (1.0 - 1e-12) / s } else { 1.0 };
        StateTriple::new(t * shrink, n * shrink, v * shrink)
    })
}

#[test]
fn rk4_step_matches_adaptive_reference() {
    let p = Params::destruction_dominant();
    let s = StateTriple::new(0.5, 0.0, 0.5);
    let ours = rk4_step(&s, 0.01, &p, Kinetics::Raw).unwrap();
    let reference = reference_solve(
        |x| literal_rates(&StateTriple::from_array(x), &p),
        s.as_array(),
        0.01,
        1e-8,
    );
    assert!(ours.max_abs_diff(&StateTriple::from_array(reference)) <= 1e-6);
}

#[test]
fn rk4_trajectory_matches_adaptive_reference() {
    let p = Params::angiogenic();
    let s0 = StateTriple::new(0.3, 0.1, 0.4);
    let fin = Integrator::new(OdeMethod::Rk4, Kinetics::Raw, 0.01)
        .run(s0, 20.0, &p, |_, _| {})
        .unwrap();
    let reference = reference_solve(
        |x| literal_rates(&StateTriple::from_array(x), &p),
        s0.as_array(),
        20.0,
        1e-12,
    );
    assert!(fin.max_abs_diff(&StateTriple::from_array(reference)) <= 1e-8);
}

#[test]
fn vessel_free_start_keeps_vessels_at_zero() {
    let p = Params::destruction_dominant();
    let sol = integrate(StateTriple::new(0.4, 0.2, 0.0), 500.0, 0.05, &p).unwrap();
    assert!(sol.states.iter().all(|s| s.vasc == 0.0));
    let (_, fin) = sol.last();
    assert!(fin.tumor < 1e-5);
    assert!((fin.necrosis - 0.6).abs() < 1e-5);
}

#[test]
fn saturated_start_stays_saturated() {
    for p in [Params::destruction_dominant(), Params::angiogenic()] {
        let sol = integrate(StateTriple::new(0.3, 0.2, 0.5), 300.0, 0.01, &p).unwrap();
        assert!(sol.states.iter().all(|s| (s.sum() - p.k).abs() <= 1e-9));
    }
}

#[test]
fn omega_limit_dominates_initial_mass() {
    let p = Params::destruction_dominant();
    let s0 = StateTriple::new(0.2, 0.1, 0.3);
    let lim = omega_limit_estimate(s0, &p, 3000.0, 0.05).unwrap();
    assert!(lim.converged);
    assert_eq!(lim.class.kind, EquilibriumKind::Necrotic);
    assert!(lim.state.necrosis >= s0.sum() - 1e-9);
    let lim = omega_limit_estimate(StateTriple::new(0.3, 0.0, 0.0), &p, 2000.0, 0.05).unwrap();
    assert!((lim.state.necrosis - 0.3).abs() < 1e-3);
}

#[test]
fn equilibria_classify_by_family() {
    let p = Params::destruction_dominant();
    for (s, kind) in [
        (StateTriple::ZERO, EquilibriumKind::Trivial),
        (StateTriple::new(0.0, 0.7, 0.0), EquilibriumKind::Necrotic),
        (StateTriple::new(0.0, 0.0, 0.7), EquilibriumKind::VesselOnly),
        (
            StateTriple::new(0.1, 0.2, 0.0),
            EquilibriumKind::NotEquilibrium,
        ),
    ] {
        assert_eq!(classify_equilibrium(&s, &p, 1e-9).unwrap().kind, kind);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn necrosis_monotone_and_sum_bounded(s0 in admissible()) {
        let p = Params::destruction_dominant();
        let sol = integrate(s0, 200.0, 0.05, &p).unwrap();
        for w in sol.states.windows(2) {
            prop_assert!(w[1].necrosis >= w[0].necrosis - 1e-10);
            prop_assert!(w[1].sum() >= w[0].sum() - 1e-12);
        }
        for s in &sol.states {
            prop_assert!(s.tumor >= -1e-8 && s.tumor <= p.k + 1e-8);
            prop_assert!(s.vasc >= -1e-8 && s.vasc <= p.k + 1e-8);
            prop_assert!(s.necrosis >= -1e-8);
            prop_assert!(s.sum() <= p.k + 1e-8);
        }
    }

    #[test]
    fn rk4_fixes_equilibria(x in 0.0..1.0f64, dt in 1e-3..1.0f64) {
        let p = Params::angiogenic();
        for s in [StateTriple::new(0.0, x, 0.0), StateTriple::new(0.0, 0.0, x)] {
            prop_assert_eq!(rk4_step(&s, dt, &p, Kinetics::Truncated).unwrap(), s);
        }
    }
}

mod common;

use common::{literal_rates, literal_scale};
use gbm_core::kinetics::{
    hypoxic_tumor, necrosis_rate, perfused_tumor, reaction, reaction_truncated, sum_rhs,
    truncated_rate, vasc_rate, vascular_fraction,
};
use gbm_core::{Params, StateTriple};
use proptest::prelude::*;

fn presets() -> impl Strategy<Value = Params> {
    prop_oneof![
        Just(Params::destruction_dominant()),
        Just(Params::angiogenic())
    ]
}

/// States in `[−K, 2K]³` for `K = 1`.
fn wide_state() -> impl Strategy<Value = StateTriple> {
    (-1.0..2.0f64, -1.0..2.0f64, -1.0..2.0f64).prop_map(|(t, n, v)| StateTriple::new(t, n, v))
}

fn nonneg_state() -> impl Strategy<Value = StateTriple> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(|(t, n, v)| StateTriple::new(t, n, v))
}

fn boxed_state() -> impl Strategy<Value = StateTriple> {
    (0.0..=1.0f64, 0.0..3.0f64, 0.0..=1.0f64).prop_map(|(t, n, v)| StateTriple::new(t, n, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4000))]

    #[test]
    fn vascular_fraction_lies_in_unit_interval(phi in -5.0..5.0f64, t in -5.0..5.0f64) {
        let p = vascular_fraction(phi, t);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn sum_rhs_is_the_sum_of_the_rates(s in wide_state(), p in presets()) {
        let f = reaction(&s, &p);
        let total = f[0] + f[1] + f[2];
        let scale = (f[0].abs() + f[1].abs() + f[2].abs()).max(1.0);
        prop_assert!((sum_rhs(&s, &p) - total).abs() <= 1e-12 * scale);
    }

    #[test]
    fn product_form_matches_literal_form(
        t in 0.0..2.0f64, n in -1.0..2.0f64, phi in 0.0..2.0f64, p in presets()
    ) {
        prop_assume!(t + phi > 0.0);
        let s = StateTriple::new(t, n, phi);
        let ours = reaction(&s, &p);
        let lit = literal_rates(&s, &p);
        let scale = literal_scale(&s, &p);
        for i in 0..3 {
            prop_assert!((ours[i] - lit[i]).abs() <= 1e-12 * scale, "f{} {} vs {}", i + 1, ours[i], lit[i]);
        }
    }

    #[test]
    fn hypoxic_and_perfused_match_literal_products(phi in 0.0..2.0f64, t in 0.0..2.0f64) {
        prop_assume!(t + phi > 0.0);
        let pf = phi / (phi + t);
        prop_assert!((hypoxic_tumor(phi, t) - t * (1.0 - pf * pf).sqrt()).abs() <= 1e-12);
        prop_assert!((perfused_tumor(phi, t) - t * pf).abs() <= 1e-15);
    }

    #[test]
    fn hypoxic_term_slope_bounds(phi in 1e-3..1.0f64, t in 1e-3..1.0f64) {
        let h = 1e-7;
        let d_phi = (hypoxic_tumor(phi + h, t) - hypoxic_tumor(phi, t)) / h;
        let d_t = (hypoxic_tumor(phi, t + h) - hypoxic_tumor(phi, t)) / h;
        prop_assert!(d_phi.abs() <= 0.5 + 1e-4, "dB/dPhi = {}", d_phi);
        prop_assert!(d_t.abs() <= 2.0 + 1e-4, "dB/dT = {}", d_t);
    }

    #[test]
    fn necrosis_never_decreases_on_nonnegative_states(s in nonneg_state(), p in presets()) {
        prop_assert!(necrosis_rate(&s, &p) >= 0.0);
        prop_assert!(truncated_rate(2, &s, &p).unwrap() >= 0.0);
    }

    #[test]
    fn vasculature_shrinks_at_capacity(s in nonneg_state(), p in presets()) {
        prop_assume!(s.sum() >= p.k);
        prop_assert!(vasc_rate(&s, &p) <= 0.0);
        prop_assert!(truncated_rate(3, &s, &p).unwrap() <= 0.0);
    }

    #[test]
    fn truncation_is_identity_inside_the_box(s in boxed_state(), p in presets()) {
        prop_assert_eq!(reaction_truncated(&s, &p), reaction(&s, &p));
    }

    #[test]
    fn truncated_terms_see_clamped_state(s in wide_state(), p in presets()) {
        let lower = StateTriple::new(s.tumor.max(0.0), s.necrosis.max(0.0), s.vasc.max(0.0));
        let boxed = StateTriple::new(lower.tumor.min(p.k), lower.necrosis, lower.vasc);
        let f = reaction_truncated(&s, &p);
        prop_assert_eq!(f[0], reaction(&lower, &p)[0]);
        prop_assert_eq!(f[1], reaction(&boxed, &p)[1]);
        prop_assert_eq!(f[2], reaction(&boxed, &p)[2]);
        for (i, fi) in f.iter().enumerate() {
            prop_assert_eq!(truncated_rate(i + 1, &s, &p).unwrap(), *fi);
        }
    }

    #[test]
    fn rates_vanish_on_equilibrium_families(x in 0.0..1.0f64, p in presets()) {
        for s in [StateTriple::ZERO, StateTriple::new(0.0, x, 0.0), StateTriple::new(0.0, 0.0, x)] {
            prop_assert_eq!(reaction(&s, &p), [0.0; 3]);
        }
    }
}

#[test]
fn worked_values() {
    let p = Params::destruction_dominant();
    let s = StateTriple::new(0.5, 0.0, 0.5);
    let hand_b = 0.5 * (1.0f64 - 0.25).sqrt();
    assert!((hypoxic_tumor(0.5, 0.5) - hand_b).abs() < 1e-15);
    assert!((perfused_tumor(0.5, 0.5) - 0.25).abs() < 1e-15);
    let f = reaction(&s, &p);
    assert!((f[0] + 0.03 * hand_b).abs() < 1e-15);
    assert!((f[1] - (0.03 * hand_b + 0.3 * 0.25)).abs() < 1e-15);
    assert!((f[2] + 0.075).abs() < 1e-15);
    assert_eq!(sum_rhs(&s, &p), 0.0);
    assert!(
        (truncated_rate(2, &StateTriple::new(2.0, 0.0, 0.0), &p).unwrap() - p.alpha).abs() < 1e-15
    );
    assert_eq!(
        truncated_rate(1, &StateTriple::new(-1.0, 0.0, 0.5), &p).unwrap(),
        0.0
    );
    assert!(truncated_rate(4, &s, &p).is_err());
}

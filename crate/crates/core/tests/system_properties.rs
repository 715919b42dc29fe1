mod common;

use common::{oracle_from_ground, simpson};
use proptest::prelude::*;
use std::f64::consts::PI;
use zenolab::system::{evolve_closed_form, survival_probability, zeno_asymptote};
use zenolab::{Amplitudes, SystemParams, C64};

fn p(omega: f64, gamma: f64) -> SystemParams {
    SystemParams::new(omega, gamma).unwrap()
}

fn ground_at(params: &SystemParams, t: f64) -> Amplitudes {
    evolve_closed_form(params, &Amplitudes::ground(), t).unwrap()
}

#[test]
fn closed_form_matches_taylor_oracle_on_grid() {
    for &omega in &[0.1, 1.0, 10.0] {
        for &gamma in &[0.0, 0.2, 2.0, 10.0, 100.0] {
            let params = p(omega, gamma);
            for k in 0..=40 {
                let t = 0.25 * k as f64;
                let s = ground_at(&params, t);
                let (a1, a2) = oracle_from_ground(omega, gamma, t);
                assert!((s.a1 - a1).norm() < 1e-11, "({omega},{gamma},{t}) a1");
                assert!((s.a2 - a2).norm() < 1e-11, "({omega},{gamma},{t}) a2");
            }
        }
    }
}

#[test]
fn frozen_values_from_high_precision_oracle() {
    // 40-digit mpmath expm of the generator.
    let cases = [
        (1.0, 10.0, 1.0, 0.9132336581333082, -0.092250260095258918),
        (1.0, 2.0, 1.0, 0.73575888234288464, -0.36787944117144232),
        (1.0, 100.0, 5.0, 0.95131981842701631, -0.0095141496944001332),
        (1.0, 1000.0, 5.0, 0.99501346923306924, -0.00099501446424852851),
        (1.0, 1e4, 5.0, 0.99950013496917332, -9.9950014496417487e-5),
    ];
    for (omega, gamma, t, re_a1, im_a2) in cases {
        let s = ground_at(&p(omega, gamma), t);
        assert!((s.a1 - C64::new(re_a1, 0.0)).norm() < 1e-12 * re_a1.abs().max(1.0), "a1 at gamma={gamma}");
        assert!((s.a2 - C64::new(0.0, im_a2)).norm() < 1e-12, "a2 at gamma={gamma}");
    }
}

#[test]
fn zeno_freezing_is_monotone_in_gamma() {
    // mpmath values: 2.5701568e-5, 6.4212879e-3, 8.1924844e-2, 0.28671540, 0.53544126
    let expected = [2.5701568078847515e-5, 0.0064212878857981451, 0.081924843626940475, 0.28671540194305442, 0.5354412621591983];
    let values: Vec<f64> = [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&g| survival_probability(&p(1.0, g), 20.0).unwrap()).collect();
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12 * e.max(1e-3) * 1e3, "{v} vs {e}");
    }
    assert!(values.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn asymptote_convergence() {
    let mut last_gap = f64::INFINITY;
    for &gamma in &[10.0, 30.0, 100.0, 300.0, 1000.0] {
        let params = p(1.0, gamma);
        let ratio = survival_probability(&params, 5.0).unwrap() / zeno_asymptote(&params, 5.0).unwrap();
        let gap = (ratio - 1.0).abs();
        assert!(gap < last_gap, "gap not shrinking at gamma={gamma}");
        last_gap = gap;
    }
    assert!(last_gap < 0.005);
}

#[test]
fn rabi_half_period() {
    for &omega in &[0.5, 1.0, 3.0] {
        let params = p(omega, 1e-3 * omega);
        // a1 is real for a start on |1⟩; bracket its first sign change.
        let (mut lo, mut hi) = (0.0, 0.0);
        let dt = 1e-3 / omega;
        let mut t = 0.0;
        while hi == 0.0 {
            let next = t + dt;
            if ground_at(&params, next).a1.re <= 0.0 {
                lo = t;
                hi = next;
            }
            t = next;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ground_at(&params, mid).a1.re > 0.0 { lo = mid } else { hi = mid }
        }
        assert!((lo - PI / (2.0 * omega)).abs() < 1e-3 / omega);
        assert!((params.rabi_transfer_time() - PI / (2.0 * omega)).abs() < 1e-15);
    }
}

#[test]
fn degenerate_series_is_continuous() {
    // Approach gamma = 2 Omega from both sides through the series threshold.
    let t = 1.0;
    let at_critical = ground_at(&p(1.0, 2.0), t);
    for &eps in &[1e-3, 1e-6, 1e-9, 1e-13] {
        for gamma in [2.0 + eps, 2.0 - eps] {
            let s = ground_at(&p(1.0, gamma), t);
            assert!((s.a1 - at_critical.a1).norm() < 2.0 * eps + 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_solves_the_amplitude_equations(omega in 0.0..10.0f64, gamma in 0.0..10.0f64, t in 1e-3..10.0f64) {
        let params = p(omega, gamma);
        let h = 1e-5;
        let before = ground_at(&params, t - h);
        let now = ground_at(&params, t);
        let after = ground_at(&params, t + h);
        let d1 = (after.a1 - before.a1) / (2.0 * h);
        let d2 = (after.a2 - before.a2) / (2.0 * h);
        let i_omega = C64::new(0.0, omega);
        let r1 = d1 + i_omega * now.a2;
        let r2 = d2 + i_omega * now.a1 + gamma * now.a2;
        prop_assert!(r1.norm() < 1e-6 && r2.norm() < 1e-6, "residuals {} {}", r1.norm(), r2.norm());
    }

    #[test]
    fn norm_decays_at_twice_gamma_times_upper_population(omega in 0.1..10.0f64, gamma in 0.1..10.0f64, t in 0.01..5.0f64) {
        let params = p(omega, gamma);
        let h = 1e-5;
        let slope = (ground_at(&params, t + h).norm2() - ground_at(&params, t - h).norm2()) / (2.0 * h);
        let expected = -2.0 * gamma * ground_at(&params, t).p2();
        prop_assume!(expected.abs() > 1e-6);
        prop_assert!(((slope - expected) / expected).abs() < 1e-4);
    }

    #[test]
    fn probability_is_conserved(omega in 0.1..10.0f64, gamma in 0.0..10.0f64, t in 0.1..10.0f64) {
        let params = p(omega, gamma);
        let end = ground_at(&params, t);
        let panels = ((t * omega.max(gamma)) * 50.0).ceil() as usize + 100;
        let emitted = simpson(|s| 2.0 * gamma * ground_at(&params, s).p2(), 0.0, t, panels);
        prop_assert!((end.norm2() + emitted - 1.0).abs() < 1e-6);
        prop_assert!((end.norm2() + end.p_emit - 1.0).abs() < 1e-12);
        prop_assert!(end.norm2() <= 1.0 + 1e-12);
    }

    #[test]
    fn undamped_evolution_is_unitary(omega in 0.0..10.0f64, t in 0.0..100.0f64, theta in 0.0..6.3f64) {
        let init = Amplitudes::new(C64::new(theta.cos(), 0.0), C64::from_polar(theta.sin(), 0.3 * theta));
        let s = evolve_closed_form(&p(omega, 0.0), &init, t).unwrap();
        prop_assert!((s.norm2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_is_a_semigroup(omega in 0.0..10.0f64, gamma in 0.0..10.0f64, t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let params = p(omega, gamma);
        let direct = ground_at(&params, t1 + t2);
        let composed = evolve_closed_form(&params, &ground_at(&params, t1), t2).unwrap();
        prop_assert!((direct.a1 - composed.a1).norm() < 1e-10);
        prop_assert!((direct.a2 - composed.a2).norm() < 1e-10);
        prop_assert!((direct.p_emit - composed.p_emit).abs() < 1e-10);
    }
}

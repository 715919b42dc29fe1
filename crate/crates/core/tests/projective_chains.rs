mod common;

use common::binomial;
use proptest::prelude::*;
use zenolab::projective::{
    chain_statistics, interval_probs, permanent_survival, rapid_repetition_limit, return_probability,
    simulate_measurement_chain, IntervalProbabilities, MeasurementSchedule,
};
use zenolab::stats::binomial_sigma;
use zenolab::Execution;

/// Sum over all 2^N outcome strings with an even number of flips, with
/// Neumaier compensation so the oracle itself holds 1e-12.
fn enumerated_return(n: u32, p: f64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for s in (0u32..1 << n).filter(|s| s.count_ones() % 2 == 0) {
        let term = p.powi(s.count_ones() as i32) * (1.0 - p).powi((n - s.count_ones()) as i32);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    sum + comp
}

#[test]
fn return_probability_matches_enumeration() {
    for n in 1..=20u32 {
        for &p in &[0.0, 0.05, 0.3, 0.5, 0.77, 1.0] {
            let sched = MeasurementSchedule::new(1.0, n as u64).unwrap();
            let got = return_probability(&sched, &IntervalProbabilities::from_transition(p).unwrap());
            let binomial_sum: f64 = (0..=n as u64).step_by(2).map(|k| binomial(n as u64, k) * p.powi(k as i32) * (1.0 - p).powi((n as u64 - k) as i32)).sum();
            let enumerated = enumerated_return(n, p);
            assert!((got - enumerated).abs() < 1e-12, "n={n} p={p} got={got} enumerated={enumerated}");
            assert!((got - binomial_sum).abs() < 1e-12);
        }
    }
}

#[test]
fn many_short_measurements_approach_the_zeno_limit() {
    let omega = 1.0;
    let total = 10.0;
    let mut last = 0.0;
    for &n in &[10u64, 100, 1000, 10_000] {
        let sched = MeasurementSchedule::new(total / n as f64, n).unwrap();
        let s = permanent_survival(&sched, omega);
        assert!(s > last);
        let limit = rapid_repetition_limit(omega, sched.tau, total).unwrap();
        assert!(s <= limit + 1e-15 || n < 100);
        last = s;
    }
    assert!((last - (-0.01f64).exp()).abs() < 1e-5);
}

#[test]
fn identified_interval_reproduces_decay_model() {
    use zenolab::projective::tau_from_gamma;
    use zenolab::system::{survival_probability, zeno_asymptote};
    use zenolab::SystemParams;
    for &omega in &[0.5, 1.0, 2.0] {
        for &ratio in &[100.0, 300.0, 1000.0, 1e4] {
            let gamma = ratio * omega;
            let params = SystemParams::new(omega, gamma).unwrap();
            for &t in &[5.0 / omega, 8.0 / omega] {
                let rapid = rapid_repetition_limit(omega, tau_from_gamma(gamma).unwrap(), t).unwrap();
                let asymptote = zeno_asymptote(&params, t).unwrap();
                assert_eq!(rapid.to_bits(), asymptote.to_bits());
                let exact = survival_probability(&params, t).unwrap();
                assert!((rapid - exact).abs() / exact < 0.02, "({omega},{gamma},{t})");
            }
        }
    }
}

#[test]
fn chain_frequencies_match_closed_forms() {
    let sched = MeasurementSchedule::new(1.0, 10).unwrap();
    let probs = IntervalProbabilities::from_transition(0.3).unwrap();
    let n = 100_000;
    let stats = chain_statistics(&sched, &probs, n, 42, Execution::Parallel).unwrap();
    let ret = return_probability(&sched, &probs);
    let never = 0.7f64.powi(10);
    assert!((stats.return_frequency() - ret).abs() < 3.0 * binomial_sigma(ret, n));
    assert!((stats.permanent_frequency() - never).abs() < 3.0 * binomial_sigma(never, n));
    assert_eq!(stats, chain_statistics(&sched, &probs, n, 42, Execution::Sequential).unwrap());
}

#[test]
fn single_chain_is_consistent() {
    let sched = MeasurementSchedule::new(0.5, 25).unwrap();
    let chain = simulate_measurement_chain(&sched, &interval_probs(1.0, 0.5), 3);
    assert_eq!(chain.outcomes.len(), 25);
    let flips = std::iter::once(&1u8).chain(&chain.outcomes).collect::<Vec<_>>().windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips as u64, chain.flips);
    assert_eq!(chain.final_level(), if chain.flips % 2 == 0 { 1 } else { 2 });
}

proptest! {
    #[test]
    fn return_dominates_permanent_survival(omega in 0.01..5.0f64, tau in 0.001..3.0f64, n in 1u64..200) {
        let sched = MeasurementSchedule::new(tau, n).unwrap();
        let probs = interval_probs(omega, tau);
        let ret = return_probability(&sched, &probs);
        let perm = permanent_survival(&sched, omega);
        prop_assert!(ret + 1e-12 >= perm);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ret));
    }

    #[test]
    fn zeno_limit_bound(omega in 0.01..3.0f64, tau in 1e-4..0.5f64, total in 0.1..10.0f64) {
        let n = (total / tau).round().max(1.0) as u64;
        let sched = MeasurementSchedule::new(tau, n).unwrap();
        let t = sched.total_time();
        let loss = 1.0 - permanent_survival(&sched, omega);
        prop_assert!(loss <= omega * omega * t * tau * (1.0 + omega * omega * tau * tau) + 1e-15);
    }

    #[test]
    fn rapid_limit_correspondence(omega in 0.1..2.0f64, x in 1e-4..0.02f64, omega_t in 0.1..10.0f64) {
        let tau = x / omega;
        let n = (omega_t / x).round().max(1.0) as u64;
        let sched = MeasurementSchedule::new(tau, n).unwrap();
        let limit = rapid_repetition_limit(omega, tau, sched.total_time()).unwrap();
        prop_assert!((permanent_survival(&sched, omega) - limit).abs() / limit < 1e-3);
    }

    #[test]
    fn short_intervals_respect_the_exponential_bound(omega in 0.01..2.0f64, n in 10u64..2000, total in 0.1..10.0f64) {
        let tau = total / n as f64;
        prop_assume!(omega * tau < 0.1);
        let sched = MeasurementSchedule::new(tau, n).unwrap();
        let perm = permanent_survival(&sched, omega);
        let limit = rapid_repetition_limit(omega, tau, total).unwrap();
        // cos²x ≤ e^{-x²} for |x| < π/2.
        prop_assert!(perm <= limit * (1.0 + 1e-12));
        prop_assert!((perm - limit).abs() <= limit * (omega * tau).powi(2) * n as f64 + 1e-12);
    }
}

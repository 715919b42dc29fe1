use proptest::prelude::*;
use zenolab::integrator::StepControl;
use zenolab::mch::{build_effective_generator, level_resolution_time, readout_probability, ReadoutModel, DEFAULT_ZENO_THRESHOLD};
use zenolab::system::survival_probability;
use zenolab::SystemParams;

#[test]
fn null_readout_equals_decay_model_on_grid() {
    for &omega in &[0.1, 1.0, 10.0] {
        for &gamma in &[0.0, 0.2, 2.0, 10.0, 100.0] {
            for &dw in &[0.5, 1.0, 3.0] {
                let params = SystemParams::with_splitting(omega, gamma, dw).unwrap();
                let model = ReadoutModel::null_readout(gamma, dw).unwrap();
                let g = build_effective_generator(&model, omega).at(0.0);
                let core = params.generator();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((g[i][j] - core[i][j]).norm() <= 1e-12 * gamma.max(omega));
                    }
                }
                for &t in &[0.5, 2.0, 10.0] {
                    let a = readout_probability(&model, omega, t, &StepControl::auto(&params)).unwrap();
                    let b = survival_probability(&params, t).unwrap();
                    assert!((a - b).abs() < 1e-8, "({omega},{gamma},{dw},{t})");
                }
            }
        }
    }
}

#[test]
fn resolved_levels_freeze_the_lower_level() {
    for &omega in &[0.1, 1.0, 10.0] {
        for &gamma in &[0.2, 2.0, 10.0, 100.0, 1000.0, 1e4] {
            for &dw in &[0.5, 1.0, 3.0] {
                let model = ReadoutModel::null_readout(gamma, dw).unwrap();
                let diag = level_resolution_time(&model, omega, DEFAULT_ZENO_THRESHOLD).unwrap();
                assert_eq!(diag.zeno_regime, diag.t_lr < 0.1 / omega);
                if diag.zeno_regime {
                    let params = SystemParams::with_splitting(omega, gamma, dw).unwrap();
                    let t = 5.0 / omega;
                    let floor = (-2.0 * omega * omega * t / gamma).exp() - 0.02;
                    assert!(survival_probability(&params, t).unwrap() > floor, "({omega},{gamma},{dw})");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn zeno_regime_implies_slow_evolution(omega in 0.1..2.0f64, ratio in 200.0..1e4f64, dw in 0.2..5.0f64) {
        let gamma = omega * ratio;
        let model = ReadoutModel::null_readout(gamma, dw).unwrap();
        let diag = level_resolution_time(&model, omega, DEFAULT_ZENO_THRESHOLD).unwrap();
        prop_assert!(diag.zeno_regime);
        prop_assert!((diag.t_lr - 1.0 / gamma).abs() <= 1e-15 / gamma * 4.0);
        // Over one level resolution time the lower level barely moves.
        let params = SystemParams::with_splitting(omega, gamma, dw).unwrap();
        let p = survival_probability(&params, diag.t_lr).unwrap();
        prop_assert!(1.0 - p < (omega * diag.t_lr).powi(2));
    }
}

//! Quantum-jump Monte Carlo for the three-level picture.
//!
//! Between jumps the unnormalized state follows the non-Hermitian evolution.
//! Each no-jump segment draws one uniform `r`; the photon is emitted at the
//! first time the squared norm falls to `r`, after which the system sits on
//! the uncoupled level |3⟩ and the record ends. Trajectories that never jump
//! are the null-measurement records.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::exec::{map_indexed, Execution};
use crate::integrator::Sample;
use crate::seed::{member_seed, rng_from_seed, uniform_open01};
use crate::stats::Histogram;
use crate::system::{evolve_closed_form, Amplitudes, SystemParams};

/// Jump times are located to this fraction of the shortest time scale.
pub const JUMP_TIME_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// Norm threshold drawn for the no-jump segment.
    pub threshold: f64,
    /// Photon emission time, `None` for a null record on `[0, T]`.
    pub jump_time: Option<f64>,
    /// Unnormalized state on the surviving segment.
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub t_final: f64,
    pub n_traj: u64,
    pub master_seed: u64,
    pub init: Amplitudes,
    pub bins: usize,
    pub exec: Execution,
}

impl EnsembleConfig {
    pub fn new(t_final: f64, n_traj: u64, master_seed: u64) -> Self {
        EnsembleConfig {
            t_final,
            n_traj,
            master_seed,
            init: Amplitudes::ground(),
            bins: DEFAULT_BINS,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_init(mut self, init: Amplitudes) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_time(self.t_final)?;
        if self.n_traj == 0 {
            return Err(ZenoError::invalid("n_traj", "must be >= 1"));
        }
        if self.bins == 0 {
            return Err(ZenoError::invalid("bins", "must be >= 1"));
        }
        if !self.init.is_finite() {
            return Err(ZenoError::invalid("init", "initial amplitudes must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_traj: u64,
    pub n_survived: u64,
    pub survival_fraction: f64,
    /// `|a₁|²/norm²` at `T` on the surviving records; `None` if none survived.
    pub conditional_p1: Option<f64>,
    pub jump_time_histogram: Histogram,
    /// Emission times in trajectory-index order.
    pub jump_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampedRabiResult {
    pub n_traj: u64,
    /// Mean of `|a₁|²/norm²` at `T` over trajectories.
    pub mean_p1: f64,
    pub total_jumps: u64,
    pub mean_jumps: f64,
    /// `jump_count_distribution[k]` trajectories emitted exactly `k` photons.
    pub jump_count_distribution: Vec<u64>,
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(ZenoError::invalid("time", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn norm2_at(params: &SystemParams, init: &Amplitudes, t: f64) -> f64 {
    evolve_closed_form(params, init, t).map_or(f64::NAN, |s| s.norm2())
}

/// First time in `[0, t_final]` at which the squared norm of the no-jump
/// evolution from `init` drops to `threshold`, found by bisection.
pub fn jump_time_for_threshold(params: &SystemParams, init: &Amplitudes, t_final: f64, threshold: f64) -> Option<f64> {
    if params.gamma == 0.0 {
        return None;
    }
    if init.norm2() <= threshold {
        return Some(0.0);
    }
    if norm2_at(params, init, t_final) > threshold {
        return None;
    }
    let tol = JUMP_TIME_TOLERANCE * params.shortest_time_scale().unwrap_or(1.0);
    let (mut lo, mut hi) = (0.0, t_final);
    // norm² is non-increasing, so the crossing is bracketed by [lo, hi].
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if norm2_at(params, init, mid) <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Single trajectory with `n_samples` evenly spaced states on the surviving
/// segment.
pub fn run_trajectory(
    params: &SystemParams,
    init: &Amplitudes,
    t_final: f64,
    seed: u64,
    n_samples: usize,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    check_time(t_final)?;
    let mut rng = rng_from_seed(seed);
    let threshold = uniform_open01(&mut rng);
    let jump_time = jump_time_for_threshold(params, init, t_final, threshold);
    let end = jump_time.unwrap_or(t_final);
    let samples = match n_samples {
        0 => Vec::new(),
        1 => vec![Sample { t: end, state: evolve_closed_form(params, init, end)? }],
        n => (0..n)
            .map(|k| {
                let t = end * k as f64 / (n - 1) as f64;
                evolve_closed_form(params, init, t).map(|state| Sample { t, state })
            })
            .collect::<Result<_>>()?,
    };
    Ok(TrajectoryRecord { seed, threshold, jump_time, samples })
}

/// Ensemble of independent trajectories. Member `i` is seeded by
/// [`member_seed`]`(master_seed, i)` and the reduction runs in index order,
/// so the result is bitwise identical for every execution policy.
pub fn run_ensemble(params: &SystemParams, config: &EnsembleConfig) -> Result<EnsembleResult> {
    params.validate()?;
    config.validate()?;
    let init = config.init;
    let t_final = config.t_final;
    let outcomes = map_indexed(config.exec, config.n_traj, |i| {
        let mut rng = rng_from_seed(member_seed(config.master_seed, i));
        let threshold = uniform_open01(&mut rng);
        jump_time_for_threshold(params, &init, t_final, threshold)
    });

    let mut histogram = Histogram::new(0.0, t_final, config.bins);
    let mut jump_times = Vec::new();
    for t in outcomes.iter().flatten() {
        histogram.add(*t);
        jump_times.push(*t);
    }
    let n_survived = config.n_traj - jump_times.len() as u64;
    let conditional_p1 = if n_survived > 0 {
        let end = evolve_closed_form(params, &init, t_final)?;
        Some(end.p1() / end.norm2())
    } else {
        None
    };
    Ok(EnsembleResult {
        n_traj: config.n_traj,
        n_survived,
        survival_fraction: n_survived as f64 / config.n_traj as f64,
        conditional_p1,
        jump_time_histogram: histogram,
        jump_times,
    })
}

/// Probability mass of the jump-time law in each of `bins` uniform bins on
/// `[0, T]`, conditioned on a jump: `(norm²(t_lo) − norm²(t_hi)) / (norm²(0) − norm²(T))`.
pub fn jump_time_bin_masses(params: &SystemParams, init: &Amplitudes, t_final: f64, bins: usize) -> Result<Vec<f64>> {
    check_time(t_final)?;
    let norms = (0..=bins)
        .map(|k| evolve_closed_form(params, init, t_final * k as f64 / bins as f64).map(|s| s.norm2()))
        .collect::<Result<Vec<_>>>()?;
    let lost = norms[0] - norms[bins];
    Ok(norms.windows(2).map(|w| if lost > 0.0 { (w[0] - w[1]) / lost } else { 0.0 }).collect())
}

/// Radiative-damping comparison system: a jump returns the system to |1⟩,
/// a fresh threshold is drawn and evolution continues until `T`.
pub fn run_damped_rabi_variant(params: &SystemParams, config: &EnsembleConfig) -> Result<DampedRabiResult> {
    params.validate()?;
    config.validate()?;
    let t_final = config.t_final;
    let init = config.init;
    let outcomes = map_indexed(config.exec, config.n_traj, |i| {
        let mut rng = rng_from_seed(member_seed(config.master_seed, i));
        let mut t = 0.0;
        let mut state = init;
        let mut jumps = 0u64;
        loop {
            let threshold = uniform_open01(&mut rng) * state.norm2();
            match jump_time_for_threshold(params, &state, t_final - t, threshold) {
                Some(dt) => {
                    t += dt;
                    jumps += 1;
                    state = Amplitudes::ground();
                }
                None => {
                    let end = evolve_closed_form(params, &state, t_final - t).unwrap_or(state);
                    return (end.p1() / end.norm2(), jumps);
                }
            }
        }
    });

    let mut p1_sum = 0.0;
    let mut total_jumps = 0u64;
    let mut distribution: Vec<u64> = Vec::new();
    for &(p1, jumps) in &outcomes {
        p1_sum += p1;
        total_jumps += jumps;
        let k = jumps as usize;
        if distribution.len() <= k {
            distribution.resize(k + 1, 0);
        }
        distribution[k] += 1;
    }
    let n = config.n_traj as f64;
    Ok(DampedRabiResult {
        n_traj: config.n_traj,
        mean_p1: p1_sum / n,
        total_jumps,
        mean_jumps: total_jumps as f64 / n,
        jump_count_distribution: distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_decay_never_jumps() {
        let p = SystemParams::new(1.7, 0.0).unwrap();
        for seed in 0..200 {
            let rec = run_trajectory(&p, &Amplitudes::ground(), 10.0, seed, 3).unwrap();
            assert_eq!(rec.jump_time, None);
        }
    }

    #[test]
    fn pure_decay_jump_time() {
        let p = SystemParams::new(0.0, 5.0).unwrap();
        let r = (-1f64).exp();
        let t = jump_time_for_threshold(&p, &Amplitudes::excited(), 1.0, r).unwrap();
        assert!((t - 0.1).abs() < 2e-7, "{t}");
        let r = 0.3;
        let t = jump_time_for_threshold(&p, &Amplitudes::excited(), 1.0, r).unwrap();
        assert!((t + r.ln() / 10.0).abs() < 2e-7);
    }

    #[test]
    fn record_is_reproducible() {
        let p = SystemParams::new(1.0, 10.0).unwrap();
        let a = run_trajectory(&p, &Amplitudes::ground(), 5.0, 1234, 50).unwrap();
        let b = run_trajectory(&p, &Amplitudes::ground(), 5.0, 1234, 50).unwrap();
        assert_eq!(a, b);
        if let Some(t) = a.jump_time {
            assert!((0.0..=5.0).contains(&t));
            assert_eq!(a.samples.last().unwrap().t, t);
        }
    }

    #[test]
    fn surviving_samples_stay_above_threshold() {
        let p = SystemParams::new(1.0, 3.0).unwrap();
        for seed in 0..50 {
            let rec = run_trajectory(&p, &Amplitudes::ground(), 4.0, seed, 20).unwrap();
            for s in &rec.samples[..rec.samples.len() - 1] {
                assert!(s.state.norm2() > rec.threshold);
            }
        }
    }

    #[test]
    fn undamped_ensemble_survives_exactly() {
        let p = SystemParams::new(1.0, 0.0).unwrap();
        let res = run_ensemble(&p, &EnsembleConfig::new(3.0, 1000, 9)).unwrap();
        assert_eq!(res.survival_fraction, 1.0);
        assert_eq!(res.jump_time_histogram.total(), 0);
    }

    #[test]
    fn bin_masses_sum_to_one() {
        let p = SystemParams::new(1.0, 10.0).unwrap();
        let m = jump_time_bin_masses(&p, &Amplitudes::ground(), 3.0, 50).unwrap();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn damped_rabi_without_drive_never_jumps() {
        let p = SystemParams::new(0.0, 5.0).unwrap();
        let res = run_damped_rabi_variant(&p, &EnsembleConfig::new(10.0, 500, 3)).unwrap();
        assert_eq!(res.total_jumps, 0);
        assert_eq!(res.mean_p1, 1.0);
        assert_eq!(res.jump_count_distribution, vec![500]);
    }

    #[test]
    fn rejects_bad_config() {
        let p = SystemParams::new(1.0, 1.0).unwrap();
        assert!(run_ensemble(&p, &EnsembleConfig::new(1.0, 0, 0)).is_err());
        assert!(run_ensemble(&p, &EnsembleConfig::new(-1.0, 10, 0)).is_err());
    }
}

//! Repeated instantaneous projection measurements.
//!
//! The level is measured at `t = 0` and then `N` more times at spacing `τ`.
//! Between measurements the undamped Rabi drive acts for `τ`, so each
//! interval flips the level with probability `p = sin²(Ωτ)` and keeps it with
//! `q = cos²(Ωτ)`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::exec::{map_indexed, Execution};
use crate::seed::{member_seed, rng_from_seed, uniform_open01};

/// Below this `Ωτ` the permanent-survival power is evaluated through
/// logarithms.
const LOG_POWER_THRESHOLD: f64 = 0.1;

/// Above this `Ωτ` the rapid-repetition limit is reported as outside its
/// validity range.
pub const RAPID_VALIDITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    pub tau: f64,
    pub n: u64,
}

impl MeasurementSchedule {
    pub fn new(tau: f64, n: u64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(ZenoError::invalid("tau", format!("must be finite and > 0, got {tau}")));
        }
        if n == 0 {
            return Err(ZenoError::invalid("n_measurements", "must be >= 1"));
        }
        Ok(MeasurementSchedule { tau, n })
    }

    /// Schedule covering `total_time` with spacing `tau`, rounding the count
    /// to the nearest integer (at least one).
    pub fn covering(total_time: f64, tau: f64) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(ZenoError::invalid("time", format!("must be finite and > 0, got {total_time}")));
        }
        Self::new(tau, ((total_time / tau).round() as u64).max(1))
    }

    pub fn total_time(&self) -> f64 {
        self.n as f64 * self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalProbabilities {
    /// Transition per interval.
    pub p: f64,
    /// Stay per interval.
    pub q: f64,
}

impl IntervalProbabilities {
    pub fn from_transition(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ZenoError::invalid("p", format!("must lie in [0, 1], got {p}")));
        }
        Ok(IntervalProbabilities { p, q: 1.0 - p })
    }
}

pub fn interval_probs(omega: f64, tau: f64) -> IntervalProbabilities {
    let (s, c) = (omega * tau).sin_cos();
    IntervalProbabilities { p: s * s, q: c * c }
}

/// Probability of finding the initial level at `T = Nτ` whatever the
/// intermediate outcomes: the even-`k` part of the binomial sum,
/// `(1 + (q − p)^N)/2`.
pub fn return_probability(sched: &MeasurementSchedule, probs: &IntervalProbabilities) -> f64 {
    let n = i32::try_from(sched.n).ok();
    let bias = probs.q - probs.p;
    let power = match n {
        Some(n) => bias.powi(n),
        None => bias.abs().powf(sched.n as f64) * if sched.n % 2 == 1 { bias.signum() } else { 1.0 },
    };
    0.5 * (1.0 + power)
}

/// `cos^{2N}(Ωτ)`: every one of the `N` measurements found the initial
/// level.
pub fn permanent_survival(sched: &MeasurementSchedule, omega: f64) -> f64 {
    let x = omega * sched.tau;
    let n = sched.n as f64;
    if x.abs() < LOG_POWER_THRESHOLD {
        let sin = x.sin();
        // cos²x = 1 − sin²x
        (n * (-sin * sin).ln_1p()).exp()
    } else {
        x.cos().powi(2).powf(n)
    }
}

/// `exp(−Ω²Tτ)`, the limit of [`permanent_survival`] for `Ωτ ≪ 1`.
pub fn rapid_repetition_limit(omega: f64, tau: f64, total_time: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(ZenoError::invalid("tau", format!("must be > 0, got {tau}")));
    }
    if !(total_time > 0.0) {
        return Err(ZenoError::invalid("time", format!("must be > 0, got {total_time}")));
    }
    Ok((-omega * omega * total_time * tau).exp())
}

/// Whether `Ωτ` is small enough for [`rapid_repetition_limit`] to apply.
pub fn rapid_limit_valid(omega: f64, tau: f64) -> bool {
    omega * tau < RAPID_VALIDITY_LIMIT
}

/// Measurement spacing that makes the rapid-repetition limit coincide with
/// the decay-induced survival law: `τ = 2/γ`.
pub fn tau_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(ZenoError::invalid("gamma", "tau = 2/gamma needs gamma > 0"));
    }
    Ok(2.0 / gamma)
}

/// Outcome of one simulated measurement sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainOutcome {
    /// Level found at each of the `N` measurements (1 or 2).
    pub outcomes: Vec<u8>,
    pub flips: u64,
}

impl ChainOutcome {
    pub fn final_level(&self) -> u8 {
        self.outcomes.last().copied().unwrap_or(1)
    }

    /// Every measurement found level 1.
    pub fn all_stay(&self) -> bool {
        self.outcomes.iter().all(|&l| l == 1)
    }

    /// Outcome string such as `"1121"`.
    pub fn outcome_string(&self) -> String {
        self.outcomes.iter().map(|l| char::from(b'0' + l)).collect()
    }
}

fn run_chain<R: RngCore>(n: u64, p: f64, rng: &mut R) -> ChainOutcome {
    let mut level = 1u8;
    let mut flips = 0;
    let outcomes = (0..n)
        .map(|_| {
            if uniform_open01(rng) < p {
                level = 3 - level;
                flips += 1;
            }
            level
        })
        .collect();
    ChainOutcome { outcomes, flips }
}

/// Two-state Markov chain starting on level 1 and flipping with probability
/// `p` at each measurement.
pub fn simulate_measurement_chain(sched: &MeasurementSchedule, probs: &IntervalProbabilities, seed: u64) -> ChainOutcome {
    run_chain(sched.n, probs.p, &mut rng_from_seed(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStatistics {
    pub n_chains: u64,
    /// Chains that ended on level 1.
    pub returned: u64,
    /// Chains that never left level 1.
    pub never_left: u64,
}

impl ChainStatistics {
    pub fn return_frequency(&self) -> f64 {
        self.returned as f64 / self.n_chains as f64
    }

    pub fn permanent_frequency(&self) -> f64 {
        self.never_left as f64 / self.n_chains as f64
    }
}

/// Many independent chains with the same per-member seeding contract as the
/// trajectory ensembles.
pub fn chain_statistics(
    sched: &MeasurementSchedule,
    probs: &IntervalProbabilities,
    n_chains: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<ChainStatistics> {
    if n_chains == 0 {
        return Err(ZenoError::invalid("n_traj", "must be >= 1"));
    }
    let n = sched.n;
    let p = probs.p;
    let results = map_indexed(exec, n_chains, |i| {
        let mut rng = rng_from_seed(member_seed(master_seed, i));
        // Only the flip count matters here.
        let mut flips = 0u64;
        for _ in 0..n {
            if uniform_open01(&mut rng) < p {
                flips += 1;
            }
        }
        flips
    });
    Ok(ChainStatistics {
        n_chains,
        returned: results.iter().filter(|&&f| f % 2 == 0).count() as u64,
        never_left: results.iter().filter(|&&f| f == 0).count() as u64,
    })
}

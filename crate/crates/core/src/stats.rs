//! Ensemble statistics: binned counts, binomial error bars and Pearson's χ²
//! goodness of fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Uniform bins on `[lo, hi]`; the upper edge belongs to the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram { lo, hi, counts: vec![0; bins.max(1)] }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.bins();
        (0..=n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64).collect()
    }

    pub fn add(&mut self, x: f64) {
        if !(x >= self.lo && x <= self.hi) || self.hi <= self.lo {
            return;
        }
        let n = self.bins();
        let idx = (((x - self.lo) / (self.hi - self.lo)) * n as f64) as usize;
        self.counts[idx.min(n - 1)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Minimum expected count per cell; sparser neighbouring cells are merged.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson χ² of `observed` counts against cell probabilities `probs`
/// (normalized internally). Adjacent cells are pooled until each expects at
/// least [`MIN_EXPECTED`] events.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Option<ChiSquareTest> {
    assert_eq!(observed.len(), probs.len(), "one probability per cell");
    let total: u64 = observed.iter().sum();
    let mass: f64 = probs.iter().sum();
    if total == 0 || !(mass > 0.0) {
        return None;
    }
    let n = total as f64;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs_acc += o as f64;
        exp_acc += n * p / mass;
        if exp_acc >= MIN_EXPECTED {
            cells.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => cells.push((obs_acc, exp_acc)),
        }
    }
    if cells.len() < 2 {
        return None;
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).ok()?;
    Some(ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

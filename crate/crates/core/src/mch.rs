//! Continuous energy measurement through a complex effective Hamiltonian.
//!
//! A readout `E(t)` measured with strength `κ` adds the penalty
//! `−iκ(H₀ − E(t))²` to `H₀ + V`. The penalty is diagonal in the level basis,
//! so in the rotating frame it only damps each amplitude at the rate
//! `κ(e_i − E(t))²`. For the null readout `E(t) ≡ e₁` and `κ = γ/Δω²` this is
//! exactly the decaying two-level generator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::integrator::{integrate, EffectiveGenerator, Matrix2, Sample, StepControl};
use crate::system::Amplitudes;
use crate::C64;

/// Default bound on `T_lr·Ω` below which the measurement is in the Zeno
/// regime.
pub const DEFAULT_ZENO_THRESHOLD: f64 = 0.1;

#[derive(Clone)]
pub enum Readout {
    Constant(f64),
    TimeDependent(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Readout::Constant(e) => f.debug_tuple("Constant").field(e).finish(),
            Readout::TimeDependent(_) => f.write_str("TimeDependent(..)"),
        }
    }
}

impl Readout {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Readout::Constant(e) => *e,
            Readout::TimeDependent(f) => f(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReadoutModel {
    pub kappa: f64,
    pub e1: f64,
    pub e2: f64,
    pub readout: Readout,
}

impl ReadoutModel {
    pub fn new(kappa: f64, e1: f64, e2: f64, readout: Readout) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(ZenoError::invalid("kappa", format!("must be finite and >= 0, got {kappa}")));
        }
        if !(e1.is_finite() && e2.is_finite()) {
            return Err(ZenoError::invalid("levels", "level energies must be finite"));
        }
        Ok(ReadoutModel { kappa, e1, e2, readout })
    }

    /// Null readout `E(t) ≡ e₁` with `κ = γ/Δω²`, levels at `0` and `Δω`.
    pub fn null_readout(gamma: f64, delta_omega: f64) -> Result<Self> {
        let kappa = kappa_from_gamma(gamma, delta_omega)?;
        Self::new(kappa, 0.0, delta_omega, Readout::Constant(0.0))
    }

    pub fn delta_omega(&self) -> f64 {
        self.e2 - self.e1
    }

    /// Readout stays on the lower level for all times.
    pub fn is_null_readout(&self) -> bool {
        matches!(self.readout, Readout::Constant(e) if e == self.e1)
    }

    fn penalty_rates(&self, t: f64) -> (f64, f64) {
        let e = self.readout.at(t);
        let d1 = self.e1 - e;
        let d2 = self.e2 - e;
        (self.kappa * d1 * d1, self.kappa * d2 * d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoDiagnostics {
    /// Level resolution time `1/(κΔω²)`.
    pub t_lr: f64,
    pub zeno_regime: bool,
}

/// `κ = γ/Δω²` (ℏ = 1).
pub fn kappa_from_gamma(gamma: f64, delta_omega: f64) -> Result<f64> {
    if !(delta_omega.is_finite() && delta_omega != 0.0) {
        return Err(ZenoError::invalid("delta_omega", "must be finite and nonzero"));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(ZenoError::invalid("gamma", format!("must be finite and >= 0, got {gamma}")));
    }
    Ok(gamma / (delta_omega * delta_omega))
}

fn generator_matrix(omega: f64, rates: (f64, f64)) -> Matrix2 {
    let coupling = C64::new(0.0, -omega);
    [[C64::new(-rates.0, 0.0), coupling], [coupling, C64::new(-rates.1, 0.0)]]
}

/// Rotating-frame generator of `H₀ + V − iκ(H₀ − E(t))²`.
pub fn build_effective_generator(model: &ReadoutModel, omega: f64) -> EffectiveGenerator {
    match &model.readout {
        Readout::Constant(_) => EffectiveGenerator::Constant(generator_matrix(omega, model.penalty_rates(0.0))),
        Readout::TimeDependent(_) => {
            let model = model.clone();
            EffectiveGenerator::time_dependent(move |t| generator_matrix(omega, model.penalty_rates(t)))
        }
    }
}

/// Level resolution time and Zeno-regime flag (`T_lr·Ω < threshold`).
pub fn level_resolution_time(model: &ReadoutModel, omega: f64, threshold: f64) -> Result<ZenoDiagnostics> {
    let resolution = model.kappa * model.delta_omega().powi(2);
    if !(resolution > 0.0) {
        return Err(ZenoError::invalid("kappa", "level resolution time needs kappa > 0"));
    }
    let t_lr = 1.0 / resolution;
    Ok(ZenoDiagnostics { t_lr, zeno_regime: t_lr * omega < threshold })
}

/// Evolves `(1, 0)` under the effective generator for any readout.
pub fn evolve_readout(model: &ReadoutModel, omega: f64, t_final: f64, ctrl: &StepControl) -> Result<Vec<Sample>> {
    integrate(&build_effective_generator(model, omega), &Amplitudes::ground(), (0.0, t_final), ctrl)
}

/// Probability `|a₁(T)|²` of the uninterrupted null readout.
pub fn readout_probability(model: &ReadoutModel, omega: f64, t_final: f64, ctrl: &StepControl) -> Result<f64> {
    if !model.is_null_readout() {
        return Err(ZenoError::UnsupportedReadout);
    }
    let samples = evolve_readout(model, omega, t_final, ctrl)?;
    Ok(samples.last().expect("integrator returns endpoints").state.p1())
}

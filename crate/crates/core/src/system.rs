//! Exact evolution of the driven two-level system with a complex upper-level
//! energy.
//!
//! In the rotating frame the amplitudes obey
//!
//! ```text
//! da1/dt = -i Ω a2
//! da2/dt = -i Ω a1 - γ a2
//! ```
//!
//! and the solution is written in terms of the complex rate
//! `Ω_γ = sqrt(γ²/4 - Ω²)`. Both `cosh(Ω_γ t)` and `sinh(Ω_γ t)/Ω_γ` are even
//! in `Ω_γ`, so one code path covers the damped-oscillatory, critical and
//! overdamped regimes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::C64;

/// Below this value of `|Ω_γ t|` the hyperbolic functions are replaced by
/// their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Above this value of `Re(Ω_γ t)` the growing and decaying exponentials are
/// combined with the `e^{-γt/2}` prefactor before evaluation.
const SPLIT_THRESHOLD: f64 = 20.0;

/// Relative scale of the default regime classification tolerance.
pub const REGIME_TOLERANCE_SCALE: f64 = 1e-9;

/// Physical parameters of the driven system (ℏ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Rabi coupling Ω.
    pub omega: f64,
    /// Amplitude decay rate γ of level |2⟩.
    pub gamma: f64,
    /// Level splitting ω₂ − ω₁. Only the continuous-measurement model uses it.
    pub delta_omega: f64,
}

impl SystemParams {
    /// Validated parameters with unit level splitting.
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        Self::with_splitting(omega, gamma, 1.0)
    }

    pub fn with_splitting(omega: f64, gamma: f64, delta_omega: f64) -> Result<Self> {
        let params = SystemParams { omega, gamma, delta_omega };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(ZenoError::invalid("omega", format!("must be finite and >= 0, got {}", self.omega)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(ZenoError::invalid("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if !(self.delta_omega.is_finite() && self.delta_omega > 0.0) {
            return Err(ZenoError::invalid(
                "delta_omega",
                format!("must be finite and > 0, got {}", self.delta_omega),
            ));
        }
        Ok(())
    }

    /// `γ/Ω`, or `None` without drive.
    pub fn damping_ratio(&self) -> Option<f64> {
        (self.omega > 0.0).then(|| self.gamma / self.omega)
    }

    /// Constant rotating-frame generator `G` with `dψ/dt = G ψ`.
    pub fn generator(&self) -> [[C64; 2]; 2] {
        let coupling = C64::new(0.0, -self.omega);
        [[C64::new(0.0, 0.0), coupling], [coupling, C64::new(-self.gamma, 0.0)]]
    }

    /// Time to transfer the population from |1⟩ to |2⟩ in the undamped
    /// limit, `π/(2Ω)`.
    pub fn rabi_transfer_time(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.omega
    }

    /// Shortest dynamical time scale, `min(1/Ω, 1/γ)` over the nonzero rates.
    pub fn shortest_time_scale(&self) -> Option<f64> {
        let rate = self.omega.max(self.gamma);
        (rate > 0.0).then(|| 1.0 / rate)
    }

    pub fn default_regime_tolerance(&self) -> f64 {
        REGIME_TOLERANCE_SCALE * self.omega.max(self.gamma)
    }
}

/// Rotating-frame amplitudes together with the probability that a photon
/// has already been emitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub a1: C64,
    pub a2: C64,
    pub p_emit: f64,
}

impl Amplitudes {
    pub fn new(a1: C64, a2: C64) -> Self {
        Amplitudes { a1, a2, p_emit: 0.0 }
    }

    /// System on level |1⟩.
    pub fn ground() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// System on level |2⟩.
    pub fn excited() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn p1(&self) -> f64 {
        self.a1.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.a2.norm_sqr()
    }

    pub fn norm2(&self) -> f64 {
        self.p1() + self.p2()
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.p_emit.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `Ω > γ/2`: damped Rabi oscillations, `Ω_γ` imaginary.
    Rabi,
    /// `γ/2 = Ω` within tolerance, `Ω_γ = 0`.
    Critical,
    /// `γ/2 > Ω`: no oscillation, `Ω_γ` real.
    Overdamped,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Regime::Rabi => "rabi",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        };
        f.write_str(name)
    }
}

/// Principal square root of `γ²/4 − Ω²`.
pub fn complex_rabi_rate(params: &SystemParams) -> C64 {
    let half_gamma = 0.5 * params.gamma;
    // (γ/2 − Ω)(γ/2 + Ω) keeps the discriminant exact near the critical point.
    let disc = (half_gamma - params.omega) * (half_gamma + params.omega);
    C64::new(disc, 0.0).sqrt()
}

pub fn classify_regime(params: &SystemParams, tol: f64) -> Regime {
    let gap = params.omega - 0.5 * params.gamma;
    if gap > tol {
        Regime::Rabi
    } else if -gap > tol {
        Regime::Overdamped
    } else {
        Regime::Critical
    }
}

/// Propagator coefficients `e^{-γt/2} cosh(Ω_γ t)` and
/// `e^{-γt/2} sinh(Ω_γ t)/Ω_γ`.
fn propagator_coefficients(params: &SystemParams, t: f64) -> (C64, C64) {
    let rate = complex_rabi_rate(params);
    let half_gamma = 0.5 * params.gamma;
    let x = rate * t;

    if x.norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        let cosh = 1.0 + x2 / 2.0 + x2 * x2 / 24.0;
        let sinhc = 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
        let damping = (-half_gamma * t).exp();
        return (cosh * damping, sinhc * t * damping);
    }

    if x.re <= SPLIT_THRESHOLD {
        let damping = (-half_gamma * t).exp();
        return (x.cosh() * damping, x.sinh() / rate * damping);
    }

    // Overdamped and late: Ω_γ − γ/2 = −Ω²/(Ω_γ + γ/2) without cancellation.
    let slow = -params.omega * params.omega / (rate + half_gamma);
    let envelope = (slow * t).exp();
    let fast = (-2.0 * x).exp();
    (0.5 * envelope * (1.0 + fast), 0.5 * envelope * (1.0 - fast) / rate)
}

/// Evolves `init` by time `t` with the exact solution of the amplitude
/// equations. The emitted-photon probability grows by the norm lost.
pub fn evolve_closed_form(params: &SystemParams, init: &Amplitudes, t: f64) -> Result<Amplitudes> {
    if !(t >= 0.0) {
        return Err(ZenoError::NegativeTime(t));
    }
    let (c, s) = propagator_coefficients(params, t);
    let half_gamma = 0.5 * params.gamma;
    let i_omega = C64::new(0.0, params.omega);
    let a1 = c * init.a1 + s * (half_gamma * init.a1 - i_omega * init.a2);
    let a2 = c * init.a2 - s * (i_omega * init.a1 + half_gamma * init.a2);
    let mut out = Amplitudes { a1, a2, p_emit: init.p_emit };
    out.p_emit += (init.norm2() - out.norm2()).max(0.0);
    Ok(out)
}

/// `|a₁(t)|²` for a system started on level |1⟩.
pub fn survival_probability(params: &SystemParams, t: f64) -> Result<f64> {
    Ok(evolve_closed_form(params, &Amplitudes::ground(), t)?.p1().clamp(0.0, 1.0))
}

/// Strong-damping asymptote `exp(−2Ω²t/γ)` of the survival probability.
pub fn zeno_asymptote(params: &SystemParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(ZenoError::NegativeTime(t));
    }
    if params.gamma <= 0.0 {
        return Err(ZenoError::invalid("gamma", "the Zeno asymptote needs gamma > 0"));
    }
    // Same evaluation order as the projective limit with τ = 2/γ, so the two
    // agree bitwise.
    let tau = 2.0 / params.gamma;
    Ok((-params.omega * params.omega * t * tau).exp())
}

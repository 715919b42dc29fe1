//! Quantum Zeno effect in a resonantly driven two-level system whose upper
//! level decays to a third, otherwise uncoupled level.
//!
//! Three descriptions of the same physics live side by side:
//!
//! * [`system`]: exact evolution under the non-Hermitian (complex energy)
//!   Hamiltonian, with [`integrator`] as an independent numerical oracle and
//!   [`trajectories`] as its quantum-jump Monte Carlo unraveling.
//! * [`projective`]: repeated instantaneous projection measurements.
//! * [`mch`]: continuous energy measurement via an effective Hamiltonian with
//!   an imaginary penalty term.
//!
//! Units: ℏ = 1, all rates are angular rates in one common inverse-time unit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod integrator;
pub mod mch;
pub mod projective;
pub mod seed;
pub mod stats;
pub mod system;
pub mod trajectories;

pub use error::{Result, ZenoError};
pub use exec::Execution;
pub use system::{Amplitudes, Regime, SystemParams};

/// Complex scalar used for all amplitudes.
pub type C64 = num_complex::Complex64;

//! Numerical integration of `dψ/dt = G(t) ψ` for a two-component state.
//!
//! Fixed-step classical RK4 is the primary oracle; a Dormand–Prince 5(4)
//! pair serves as an adaptive cross-check. Both accumulate the emitted-photon
//! probability as the integral of the norm loss rate `−2 Re(ψ† G ψ)`, which
//! is `2γ|a₂|²` for the decaying two-level generator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::system::{Amplitudes, SystemParams};
use crate::C64;

pub type Matrix2 = [[C64; 2]; 2];

/// Auto-chosen steps resolve the fastest rate by this fraction.
pub const RESOLUTION_FRACTION: f64 = 0.01;

/// A fixed step may exceed the resolution step by at most this factor.
pub const STEP_SLACK: f64 = 10.0;

const DEFAULT_MAX_STEPS: usize = 50_000_000;

type TimeDependentMatrix = dyn Fn(f64) -> Matrix2 + Send + Sync;

/// Rotating-frame generator of the state evolution.
#[derive(Clone)]
pub enum EffectiveGenerator {
    Constant(Matrix2),
    TimeDependent(Arc<TimeDependentMatrix>),
}

impl fmt::Debug for EffectiveGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectiveGenerator::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            EffectiveGenerator::TimeDependent(_) => f.write_str("TimeDependent(..)"),
        }
    }
}

impl EffectiveGenerator {
    /// `((0, −iΩ), (−iΩ, −γ))`.
    pub fn from_params(params: &SystemParams) -> Self {
        EffectiveGenerator::Constant(params.generator())
    }

    pub fn zero() -> Self {
        EffectiveGenerator::Constant([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn time_dependent<F>(f: F) -> Self
    where
        F: Fn(f64) -> Matrix2 + Send + Sync + 'static,
    {
        EffectiveGenerator::TimeDependent(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Matrix2 {
        match self {
            EffectiveGenerator::Constant(m) => *m,
            EffectiveGenerator::TimeDependent(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, EffectiveGenerator::Constant(_))
    }

    fn apply(&self, t: f64, psi: [C64; 2]) -> [C64; 2] {
        mat_vec(&self.at(t), psi)
    }

    /// Norm loss rate `−d/dt ψ†ψ`.
    fn loss_rate(&self, t: f64, psi: [C64; 2]) -> f64 {
        let g_psi = self.apply(t, psi);
        -2.0 * (psi[0].conj() * g_psi[0] + psi[1].conj() * g_psi[1]).re
    }
}

fn mat_vec(m: &Matrix2, v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn axpy(y: [C64; 2], a: f64, x: [C64; 2]) -> [C64; 2] {
    [y[0] + x[0] * a, y[1] + x[1] * a]
}

/// Largest entry magnitude; sets the fastest rate in the problem.
fn generator_scale(m: &Matrix2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Step that resolves the generator at time `t`, `None` for a zero
/// generator.
pub fn resolution_step(gen: &EffectiveGenerator, t: f64) -> Option<f64> {
    let scale = generator_scale(&gen.at(t));
    (scale > 0.0).then(|| RESOLUTION_FRACTION / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed { step: f64, max_steps: usize },
    Adaptive { rel_tol: f64, abs_tol: f64, max_steps: usize },
}

impl StepControl {
    /// Fixed step of `0.01·min(1/Ω, 1/γ)` over the nonzero rates.
    pub fn auto(params: &SystemParams) -> Self {
        let step = params.shortest_time_scale().map_or(RESOLUTION_FRACTION, |s| RESOLUTION_FRACTION * s);
        StepControl::Fixed { step, max_steps: DEFAULT_MAX_STEPS }
    }

    /// Fixed step resolving `gen` at `t`.
    pub fn auto_for(gen: &EffectiveGenerator, t: f64) -> Self {
        let step = resolution_step(gen, t).unwrap_or(RESOLUTION_FRACTION);
        StepControl::Fixed { step, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn fixed(step: f64) -> Self {
        StepControl::Fixed { step, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        StepControl::Adaptive { rel_tol, abs_tol, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepControl::Fixed { step, max_steps } => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(ZenoError::invalid("step", format!("must be finite and > 0, got {step}")));
                }
                if max_steps == 0 {
                    return Err(ZenoError::invalid("max_steps", "must be > 0"));
                }
            }
            StepControl::Adaptive { rel_tol, abs_tol, max_steps } => {
                if !(rel_tol > 0.0 && abs_tol > 0.0) {
                    return Err(ZenoError::invalid("tolerance", "rel_tol and abs_tol must be > 0"));
                }
                if max_steps == 0 {
                    return Err(ZenoError::invalid("max_steps", "must be > 0"));
                }
            }
        }
        Ok(())
    }
}

/// State at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Amplitudes,
}

/// Integrates from `t_span.0` to `t_span.1`, returning every accepted step
/// including both endpoints.
pub fn integrate(
    gen: &EffectiveGenerator,
    init: &Amplitudes,
    t_span: (f64, f64),
    ctrl: &StepControl,
) -> Result<Vec<Sample>> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(ZenoError::invalid("t_span", format!("need finite t0 <= t1, got [{t0}, {t1}]")));
    }
    if !init.is_finite() {
        return Err(ZenoError::invalid("init", "initial amplitudes must be finite"));
    }
    ctrl.validate()?;
    match *ctrl {
        StepControl::Fixed { step, max_steps } => rk4(gen, init, t0, t1, step, max_steps),
        StepControl::Adaptive { rel_tol, abs_tol, max_steps } => {
            dormand_prince(gen, init, t0, t1, rel_tol, abs_tol, max_steps)
        }
    }
}

/// State at each of the increasing `times`, starting from `init` at
/// `times[0]`.
pub fn integrate_to(
    gen: &EffectiveGenerator,
    init: &Amplitudes,
    times: &[f64],
    ctrl: &StepControl,
) -> Result<Vec<Sample>> {
    let Some(&first) = times.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(times.len());
    let mut state = *init;
    out.push(Sample { t: first, state });
    for pair in times.windows(2) {
        let segment = integrate(gen, &state, (pair[0], pair[1]), ctrl)?;
        state = segment.last().expect("segment has endpoints").state;
        out.push(Sample { t: pair[1], state });
    }
    Ok(out)
}

fn rk4(
    gen: &EffectiveGenerator,
    init: &Amplitudes,
    t0: f64,
    t1: f64,
    step: f64,
    max_steps: usize,
) -> Result<Vec<Sample>> {
    if let Some(limit) = resolution_step(gen, t0) {
        if step > STEP_SLACK * limit {
            return Err(ZenoError::StepTooLarge { step, limit });
        }
    }
    let span = t1 - t0;
    // Shrink the step so an integer number of steps lands on t1.
    let n = ((span / step) - 1e-9).ceil().max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
    if n > max_steps {
        return Err(ZenoError::MaxStepsExceeded { max_steps });
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(Sample { t: t0, state: *init });
    if n == 0 {
        return Ok(out);
    }
    let h = span / n as f64;
    let mut psi = [init.a1, init.a2];
    let mut p_emit = init.p_emit;
    let mut f0 = gen.apply(t0, psi);
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let k1 = f0;
        let k2 = gen.apply(t + 0.5 * h, axpy(psi, 0.5 * h, k1));
        let k3 = gen.apply(t + 0.5 * h, axpy(psi, 0.5 * h, k2));
        let k4 = gen.apply(t + h, axpy(psi, h, k3));
        let next = [
            psi[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            psi[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ];
        let t_next = if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * h };
        let f1 = gen.apply(t_next, next);
        p_emit += simpson_loss(gen, t, h, psi, next, f0, f1);
        psi = next;
        f0 = f1;
        out.push(Sample { t: t_next, state: Amplitudes { a1: psi[0], a2: psi[1], p_emit } });
    }
    Ok(out)
}

/// Simpson's rule for the loss rate over one step, with the midpoint state
/// from cubic Hermite interpolation of the step endpoints.
fn simpson_loss(
    gen: &EffectiveGenerator,
    t: f64,
    h: f64,
    psi0: [C64; 2],
    psi1: [C64; 2],
    f0: [C64; 2],
    f1: [C64; 2],
) -> f64 {
    let mid = [
        (psi0[0] + psi1[0]) * 0.5 + (f0[0] - f1[0]) * (h / 8.0),
        (psi0[1] + psi1[1]) * 0.5 + (f0[1] - f1[1]) * (h / 8.0),
    ];
    let r0 = gen.loss_rate(t, psi0);
    let rm = gen.loss_rate(t + 0.5 * h, mid);
    let r1 = gen.loss_rate(t + h, psi1);
    h / 6.0 * (r0 + 4.0 * rm + r1)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(psi: [C64; 2], h: f64, terms: &[(f64, [C64; 2])]) -> [C64; 2] {
    let mut out = psi;
    for &(w, k) in terms {
        out[0] += k[0] * (w * h);
        out[1] += k[1] * (w * h);
    }
    out
}

fn dormand_prince(
    gen: &EffectiveGenerator,
    init: &Amplitudes,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
) -> Result<Vec<Sample>> {
    let mut out = vec![Sample { t: t0, state: *init }];
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(out);
    }
    let mut t = t0;
    let mut psi = [init.a1, init.a2];
    let mut p_emit = init.p_emit;
    let mut h = resolution_step(gen, t0).map_or(span, |s| s * 10.0).min(span);
    let mut k1 = gen.apply(t, psi);
    let mut attempts = 0usize;

    while t < t1 {
        attempts += 1;
        if attempts > max_steps {
            return Err(ZenoError::MaxStepsExceeded { max_steps });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = gen.apply(t + C2 * h, combine(psi, h, &[(A21, k1)]));
        let k3 = gen.apply(t + C3 * h, combine(psi, h, &[(A31, k1), (A32, k2)]));
        let k4 = gen.apply(t + C4 * h, combine(psi, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = gen.apply(t + C5 * h, combine(psi, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = gen.apply(t + h, combine(psi, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let next = combine(psi, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let t_next = if last { t1 } else { t + h };
        let k7 = gen.apply(t_next, next);
        let err = combine(
            [C64::new(0.0, 0.0); 2],
            h,
            &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
        );
        let err_norm = (0..2)
            .map(|i| {
                let scale = abs_tol + rel_tol * psi[i].norm().max(next[i].norm());
                err[i].norm() / scale
            })
            .fold(0.0, f64::max);

        if err_norm <= 1.0 {
            p_emit += simpson_loss(gen, t, t_next - t, psi, next, k1, k7);
            t = t_next;
            psi = next;
            k1 = k7;
            out.push(Sample { t, state: Amplitudes { a1: psi[0], a2: psi[1], p_emit } });
        }
        let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(out)
}

/// 2×2 matrix exponential `e^{Gt}` by Cayley–Hamilton.
pub fn expm2(m: &Matrix2, t: f64) -> Matrix2 {
    let mu = (m[0][0] + m[1][1]) * 0.5;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let nu = (mu * mu - det).sqrt();
    let x = nu * t;
    let (cosh, sinh_over_nu) = if x.norm() < 1e-6 {
        let x2 = x * x;
        (1.0 + x2 / 2.0 + x2 * x2 / 24.0, (1.0 + x2 / 6.0 + x2 * x2 / 120.0) * t)
    } else {
        (x.cosh(), x.sinh() / nu)
    };
    let scale = (mu * t).exp();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let ident = [[one, zero], [zero, one]];
    let mut out = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let shifted = m[i][j] - if i == j { mu } else { zero };
            out[i][j] = scale * (cosh * ident[i][j] + sinh_over_nu * shifted);
        }
    }
    out
}

/// Empirical order of fixed-step RK4 from the errors at steps `h`, `h/2`
/// and `h/4`.
///
/// Constant generators are checked against the exact exponential; otherwise
/// successive differences of the three runs stand in for the errors. `None`
/// when the errors vanish and no order can be measured.
pub fn convergence_order(gen: &EffectiveGenerator, init: &Amplitudes, t: f64, h: f64) -> Result<Option<f64>> {
    let run = |step: f64| -> Result<[C64; 2]> {
        let ctrl = StepControl::Fixed { step, max_steps: DEFAULT_MAX_STEPS };
        let end = integrate(gen, init, (0.0, t), &ctrl)?.last().expect("endpoints").state;
        Ok([end.a1, end.a2])
    };
    let dist = |a: [C64; 2], b: [C64; 2]| (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let y = [run(h)?, run(h / 2.0)?, run(h / 4.0)?];
    let (coarse, fine) = match gen {
        EffectiveGenerator::Constant(m) => {
            let exact = mat_vec(&expm2(m, t), [init.a1, init.a2]);
            (dist(y[1], exact), dist(y[2], exact))
        }
        EffectiveGenerator::TimeDependent(_) => (dist(y[0], y[1]), dist(y[1], y[2])),
    };
    if coarse == 0.0 || fine == 0.0 {
        return Ok(None);
    }
    Ok(Some((coarse / fine).log2()))
}

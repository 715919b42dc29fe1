//! Test-only oracles, independent of the library's evolution code paths.
#![allow(dead_code)]

use num_complex::Complex64 as C64;

pub type M2 = [[C64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `e^{Gt}` by Taylor series with scaling and squaring.
pub fn expm_taylor(g: &M2, t: f64) -> M2 {
    let norm = g.iter().flatten().map(|z| z.norm()).sum::<f64>() * t;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = t / 2f64.powi(squarings as i32);
    let a: M2 = [[g[0][0] * scale, g[0][1] * scale], [g[1][0] * scale, g[1][1] * scale]];
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut result: M2 = [[one, zero], [zero, one]];
    let mut term = result;
    for k in 1..30 {
        term = mul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result
}

/// Decay generator `((0, −iΩ), (−iΩ, −γ))` written out independently.
pub fn decay_generator(omega: f64, gamma: f64) -> M2 {
    [[C64::new(0.0, 0.0), C64::new(0.0, -omega)], [C64::new(0.0, -omega), C64::new(-gamma, 0.0)]]
}

/// `(a1, a2)` at `t` from level |1⟩ by the Taylor oracle.
pub fn oracle_from_ground(omega: f64, gamma: f64, t: f64) -> (C64, C64) {
    let u = expm_taylor(&decay_generator(omega, gamma), t);
    (u[0][0], u[1][0])
}

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

pub fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

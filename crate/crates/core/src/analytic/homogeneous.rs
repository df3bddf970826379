//! Source-free solutions for the Ohmic coupling: the symmetric damped family,
//! its two-amplitude generalization, and the matching reservoir motion.

use std::f64::consts::PI;

use super::kernel::Kernel;
use crate::model::{derived_rates, OscillatorParams};

/// `q(t)` damped into past and future from `q(0) = b`, `q'(0) = 0`:
/// `b exp(-gamma|t|/2) [C(|t|) + gamma S(|t|)]`.
pub fn q_homogeneous(p: &OscillatorParams, b: f64, t: f64) -> f64 {
    q_homogeneous_derivs(p, b, t)[0]
}

/// `[q, q', q'']` of the symmetric damped solution.
pub fn q_homogeneous_derivs(p: &OscillatorParams, b: f64, t: f64) -> [f64; 3] {
    let k = Kernel::new(p);
    let [y, dy, ddy] = k.eval(t.abs(), b, b * p.gamma);
    if t < 0.0 {
        [y, -dy, ddy]
    } else {
        [y, dy, ddy]
    }
}

/// Amplitude of the overdamped form
/// `c exp(-gamma|t|/2)[exp(g1|t|/2) - (gamma-g1)/(gamma+g1) exp(-g1|t|/2)]`
/// that equals the symmetric solution with `q(0) = b`: `c = b (gamma + g1) / (2 g1)`.
pub fn overdamped_amplitude(p: &OscillatorParams, b: f64) -> Option<f64> {
    derived_rates(p).gamma1.map(|g1| b * (p.gamma + g1) / (2.0 * g1))
}

/// Two-amplitude solution with asymptotes `+-(b2 - b1)/2` and
/// `q(0) = (b1 + b2)/2`. Undefined (NaN) for `gamma = 0` with `b1 != b2`.
pub fn q_general_homogeneous(p: &OscillatorParams, b1: f64, b2: f64, t: f64) -> f64 {
    q_general_homogeneous_derivs(p, b1, b2, t)[0]
}

/// `[q, q', q'']` of the two-amplitude solution.
pub fn q_general_homogeneous_derivs(p: &OscillatorParams, b1: f64, b2: f64, t: f64) -> [f64; 3] {
    let k = Kernel::new(p);
    let g = p.gamma;
    let w2 = p.omega0 * p.omega0;
    let jump = b2 - b1;
    let shift = if jump == 0.0 { 0.0 } else { jump * w2 / g };
    if t >= 0.0 {
        let [y, dy, ddy] = k.eval(t, b1, b1 * g + shift);
        [0.5 * jump + y, dy, ddy]
    } else {
        let [y, dy, ddy] = k.eval(-t, b2, b2 * g - shift);
        [-0.5 * jump + y, -dy, ddy]
    }
}

/// `(omega^2 - omega0^2)^2 + gamma^2 omega^2`.
pub fn resonance_denominator(p: &OscillatorParams, omega: f64) -> f64 {
    let d = omega * omega - p.omega0 * p.omega0;
    d * d + p.gamma * p.gamma * omega * omega
}

/// Fourier transform of the symmetric damped solution: `2 b gamma omega0^2 / D(omega)`.
pub fn q_homogeneous_spectrum(p: &OscillatorParams, b: f64, omega: f64) -> f64 {
    2.0 * b * p.gamma * p.omega0 * p.omega0 / resonance_denominator(p, omega)
}

fn reservoir_prefactor(p: &OscillatorParams, b: f64, omega: f64) -> f64 {
    let g = p.gamma;
    b * omega * p.omega0 * (2.0 * g / (PI * (omega * omega + g * g))).sqrt() / resonance_denominator(p, omega)
}

/// Reservoir mode `X_omega(t)` driven by the symmetric solution, with
/// `X(0) = X'(0) = 0`.
pub fn x_reservoir_homogeneous(p: &OscillatorParams, b: f64, omega: f64, t: f64) -> f64 {
    x_reservoir_homogeneous_derivs(p, b, omega, t)[0]
}

/// `[X, X']` of the reservoir mode.
pub fn x_reservoir_homogeneous_derivs(p: &OscillatorParams, b: f64, omega: f64, t: f64) -> [f64; 2] {
    if b == 0.0 || omega <= 0.0 {
        return [0.0, 0.0];
    }
    let g = p.gamma;
    let w = omega;
    let w02 = p.omega0 * p.omega0;
    let pre = reservoir_prefactor(p, b, omega);
    let a1 = w02 - g * g - w * w;
    let a2 = g * w02 / w;
    let k1 = w * w + g * g - w02;
    let k2 = g * (w * w + g * g - 3.0 * w02);
    let tau = t.abs();
    let (s, c) = (w * tau).sin_cos();
    let [y, dy, _] = Kernel::new(p).eval(tau, k1, k2);
    let x = pre * (a1 * c + a2 * s + y);
    let v = pre * (-a1 * w * s + a2 * w * c + dy);
    if t < 0.0 {
        [x, -v]
    } else {
        [x, v]
    }
}

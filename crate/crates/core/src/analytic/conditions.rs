//! Reservoir data in the infinite past, the forcing it exerts on the system
//! oscillator, and the map between time-zero and asymptotic descriptions.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::green::GreenFunctionRetarded;
use super::homogeneous::resonance_denominator;
use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::grid::{pv_inverse_square_sampled, SpectralGrid};
use crate::model::{ConditionKind, OscillatorParams, ReservoirCondition, Spectrum};

/// Asymptotic amplitudes `(A, B)` of the free reservoir that produce the
/// symmetric damped solution with `q(0) = b`.
pub fn asymptotic_amplitudes(p: &OscillatorParams, b: f64, omega: f64) -> (f64, f64) {
    let g = p.gamma;
    let w0 = p.omega0;
    let pre = -b * (2.0 * g / (PI * (omega * omega + g * g))).sqrt() / resonance_denominator(p, omega);
    let a = pre * omega * w0 * (omega * omega + g * g - w0 * w0);
    let bb = pre * g * w0 * w0 * w0;
    (a, bb)
}

/// Asymptotic condition on `grid` for the symmetric damped solution.
pub fn asymptotic_condition_homogeneous(
    p: &OscillatorParams,
    b: f64,
    grid: SpectralGrid,
) -> Result<ReservoirCondition> {
    let (a, bb): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&w| asymptotic_amplitudes(p, b, w)).unzip();
    ReservoirCondition::asymptotic(grid, a, bb, 0.0)
}

/// Forcing `int alpha(w) [A(w) cos(w t) + B(w) sin(w t)] dw` exerted by the
/// free reservoir data in `rc`.
pub fn reservoir_forcing(c: &CouplingSpec, rc: &ReservoirCondition, t: f64) -> Result<f64> {
    let alpha = alpha_on(c, &rc.grid)?;
    Ok(forcing_with(&alpha, rc, t))
}

fn alpha_on(c: &CouplingSpec, grid: &SpectralGrid) -> Result<Vec<f64>> {
    grid.nodes().iter().map(|&w| c.alpha(w)).collect()
}

fn forcing_with(alpha: &[f64], rc: &ReservoirCondition, t: f64) -> f64 {
    let nodes = rc.grid.nodes();
    let weights = rc.grid.weights();
    let mut acc = 0.0;
    for i in 0..nodes.len() {
        let (s, co) = (nodes[i] * t).sin_cos();
        acc += weights[i] * alpha[i] * (rc.displacement[i] * co + rc.velocity[i] * s);
    }
    acc
}

/// Time stepping of the retarded convolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionOptions {
    /// Step of the uniform source-time grid.
    pub dt: f64,
    /// Length of history kept before the earliest requested time.
    pub window: f64,
    /// Largest accepted estimate of the response lost beyond the grid.
    pub coverage_tol: f64,
}

impl ConvolutionOptions {
    pub fn for_params(p: &OscillatorParams) -> Self {
        let rate = p.gamma.max(1e-3 * p.omega0);
        Self { dt: 0.05 / p.omega0.max(p.gamma), window: 40.0 / rate, coverage_tol: 1e-4 }
    }
}

/// Response lost beyond the grid: forcing spectrum at the last node,
/// filtered by the `1/omega^2` fall-off of the Green function and
/// integrated over the tail.
fn coverage_estimate(alpha: &[f64], rc: &ReservoirCondition) -> f64 {
    let (_, hi) = rc.grid.span();
    if !hi.is_finite() {
        return 0.0;
    }
    let n = alpha.len() - 1;
    let w = rc.grid.nodes()[n];
    alpha[n].abs() * (rc.displacement[n].abs() + rc.velocity[n].abs()) / w
}

/// `q(t) = a + int G_R(t - s) g(s) ds` for the Ohmic coupling.
pub fn q_from_asymptotic(p: &OscillatorParams, rc: &ReservoirCondition, t: f64) -> Result<f64> {
    Ok(q_from_asymptotic_series(p, rc, &[t], &ConvolutionOptions::for_params(p))?[0])
}

/// [`q_from_asymptotic`] at several times, sharing one forcing evaluation.
pub fn q_from_asymptotic_series(
    p: &OscillatorParams,
    rc: &ReservoirCondition,
    ts: &[f64],
    opts: &ConvolutionOptions,
) -> Result<Vec<f64>> {
    if rc.kind != ConditionKind::Asymptotic {
        return Err(Error::WrongConditionKind { expected: "asymptotic" });
    }
    rc.validate()?;
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    if rc.is_quiescent() {
        return Ok(vec![rc.zero_mode_a; ts.len()]);
    }
    let alpha = alpha_on(&CouplingSpec::ohmic(*p), &rc.grid)?;
    let lost = coverage_estimate(&alpha, rc);
    if lost > opts.coverage_tol {
        return Err(Error::Quadrature(format!(
            "spectral grid ends too early: estimated lost response {lost:e} exceeds {:e}",
            opts.coverage_tol
        )));
    }
    let t_hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_lo = ts.iter().copied().fold(f64::INFINITY, f64::min) - opts.window;
    let h = opts.dt;
    let n = ((t_hi - t_lo) / h).ceil() as usize + 1;
    let g: Vec<f64> = (0..=n).into_par_iter().map(|j| forcing_with(&alpha, rc, t_lo + j as f64 * h)).collect();
    let green = GreenFunctionRetarded::new(*p, 0.0);
    ts.par_iter()
        .map(|&t| {
            let m = ((t - t_lo) / h).floor() as usize;
            let f: Vec<f64> = (0..=m).map(|j| green.value(t - (t_lo + j as f64 * h)) * g[j]).collect();
            let mut acc = composite_simpson(&f, h);
            let last = t_lo + m as f64 * h;
            let delta = t - last;
            if delta > 0.0 {
                // G_R(0) = 0 at the upper end.
                acc += 0.5 * delta * f[m];
            }
            Ok(rc.zero_mode_a + acc)
        })
        .collect()
}

/// Simpson's rule on uniform samples, with a 3/8 panel for an odd number of
/// intervals.
fn composite_simpson(f: &[f64], h: f64) -> f64 {
    let m = f.len().saturating_sub(1);
    match m {
        0 => 0.0,
        1 => 0.5 * h * (f[0] + f[1]),
        2 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ => {
            let (even, rest) = if m.is_multiple_of(2) { (m, 0) } else { (m - 3, 3) };
            let mut s = f[0] + f[even];
            for (i, v) in f.iter().enumerate().take(even).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut acc = h / 3.0 * s;
            if rest == 3 {
                let k = even;
                acc += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
            }
            acc
        }
    }
}

/// Converts between time-zero and asymptotic reservoir data for the same
/// motion, given the system spectrum `q` sampled at the grid nodes.
///
/// The homogeneous amplitudes of the output are zero.
pub fn map_conditions(
    _p: &OscillatorParams,
    c: &CouplingSpec,
    q: &Spectrum,
    rc_in: &ReservoirCondition,
) -> Result<ReservoirCondition> {
    rc_in.validate()?;
    let (omega, values) = q.nonnegative();
    let nodes = rc_in.grid.nodes();
    if omega.len() != nodes.len() || omega.iter().zip(nodes).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
        return Err(Error::GridMismatch("spectrum must be sampled at the condition grid nodes".into()));
    }
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let xim: Vec<f64> = values.iter().zip(&omega).map(|(v, w)| w * v.im).collect();
    let grid = &rc_in.grid;
    let shifts: Vec<(f64, f64)> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &w)| {
            let alpha = c.alpha(w)?;
            let pv_re = pv_inverse_square_sampled(grid, &re, w).0;
            let pv_im = pv_inverse_square_sampled(grid, &xim, w).0;
            let da = alpha / (2.0 * w) * (values[i].im + 2.0 * w / PI * pv_re);
            let db = alpha / (2.0 * w) * (values[i].re - 2.0 / PI * pv_im);
            if !(da.is_finite() && db.is_finite()) {
                return Err(Error::Quadrature(format!("non-finite principal value at omega = {w}")));
            }
            Ok((da, db))
        })
        .collect::<Result<_>>()?;
    // A0 = AR - da, B0 = BR + db.
    let (sa, sb) = match rc_in.kind {
        ConditionKind::TimeZero => (1.0, -1.0),
        ConditionKind::Asymptotic => (-1.0, 1.0),
    };
    let a: Vec<f64> = rc_in.displacement.iter().zip(&shifts).map(|(v, s)| v + sa * s.0).collect();
    let b: Vec<f64> = rc_in.velocity.iter().zip(&shifts).map(|(v, s)| v + sb * s.1).collect();
    match rc_in.kind {
        ConditionKind::TimeZero => ReservoirCondition::asymptotic(grid.clone(), a, b, 0.0),
        ConditionKind::Asymptotic => ReservoirCondition::time_zero(grid.clone(), a, b, 0.0, 0.0),
    }
}

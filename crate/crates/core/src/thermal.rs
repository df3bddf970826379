//! Thermal-equilibrium moments of the damped oscillator.
//!
//! All quantities are real-axis quadratures of `coth(omega/2T)` against the
//! Green function. For the Ohmic coupling matched to the oscillator the
//! integrands are written in closed form; any other coupling goes through
//! `chi(omega)` and the regularized Green function
//! `G(omega) = -omega / ((omega + i eta) D(omega))`, `D = omega^2 - omega0^2 (1 - chi)`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{susceptibility, CouplingSpec};
use crate::error::{Error, Result};
use crate::model::OscillatorParams;
use crate::quad::{integrate_breaks, integrate_half_line, QuadOptions};

/// Largest phase `tau W` of the explicitly integrated range.
const MAX_PHASE: f64 = 2e4;
const OPTS: QuadOptions = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 8000 };

/// Planck occupation `1/(exp(omega/T) - 1)`; zero at `T = 0`.
pub fn planck(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// `coth(omega/2T) = 1 + 2 N(omega)`; `sign(omega)` at `T = 0`.
pub fn coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega.signum();
    }
    let x = omega / temperature;
    1.0 + 2.0 / x.exp_m1()
}

/// `omega coth(omega/2T)`, with the limit `2T` at `omega = 0`.
pub fn omega_coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega.abs();
    }
    if omega == 0.0 {
        return 2.0 * temperature;
    }
    let x = omega / temperature;
    omega + 2.0 * temperature * x / x.exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub temperature: f64,
    /// Regulator of the zero-frequency pole.
    pub eta: f64,
}

impl ThermalParams {
    pub fn new(temperature: f64, eta: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter {
                field: "temperature",
                reason: format!("must be >= 0, got {temperature}"),
            });
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter { field: "eta", reason: format!("must be > 0, got {eta}") });
        }
        Ok(Self { temperature, eta })
    }
}

/// A regulator-dependent value split as
/// `finite_part + divergent_coefficient / eta + log_coefficient ln(1/eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedValue {
    pub finite_part: f64,
    pub divergent_coefficient: f64,
    pub log_coefficient: f64,
    pub eta: f64,
}

impl RegularizedValue {
    /// Full value at the stored regulator.
    pub fn value(&self) -> f64 {
        self.finite_part + self.divergent_coefficient / self.eta + self.log_coefficient * (1.0 / self.eta).ln()
    }
}

#[derive(Debug, Clone, Copy)]
enum Route {
    Ohmic { w2: f64, gamma: f64 },
    General,
}

fn route(c: &CouplingSpec, p: &OscillatorParams) -> Route {
    match c.ohmic_params() {
        Some(cp) if cp == *p && c.weight == 1.0 && p.gamma > 0.0 => {
            Route::Ohmic { w2: p.omega0 * p.omega0, gamma: p.gamma }
        }
        _ => Route::General,
    }
}

fn ohmic_denominator(w2: f64, gamma: f64, omega: f64) -> f64 {
    let d = omega * omega - w2;
    d * d + gamma * gamma * omega * omega
}

/// `d chi / d omega`: closed form for Ohmic couplings, central difference otherwise.
pub fn susceptibility_derivative(c: &CouplingSpec, p: &OscillatorParams, omega: f64) -> Result<Complex64> {
    if let Some(cp) = c.ohmic_params() {
        let chi = susceptibility(c, p, omega)?;
        if cp.gamma == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Ok(Complex64::i() * chi / Complex64::new(cp.gamma, -omega));
    }
    let h = 1e-5 * omega.abs().max(1e-3 * p.omega0);
    let hi = susceptibility(c, p, omega + h)?;
    let lo = susceptibility(c, p, omega - h)?;
    Ok((hi - lo) / (2.0 * h))
}

/// `omega^2 - omega0^2 (1 - chi(omega))`.
fn resonance(c: &CouplingSpec, p: &OscillatorParams, omega: f64) -> Result<Complex64> {
    let chi = susceptibility(c, p, omega)?;
    Ok(omega * omega - p.omega0 * p.omega0 * (1.0 - chi))
}

/// Green function with the zero-frequency factor moved to `omega + i eta`.
pub fn green_regularized(c: &CouplingSpec, p: &OscillatorParams, eta: f64, omega: f64) -> Result<Complex64> {
    let d = resonance(c, p, omega)?;
    Ok(-omega / (Complex64::new(omega, eta) * d))
}

fn scales(p: &OscillatorParams, tp: &ThermalParams, with_eta: bool) -> Vec<f64> {
    let (w, g) = (p.omega0, p.gamma);
    let mut s =
        vec![w, 10.0 * w, w - g, w + g, w - 10.0 * g, w + 10.0 * g, g, 10.0 * g, tp.temperature, 10.0 * tp.temperature];
    if with_eta {
        s.extend([tp.eta, 10.0 * tp.eta]);
    }
    s.retain(|v| *v > 0.0 && v.is_finite());
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    s
}

/// Integrates `f` over `[0, inf)`, turning a NaN sentinel into an error.
fn half_line<F: Fn(f64) -> f64>(f: F, s: &[f64]) -> Result<f64> {
    let v = integrate_half_line(f, s, OPTS)?.value;
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite thermal integral".into()));
    }
    Ok(v)
}

fn or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// `int_0^inf env(w) cos(w tau) dw` for a smooth, decaying envelope.
///
/// For `tau != 0` the range is cut at `W` and the remainder is taken from
/// the first three terms of repeated integration by parts.
fn half_line_cos<F: Fn(f64) -> f64>(env: F, tau: f64, s: &[f64]) -> Result<f64> {
    if tau == 0.0 {
        return half_line(env, s);
    }
    let tau = tau.abs();
    let top = s.last().copied().unwrap_or(1.0);
    let reference = s.iter().map(|x| (env(*x) * x).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut cut = 10.0 * top;
    while tau * cut < MAX_PHASE && (env(cut) / (cut * cut * cut * tau.powi(4))).abs() * 64.0 > 1e-14 * reference {
        cut *= 2.0;
    }
    let mut breaks = vec![0.0];
    breaks.extend(s.iter().copied().filter(|x| *x < cut));
    let panel = 20.0 * PI / tau;
    let mut x = *breaks.last().unwrap() + panel;
    while x < cut {
        breaks.push(x);
        x += panel;
    }
    breaks.push(cut);
    let head = integrate_breaks(|w| env(w) * (w * tau).cos(), &breaks, OPTS)?.value;
    let h = 1e-3 * cut;
    let (f0, fp, fm) = (env(cut), env(cut + h), env(cut - h));
    let d1 = (fp - fm) / (2.0 * h);
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let (sn, cs) = (cut * tau).sin_cos();
    let tail = -f0 * sn / tau - d1 * cs / (tau * tau) + d2 * sn / tau.powi(3);
    let v = head + tail;
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite thermal integral".into()));
    }
    Ok(v)
}

/// `(1/pi) int_0^inf cos(w tau) coth(w/2T) Im G(w) dw` at a fixed regulator.
pub fn position_correlation_at(
    p: &OscillatorParams,
    c: &CouplingSpec,
    temperature: f64,
    eta: f64,
    tau: f64,
) -> Result<f64> {
    let tp = ThermalParams::new(temperature, eta)?;
    let s = scales(p, &tp, true);
    let v = match route(c, p) {
        Route::Ohmic { w2, gamma } => half_line_cos(
            |w| gamma * w2 * omega_coth_half(w, temperature) / ((w * w + eta * eta) * ohmic_denominator(w2, gamma, w)),
            tau,
            &s,
        )?,
        Route::General => position_general(p, c, temperature, eta, tau, &s)?,
    };
    Ok(v / PI)
}

fn position_general(p: &OscillatorParams, c: &CouplingSpec, t: f64, eta: f64, tau: f64, s: &[f64]) -> Result<f64> {
    // Im G written as pi alpha^2 |G|^2 / (2 omega), the form that carries the regulator.
    half_line_cos(
        |w| {
            or_nan(
                green_regularized(c, p, eta, w)
                    .map(|g| omega_coth_half(w, t) * PI * c.alpha_sq(w) * g.norm_sqr() / (2.0 * w * w)),
            )
        },
        tau,
        s,
    )
}

/// Symmetrized position correlation at lag `tau`, split into the finite
/// part and the regulator-divergent parts.
///
/// The `1/eta` coefficient is fitted from the values at `eta` and `eta/2`
/// for `T > 0`; at `T = 0` the same pair fits the `ln(1/eta)` coefficient.
pub fn position_correlation(
    p: &OscillatorParams,
    c: &CouplingSpec,
    tp: &ThermalParams,
    tau: f64,
) -> Result<RegularizedValue> {
    let v1 = position_correlation_at(p, c, tp.temperature, tp.eta, tau)?;
    let v2 = position_correlation_at(p, c, tp.temperature, 0.5 * tp.eta, tau)?;
    let (div, log) = if tp.temperature > 0.0 { ((v2 - v1) * tp.eta, 0.0) } else { (0.0, (v2 - v1) / LN_2) };
    let finite_part = v1 - div / tp.eta - log * (1.0 / tp.eta).ln();
    Ok(RegularizedValue { finite_part, divergent_coefficient: div, log_coefficient: log, eta: tp.eta })
}

/// `(1/pi) int_0^inf w^2 cos(w tau) coth(w/2T) Im G(w) dw`; no regulator enters.
pub fn momentum_correlation(p: &OscillatorParams, c: &CouplingSpec, tp: &ThermalParams, tau: f64) -> Result<f64> {
    let t = tp.temperature;
    let s = scales(p, tp, false);
    let v = match route(c, p) {
        Route::Ohmic { w2, gamma } => {
            half_line_cos(|w| gamma * w2 * omega_coth_half(w, t) / ohmic_denominator(w2, gamma, w), tau, &s)?
        }
        Route::General => momentum_general(p, c, t, tau, &s)?,
    };
    Ok(v / PI)
}

fn momentum_general(p: &OscillatorParams, c: &CouplingSpec, t: f64, tau: f64, s: &[f64]) -> Result<f64> {
    half_line_cos(|w| or_nan(resonance(c, p, w).map(|d| omega_coth_half(w, t) * (-w / d).im)), tau, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirEnergyTerms {
    /// `(omega0^2/2pi) Im int coth(w/2T) d[w chi]/dw G dw`.
    pub bath_term: f64,
    /// `(omega0^2/pi) Im int coth(w/2T) chi G dw`.
    pub cross_term: f64,
}

/// Reservoir energy and system-reservoir correlation at the regulator `tp.eta`.
pub fn reservoir_energy_terms(
    p: &OscillatorParams,
    c: &CouplingSpec,
    tp: &ThermalParams,
) -> Result<ReservoirEnergyTerms> {
    let t = tp.temperature;
    let w2 = p.omega0 * p.omega0;
    let s = scales(p, tp, true);
    let parts = |w: f64| -> Result<(f64, f64)> {
        let g = green_regularized(c, p, tp.eta, w)?;
        let chi = susceptibility(c, p, w)?;
        let dchi = susceptibility_derivative(c, p, w)?;
        let k = omega_coth_half(w, t) / w;
        Ok((k * ((chi + w * dchi) * g).im, k * (chi * g).im))
    };
    let bath = half_line(|w| or_nan(parts(w).map(|x| x.0)), &s)?;
    let cross = half_line(|w| or_nan(parts(w).map(|x| x.1)), &s)?;
    Ok(ReservoirEnergyTerms { bath_term: w2 / (2.0 * PI) * bath, cross_term: w2 / PI * cross })
}

/// Thermal energy of the system oscillator with the reservoir traced out,
/// including zero-point energy. The imaginary part is taken inside the
/// integral.
pub fn thermal_energy(p: &OscillatorParams, c: &CouplingSpec, tp: &ThermalParams) -> Result<f64> {
    let t = tp.temperature;
    let s = scales(p, tp, false);
    let v = match route(c, p) {
        Route::Ohmic { w2, gamma } => half_line(
            |w| {
                let g2 = gamma * gamma;
                gamma * w2 * (g2 + 3.0 * w * w - w2) * omega_coth_half(w, t)
                    / ((w * w + g2) * ohmic_denominator(w2, gamma, w))
            },
            &s,
        )?,
        Route::General => energy_general(p, c, t, &s)?,
    };
    Ok(v / (2.0 * PI))
}

fn energy_general(p: &OscillatorParams, c: &CouplingSpec, t: f64, s: &[f64]) -> Result<f64> {
    let w2 = p.omega0 * p.omega0;
    let integrand = |w: f64| -> Result<f64> {
        let d = resonance(c, p, w)?;
        let chi = susceptibility(c, p, w)?;
        let dchi = susceptibility_derivative(c, p, w)?;
        let bracket = w2 * (w * dchi - chi + 1.0) + w * w;
        Ok(omega_coth_half(w, t) / w * (-bracket / d).im)
    };
    half_line(|w| or_nan(integrand(w)), s)
}

/// Thermal energy assembled pointwise from the kinetic, potential, bath and
/// cross integrands at the regulator `tp.eta`; the zero-frequency poles of
/// the separate parts cancel before integration.
pub fn thermal_energy_assembled(p: &OscillatorParams, c: &CouplingSpec, tp: &ThermalParams) -> Result<f64> {
    let t = tp.temperature;
    let w2 = p.omega0 * p.omega0;
    let s = scales(p, tp, true);
    let integrand = |w: f64| -> Result<f64> {
        let g = green_regularized(c, p, tp.eta, w)?;
        let chi = susceptibility(c, p, w)?;
        let dchi = susceptibility_derivative(c, p, w)?;
        let kinetic = 0.5 * w * w * g.im;
        let potential = 0.5 * w2 * g.im;
        let bath = 0.5 * w2 * ((chi + w * dchi) * g).im;
        let cross = w2 * (chi * g).im;
        Ok(omega_coth_half(w, t) / w * (kinetic + potential + bath - cross))
    };
    Ok(half_line(|w| or_nan(integrand(w)), &s)? / PI)
}

/// Summary written by the thermal report command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalReport {
    pub params: OscillatorParams,
    pub temperature: f64,
    pub eta: f64,
    pub q2: RegularizedValue,
    pub p2: f64,
    pub energy: f64,
    pub reservoir: ReservoirEnergyTerms,
    /// Same energy from the pointwise assembly of its four parts.
    pub energy_assembled: f64,
    pub free_oscillator_energy: f64,
}

pub fn thermal_report(p: &OscillatorParams, c: &CouplingSpec, tp: &ThermalParams) -> Result<ThermalReport> {
    Ok(ThermalReport {
        params: *p,
        temperature: tp.temperature,
        eta: tp.eta,
        q2: position_correlation(p, c, tp, 0.0)?,
        p2: momentum_correlation(p, c, tp, 0.0)?,
        energy: thermal_energy(p, c, tp)?,
        reservoir: reservoir_energy_terms(p, c, tp)?,
        energy_assembled: thermal_energy_assembled(p, c, tp)?,
        free_oscillator_energy: 0.5 * p.omega0 * coth_half(p.omega0, tp.temperature),
    })
}

impl ThermalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

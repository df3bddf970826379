//! Domain types shared by every module.
//!
//! Units: hbar = k_B = 1. Frequencies, rates and temperatures share one
//! caller-chosen scale; time is measured in its inverse. Fourier transforms
//! follow `f(omega) = int f(t) exp(i omega t) dt`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Default tolerance for regime classification, relative to `omega0`.
pub const REGIME_TOL: f64 = 1e-12;

/// Free frequency and damping rate of the system oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub omega0: f64,
    pub gamma: f64,
}

impl OscillatorParams {
    pub fn new(omega0: f64, gamma: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter {
                field: "omega0",
                reason: format!("must be finite and > 0, got {omega0}"),
            });
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter {
                field: "gamma",
                reason: format!("must be finite and >= 0, got {gamma}"),
            });
        }
        Ok(Self { omega0, gamma })
    }

    /// Parameters with every rate multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self { omega0: self.omega0 * s, gamma: self.gamma * s }
    }

    /// `4 omega0^2 - gamma^2`: positive when underdamped.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.omega0 * self.omega0 - self.gamma * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Under,
    Critical,
    Over,
}

/// Regime from `gamma` vs `2 omega0` with an absolute tolerance `tol`.
pub fn classify_regime(p: &OscillatorParams, tol: f64) -> Regime {
    let edge = 2.0 * p.omega0;
    if (p.gamma - edge).abs() <= tol {
        Regime::Critical
    } else if p.gamma < edge {
        Regime::Under
    } else {
        Regime::Over
    }
}

/// Oscillation frequency or extra decay rate of the damped motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// `sqrt(4 omega0^2 - gamma^2)`; zero at critical damping.
    pub omega1: Option<f64>,
    /// `sqrt(gamma^2 - 4 omega0^2)`.
    pub gamma1: Option<f64>,
}

pub fn derived_rates(p: &OscillatorParams) -> DerivedRates {
    match classify_regime(p, REGIME_TOL * p.omega0) {
        Regime::Under => DerivedRates { omega1: Some(p.discriminant().sqrt()), gamma1: None },
        Regime::Critical => DerivedRates { omega1: Some(0.0), gamma1: None },
        Regime::Over => DerivedRates { omega1: None, gamma1: Some((-p.discriminant()).sqrt()) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    /// Reservoir displacement and velocity imposed at `t = 0`.
    TimeZero,
    /// Reservoir state specified in the infinite past.
    Asymptotic,
}

/// Free-reservoir data `X(t) ~ A cos(omega t) + B sin(omega t)` on a grid,
/// plus the homogeneous amplitudes of the system oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirCondition {
    pub kind: ConditionKind,
    pub grid: SpectralGrid,
    /// Displacement amplitude `A(omega)`.
    pub displacement: Vec<f64>,
    /// Velocity amplitude over frequency, `B(omega)`.
    pub velocity: Vec<f64>,
    /// Constant zero-mode displacement (asymptotic kind).
    pub zero_mode_a: f64,
    /// Homogeneous amplitudes for `t >= 0` and `t <= 0` (time-zero kind).
    pub b1: f64,
    pub b2: f64,
}

impl ReservoirCondition {
    pub fn time_zero(grid: SpectralGrid, displacement: Vec<f64>, velocity: Vec<f64>, b1: f64, b2: f64) -> Result<Self> {
        let rc = Self { kind: ConditionKind::TimeZero, grid, displacement, velocity, zero_mode_a: 0.0, b1, b2 };
        rc.validate()?;
        Ok(rc)
    }

    pub fn asymptotic(
        grid: SpectralGrid,
        displacement: Vec<f64>,
        velocity: Vec<f64>,
        zero_mode_a: f64,
    ) -> Result<Self> {
        let rc = Self { kind: ConditionKind::Asymptotic, grid, displacement, velocity, zero_mode_a, b1: 0.0, b2: 0.0 };
        rc.validate()?;
        Ok(rc)
    }

    /// Reservoir at rest in the given kind, with all amplitudes zero.
    pub fn quiescent(kind: ConditionKind, grid: SpectralGrid) -> Self {
        let n = grid.len();
        Self { kind, grid, displacement: vec![0.0; n], velocity: vec![0.0; n], zero_mode_a: 0.0, b1: 0.0, b2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.displacement.len() != n || self.velocity.len() != n {
            return Err(Error::GridMismatch(format!(
                "amplitudes have lengths {} and {}, grid has {n}",
                self.displacement.len(),
                self.velocity.len()
            )));
        }
        if !self.displacement.iter().chain(&self.velocity).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter { field: "reservoir", reason: "amplitudes must be finite".into() });
        }
        for (field, v) in [("zero_mode_a", self.zero_mode_a), ("b1", self.b1), ("b2", self.b2)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { field, reason: "must be finite".into() });
            }
        }
        Ok(())
    }

    pub fn is_quiescent(&self) -> bool {
        self.displacement.iter().chain(&self.velocity).all(|v| *v == 0.0)
    }
}

/// Samples of one reservoir mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSamples {
    pub omega: f64,
    pub values: Vec<f64>,
}

/// Sampled motion on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub modes: Vec<ModeSamples>,
}

impl Trajectory {
    pub fn new(t: Vec<f64>, q: Vec<f64>, qdot: Vec<f64>) -> Result<Self> {
        let tr = Self { t, q, qdot, modes: Vec::new() };
        tr.validate()?;
        Ok(tr)
    }

    /// Uniform grid of `n` points on `[t0, t1]`.
    pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![t0];
        }
        let h = (t1 - t0) / (n - 1) as f64;
        (0..n).map(|i| if i == n - 1 { t1 } else { t0 + i as f64 * h }).collect()
    }

    /// Samples `q` and `qdot` from closures.
    pub fn from_fn<F: Fn(f64) -> (f64, f64)>(t: Vec<f64>, f: F) -> Self {
        let (q, qdot) = t.iter().map(|&s| f(s)).unzip();
        Self { t, q, qdot, modes: Vec::new() }
    }

    pub fn with_mode(mut self, omega: f64, values: Vec<f64>) -> Result<Self> {
        self.modes.push(ModeSamples { omega, values });
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.q.len() != n || self.qdot.len() != n || self.modes.iter().any(|m| m.values.len() != n) {
            return Err(Error::GridMismatch("trajectory arrays differ in length".into()));
        }
        if n >= 3 {
            let h = self.t[1] - self.t[0];
            if !(h > 0.0) || self.t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
                return Err(Error::InvalidParameter {
                    field: "t",
                    reason: "time grid must be uniform and increasing".into(),
                });
            }
        }
        Ok(())
    }
}

/// Complex samples of a transform on a real frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_fn<F: Fn(f64) -> Complex64>(omega: Vec<f64>, f: F) -> Self {
        let values = omega.iter().map(|&w| f(w)).collect();
        Self { omega, values }
    }

    /// Trapezoid transform `int q(t) exp(i omega t) dt` of a sampled signal.
    pub fn from_trajectory(tr: &Trajectory, omega: Vec<f64>) -> Self {
        let h = tr.dt();
        let n = tr.len();
        let values = omega
            .iter()
            .map(|&w| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, (t, q)) in tr.t.iter().zip(&tr.q).enumerate() {
                    let wt = if i == 0 || i + 1 == n { 0.5 * h } else { h };
                    let ph = w * t;
                    acc += Complex64::new(ph.cos(), ph.sin()) * (q * wt);
                }
                acc
            })
            .collect();
        Self { omega, values }
    }

    /// Largest relative violation of `value(-omega) = conj(value(omega))`
    /// over pairs of mirrored nodes.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, w) in self.omega.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            if let Some(j) = self.omega.iter().position(|v| *v == -*w) {
                let a = self.values[i];
                let b = self.values[j].conj();
                let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
                worst = worst.max((a - b).norm() / scale);
            }
        }
        worst
    }

    /// Samples at `omega >= 0`, in grid order.
    pub fn nonnegative(&self) -> (Vec<f64>, Vec<Complex64>) {
        self.omega.iter().zip(&self.values).filter(|(w, _)| **w >= 0.0).map(|(w, v)| (*w, *v)).unzip()
    }
}

/// Instantaneous state of system and reservoir, the latter sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantState<'a> {
    pub q: f64,
    pub qdot: f64,
    pub grid: &'a SpectralGrid,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    /// Magnitude of the reservoir integrand beyond the grid, assuming `1/omega^2` decay.
    pub tail_estimate: f64,
    /// Set when the tail estimate exceeds `1e-6` of the energy scale.
    pub grid_too_coarse: bool,
}

/// Total energy `q'^2/2 + omega0^2 q^2/2 + int (X'^2 + omega^2 X^2)/2 - int alpha q X`.
pub fn total_energy(p: &OscillatorParams, c: &CouplingSpec, state: &InstantState<'_>) -> Result<EnergyReport> {
    let g = state.grid;
    if state.x.len() != g.len() || state.xdot.len() != g.len() {
        return Err(Error::GridMismatch("reservoir state does not match grid".into()));
    }
    let mut integrand = Vec::with_capacity(g.len());
    let mut magnitude = Vec::with_capacity(g.len());
    for ((w, x), xd) in g.nodes().iter().zip(&state.x).zip(&state.xdot) {
        let a = c.alpha_extended(*w);
        let free = 0.5 * (xd * xd + w * w * x * x);
        let cross = a * state.q * x;
        integrand.push(free - cross);
        magnitude.push(free.abs() + cross.abs());
    }
    let system = 0.5 * state.qdot * state.qdot + 0.5 * p.omega0 * p.omega0 * state.q * state.q;
    let bath = g.integrate(&integrand);
    let value = system + bath;
    let (_, hi) = g.span();
    let tail_estimate = if hi.is_finite() {
        let last = g.len() - 1;
        integrand[last].abs() * g.nodes()[last]
    } else {
        0.0
    };
    let scale = system.abs() + g.integrate(&magnitude);
    let grid_too_coarse = scale > 0.0 && tail_estimate > 1e-6 * scale;
    Ok(EnergyReport { value, tail_estimate, grid_too_coarse })
}

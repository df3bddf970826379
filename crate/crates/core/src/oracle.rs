//! Discretized reservoir: `N` bath oscillators on a frequency grid integrated
//! together with the system as one linear ODE system.
//!
//! Mode `j` carries `x_j = sqrt(w_j) X(omega_j)` and couples with
//! `c_j = alpha(omega_j) sqrt(w_j)`:
//!
//! ```text
//! q''   = -(omega0^2 - shift) q + sum_j c_j x_j
//! x_j'' = -omega_j^2 x_j + c_j q
//! ```
//!
//! `shift = int_0^inf alpha^2/omega^2 - sum_j c_j^2/omega_j^2` restores the
//! static stiffness lost to truncation and grid error, so the discrete system
//! keeps the continuum zero mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{pv_kernel_integral, CouplingSpec};
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::model::{OscillatorParams, Trajectory};
use crate::quad::{integrate_breaks, QuadOptions};
use crate::thermal::coth_half;

/// Relative energy drift that aborts an integration.
pub const MAX_ENERGY_DRIFT: f64 = 1e-4;
/// Stability bound `dt * omega_max`.
pub const MAX_STEP_PRODUCT: f64 = 0.1;
const MEMBERS_PER_BLOCK: usize = 64;

/// Positions and velocities of the system and every bath mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathState {
    pub q: f64,
    pub qdot: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

impl BathState {
    pub fn at_rest(n: usize) -> Self {
        Self { q: 0.0, qdot: 0.0, x: vec![0.0; n], xdot: vec![0.0; n] }
    }
}

/// How well the discrete couplings reproduce the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationReport {
    /// `sum_j c_j^2 / omega_j^2`.
    pub discrete: f64,
    /// `int_0^omega_max alpha^2/omega^2` by adaptive quadrature.
    pub window: f64,
    /// `int_0^inf alpha^2/omega^2`.
    pub total: f64,
    /// `window - discrete`: grid error inside the covered band.
    pub defect: f64,
    /// `total - window`: stiffness carried by modes above the grid.
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    /// Added back to the system stiffness; see the module docs.
    pub stiffness_shift: f64,
    pub report: DiscretizationReport,
    pub state: BathState,
}

/// Discretizes `c` on the nodes of `grid` with its quadrature weights.
pub fn build_bath(c: &CouplingSpec, grid: &SpectralGrid) -> Result<DiscreteBath> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { field: "grid", reason: "no nodes".into() });
    }
    if grid.nodes()[0] <= 0.0 {
        return Err(Error::InvalidParameter { field: "grid", reason: "bath frequencies must be > 0".into() });
    }
    let frequencies = grid.nodes().to_vec();
    let couplings: Vec<f64> =
        frequencies.iter().zip(grid.weights()).map(|(w, dw)| (c.alpha_sq(*w) * dw).sqrt()).collect();
    let discrete: f64 = frequencies.iter().zip(&couplings).map(|(w, k)| k * k / (w * w)).sum();
    let total = pv_kernel_integral(c, 0.0)?.value;
    let top = if grid.span().1.is_finite() { grid.span().1 } else { grid.omega_max() };
    let window = if total == 0.0 {
        0.0
    } else {
        let mut breaks = vec![0.0];
        breaks.extend(c.scales().into_iter().filter(|s| *s < top));
        breaks.push(top);
        integrate_breaks(|x| c.alpha_sq(x) / (x * x), &breaks, QuadOptions::with_tol(1e-14, 1e-12))?.value
    };
    let report = DiscretizationReport { discrete, window, total, defect: window - discrete, tail: total - window };
    let n = frequencies.len();
    Ok(DiscreteBath { frequencies, couplings, stiffness_shift: total - discrete, report, state: BathState::at_rest(n) })
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn omega_max(&self) -> f64 {
        self.frequencies.iter().copied().fold(0.0, f64::max)
    }

    pub fn with_state(mut self, state: BathState) -> Result<Self> {
        if state.x.len() != self.len() || state.xdot.len() != self.len() {
            return Err(Error::GridMismatch("bath state does not match the mode count".into()));
        }
        self.state = state;
        Ok(self)
    }

    /// System displaced to `q` and velocity `qdot`, bath at rest.
    pub fn with_system(mut self, q: f64, qdot: f64) -> Self {
        self.state = BathState { q, qdot, ..BathState::at_rest(self.len()) };
        self
    }

    /// Static configuration `q = a`, `x_j = c_j a / omega_j^2`.
    pub fn zero_mode_state(&self, a: f64) -> BathState {
        let x = self.frequencies.iter().zip(&self.couplings).map(|(w, k)| k * a / (w * w)).collect();
        BathState { q: a, qdot: 0.0, x, xdot: vec![0.0; self.len()] }
    }

    /// Effective system stiffness `omega0^2 - shift`.
    pub fn stiffness(&self, p: &OscillatorParams) -> f64 {
        p.omega0 * p.omega0 - self.stiffness_shift
    }

    /// Discrete Hamiltonian of `s`.
    pub fn energy(&self, p: &OscillatorParams, s: &BathState) -> f64 {
        energy_parts(&self.frequencies, &self.couplings, self.stiffness(p), s).0
    }
}

/// `(H, scale)` where `scale` is the sum of the non-negative quadratic terms.
fn energy_parts(w: &[f64], c: &[f64], k: f64, s: &BathState) -> (f64, f64) {
    let mut free = 0.0;
    let mut cross = 0.0;
    for j in 0..w.len() {
        free += 0.5 * (s.xdot[j] * s.xdot[j] + w[j] * w[j] * s.x[j] * s.x[j]);
        cross += c[j] * s.x[j];
    }
    let sys = 0.5 * s.qdot * s.qdot + 0.5 * k * s.q * s.q;
    (sys + free - s.q * cross, sys.abs() + free + (s.q * cross).abs())
}

/// Fixed-step RK4 with preallocated stage buffers.
struct Stepper<'a> {
    w2: Vec<f64>,
    c: &'a [f64],
    k: f64,
    tx: Vec<f64>,
    tv: Vec<f64>,
    kx: Vec<f64>,
    kv: Vec<f64>,
    ax: Vec<f64>,
    av: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(bath: &'a DiscreteBath, p: &OscillatorParams) -> Self {
        let n = bath.len();
        Self {
            w2: bath.frequencies.iter().map(|w| w * w).collect(),
            c: &bath.couplings,
            k: bath.stiffness(p),
            tx: vec![0.0; n],
            tv: vec![0.0; n],
            kx: vec![0.0; n],
            kv: vec![0.0; n],
            ax: vec![0.0; n],
            av: vec![0.0; n],
        }
    }

    /// Derivative at the staged point `(q, v, tx, tv)` into `(kx, kv)`; returns `(q', v')`.
    fn deriv(&mut self, q: f64, v: f64) -> (f64, f64) {
        let mut force = 0.0;
        for j in 0..self.w2.len() {
            let x = self.tx[j];
            force += self.c[j] * x;
            self.kx[j] = self.tv[j];
            self.kv[j] = -self.w2[j] * x + self.c[j] * q;
        }
        (v, -self.k * q + force)
    }

    fn step(&mut self, s: &mut BathState, h: f64) {
        let n = self.w2.len();
        self.tx.copy_from_slice(&s.x);
        self.tv.copy_from_slice(&s.xdot);
        let (dq1, dv1) = self.deriv(s.q, s.qdot);
        self.ax.copy_from_slice(&self.kx);
        self.av.copy_from_slice(&self.kv);

        let mut dq = dq1;
        let mut dv = dv1;
        let (mut sq, mut sv) = (dq1, dv1);
        for (frac, weight) in [(0.5, 2.0), (0.5, 2.0), (1.0, 1.0)] {
            for j in 0..n {
                self.tx[j] = s.x[j] + frac * h * self.kx[j];
                self.tv[j] = s.xdot[j] + frac * h * self.kv[j];
            }
            let (q, v) = (s.q + frac * h * dq, s.qdot + frac * h * dv);
            (dq, dv) = self.deriv(q, v);
            sq += weight * dq;
            sv += weight * dv;
            for j in 0..n {
                self.ax[j] += weight * self.kx[j];
                self.av[j] += weight * self.kv[j];
            }
        }
        let c = h / 6.0;
        s.q += c * sq;
        s.qdot += c * sv;
        for j in 0..n {
            s.x[j] += c * self.ax[j];
            s.xdot[j] += c * self.av[j];
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrateOptions {
    /// Keep every `record_stride`-th step (1 keeps all).
    pub record_stride: usize,
    /// Mode indices whose displacement is recorded.
    pub record_modes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    /// Samples in increasing time, also for backward runs.
    pub trajectory: Trajectory,
    /// Discrete Hamiltonian at each recorded sample.
    pub energy: Vec<f64>,
    /// Largest `|H - H(t0)|` relative to the initial energy scale.
    pub max_relative_drift: f64,
    pub final_state: BathState,
}

fn step_plan(t_span: (f64, f64), dt: f64, omega_max: f64) -> Result<(usize, f64)> {
    let (t0, t1) = t_span;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter { field: "dt", reason: format!("must be > 0, got {dt}") });
    }
    if !t0.is_finite() || !t1.is_finite() || t0 == t1 {
        return Err(Error::InvalidParameter {
            field: "t_span",
            reason: format!("need a finite non-empty span, got [{t0}, {t1}]"),
        });
    }
    if dt * omega_max > MAX_STEP_PRODUCT * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("dt * omega_max = {} exceeds {MAX_STEP_PRODUCT}", dt * omega_max),
        });
    }
    let steps = ((t1 - t0).abs() / dt).round().max(1.0) as usize;
    Ok((steps, (t1 - t0) / steps as f64))
}

/// RK4 trajectory from `bath.state` at `t_span.0` to `t_span.1`; a
/// decreasing span integrates backward in time.
pub fn integrate(bath: &DiscreteBath, p: &OscillatorParams, t_span: (f64, f64), dt: f64) -> Result<OracleRun> {
    integrate_with(bath, p, t_span, dt, &IntegrateOptions { record_stride: 1, record_modes: Vec::new() })
}

pub fn integrate_with(
    bath: &DiscreteBath,
    p: &OscillatorParams,
    t_span: (f64, f64),
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<OracleRun> {
    let (steps, h) = step_plan(t_span, dt, bath.omega_max())?;
    if let Some(&j) = opts.record_modes.iter().find(|&&j| j >= bath.len()) {
        return Err(Error::InvalidParameter { field: "record_modes", reason: format!("mode {j} out of range") });
    }
    let stride = opts.record_stride.max(1);
    let mut stepper = Stepper::new(bath, p);
    let mut s = bath.state.clone();
    let (e0, scale) = energy_parts(&bath.frequencies, &bath.couplings, stepper.k, &s);

    let mut t = Vec::new();
    let mut q = Vec::new();
    let mut qdot = Vec::new();
    let mut energy = Vec::new();
    let mut modes: Vec<Vec<f64>> = vec![Vec::new(); opts.record_modes.len()];
    let mut max_drift: f64 = 0.0;
    let mut record = |i: usize, s: &BathState, e: f64| {
        t.push(t_span.0 + i as f64 * h);
        q.push(s.q);
        qdot.push(s.qdot);
        energy.push(e);
        for (m, &j) in modes.iter_mut().zip(&opts.record_modes) {
            m.push(s.x[j]);
        }
    };
    record(0, &s, e0);
    for i in 1..=steps {
        stepper.step(&mut s, h);
        let e = energy_parts(&bath.frequencies, &bath.couplings, stepper.k, &s).0;
        if scale > 0.0 {
            let drift = (e - e0).abs() / scale;
            max_drift = max_drift.max(drift);
            if drift > MAX_ENERGY_DRIFT || !e.is_finite() {
                return Err(Error::Unstable { drift, t: t_span.0 + i as f64 * h });
            }
        }
        if i % stride == 0 || i == steps {
            record(i, &s, e);
        }
    }
    if h < 0.0 {
        for v in [&mut t, &mut q, &mut qdot, &mut energy].into_iter().chain(modes.iter_mut()) {
            v.reverse();
        }
    }
    let mut trajectory = Trajectory { t, q, qdot, modes: Vec::new() };
    for (m, &j) in modes.into_iter().zip(&opts.record_modes) {
        trajectory = trajectory.with_mode(bath.frequencies[j], m)?;
    }
    Ok(OracleRun { trajectory, energy, max_relative_drift: max_drift, final_state: s })
}

/// Settings for [`thermal_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    /// `(N + 1/2)` occupations instead of classical equipartition.
    pub quantum: bool,
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
    /// Mean system displacement and velocity added to the thermal draw.
    pub q0: f64,
    pub qdot0: f64,
}

impl SampleOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self { quantum: true, t_end, dt, record_stride: 10, q0: 0.0, qdot0: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub omega0: f64,
    pub gamma: f64,
    pub temperature: f64,
    pub quantum: bool,
    pub n_modes: usize,
    pub omega_max: f64,
    pub dt: f64,
}

/// Ensemble moments on the recorded time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub params: EnsembleParams,
    pub seed: u64,
    pub n_samples: usize,
    pub t: Vec<f64>,
    pub q_mean: Vec<f64>,
    pub q2: Vec<f64>,
    pub qdot2: Vec<f64>,
}

impl EnsembleSummary {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Mean of `qdot2` over samples with `t >= t_from`.
    pub fn late_qdot2(&self, t_from: f64) -> f64 {
        let v: Vec<f64> = self.t.iter().zip(&self.qdot2).filter(|(t, _)| **t >= t_from).map(|(_, v)| *v).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

/// `(var x, var x')` of a free oscillator at frequency `omega` in equilibrium.
pub fn mode_variances(omega: f64, temperature: f64, quantum: bool) -> (f64, f64) {
    if quantum {
        let c = coth_half(omega, temperature);
        (c / (2.0 * omega), 0.5 * omega * c)
    } else {
        (temperature / (omega * omega), temperature)
    }
}

/// Monte-Carlo ensemble: the system and every bath mode start in
/// independent free-oscillator Gaussians at `temperature`, then evolve
/// under the coupled dynamics.
///
/// Member `i` draws from a ChaCha stream `(seed, i)`; results do not depend
/// on the thread count.
pub fn thermal_sample(
    bath: &DiscreteBath,
    p: &OscillatorParams,
    temperature: f64,
    n_samples: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<EnsembleSummary> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: format!("need at least 2, got {n_samples}"),
        });
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidParameter {
            field: "temperature",
            reason: format!("must be >= 0, got {temperature}"),
        });
    }
    let (steps, h) = step_plan((0.0, opts.t_end), opts.dt, bath.omega_max())?;
    let stride = opts.record_stride.max(1);
    let n_rec = steps / stride + 1;
    let sd_q = mode_variances(p.omega0, temperature, opts.quantum);
    let sd_x: Vec<(f64, f64)> =
        bath.frequencies.iter().map(|w| mode_variances(*w, temperature, opts.quantum)).collect();

    let member = |i: usize| -> Result<[Vec<f64>; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
        let q = opts.q0 + sd_q.0.sqrt() * z();
        let qdot = opts.qdot0 + sd_q.1.sqrt() * z();
        let mut x = Vec::with_capacity(bath.len());
        let mut xdot = Vec::with_capacity(bath.len());
        for (vx, vv) in &sd_x {
            x.push(vx.sqrt() * z());
            xdot.push(vv.sqrt() * z());
        }
        let mut s = BathState { q, qdot, x, xdot };
        let mut stepper = Stepper::new(bath, p);
        let (e0, scale) = energy_parts(&bath.frequencies, &bath.couplings, stepper.k, &s);
        let mut out = [Vec::with_capacity(n_rec), Vec::with_capacity(n_rec), Vec::with_capacity(n_rec)];
        let push = |out: &mut [Vec<f64>; 3], s: &BathState| {
            out[0].push(s.q);
            out[1].push(s.q * s.q);
            out[2].push(s.qdot * s.qdot);
        };
        push(&mut out, &s);
        for k in 1..=steps {
            stepper.step(&mut s, h);
            if k % stride == 0 {
                push(&mut out, &s);
            }
            if k % stride == 0 || k == steps {
                let e = energy_parts(&bath.frequencies, &bath.couplings, stepper.k, &s).0;
                let drift = if scale > 0.0 { (e - e0).abs() / scale } else { 0.0 };
                if drift > MAX_ENERGY_DRIFT || !e.is_finite() {
                    return Err(Error::Unstable { drift, t: k as f64 * h });
                }
            }
        }
        Ok(out)
    };

    let blocks: Vec<Result<[Vec<f64>; 3]>> = (0..n_samples.div_ceil(MEMBERS_PER_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = [vec![0.0; n_rec], vec![0.0; n_rec], vec![0.0; n_rec]];
            for i in b * MEMBERS_PER_BLOCK..((b + 1) * MEMBERS_PER_BLOCK).min(n_samples) {
                let m = member(i)?;
                for (a, v) in acc.iter_mut().zip(&m) {
                    for (x, y) in a.iter_mut().zip(v) {
                        *x += y;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [vec![0.0; n_rec], vec![0.0; n_rec], vec![0.0; n_rec]];
    for block in blocks {
        for (a, v) in total.iter_mut().zip(&block?) {
            for (x, y) in a.iter_mut().zip(v) {
                *x += y;
            }
        }
    }
    let inv = 1.0 / n_samples as f64;
    let [q_mean, q2, qdot2] = total.map(|v| v.into_iter().map(|x| x * inv).collect::<Vec<f64>>());
    Ok(EnsembleSummary {
        params: EnsembleParams {
            omega0: p.omega0,
            gamma: p.gamma,
            temperature,
            quantum: opts.quantum,
            n_modes: bath.len(),
            omega_max: bath.omega_max(),
            dt: h,
        },
        seed,
        n_samples,
        t: (0..n_rec).map(|r| r as f64 * stride as f64 * h).collect(),
        q_mean,
        q2,
        qdot2,
    })
}

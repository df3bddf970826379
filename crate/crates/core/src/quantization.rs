//! Eigenmode coefficients of the diagonalized Hamiltonian, numerical checks
//! of the commutation conditions, and coherent-state amplitudes.
//!
//! Only c-number coefficient fields and expectation values are represented.
//! With `h_q = 0` and `h_X = sqrt(1/(2 omega))` the system coefficient is
//! `f_q = h_X alpha G`, where `G = -1/(omega^2 - omega0^2 (1 - chi))`.
//! Couplings with a zero mode carry the regulated pole
//! `G = -omega / ((omega + i eta) D)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{diagonalizability, pv_kernel_integral, susceptibility, CouplingSpec, Diagonalizability};
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::io::fmt_f64;
use crate::model::{ConditionKind, OscillatorParams, ReservoirCondition};

/// Number of `(omega, omega')` pairs sampled for the off-diagonal check.
pub const DELTA_PAIRS: usize = 32;
/// Half-width of the low-frequency cutout, in units of `eta`.
pub const CUTOUT_ETAS: f64 = 10.0;
const PAIR_SEED: u64 = 0x5eed;

/// Coefficient fields on a spectral grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenmodeCoefficients {
    pub grid: SpectralGrid,
    pub f_q: Vec<Complex64>,
    pub h_x: Vec<f64>,
    pub g: Vec<Complex64>,
    pub alpha: Vec<f64>,
    /// Unimodular factor multiplying `h_X` (1 for the standard choice).
    pub phase: Vec<Complex64>,
    /// Additive `h_q` line (zero for the diagonalizing choice).
    pub h_q: Vec<f64>,
    /// `true` when `G` carries the `omega / (omega + i eta)` pole factor.
    pub regulated: bool,
    pub omega0: f64,
}

/// Builds the coefficients, rejecting couplings that fail the
/// diagonalizability condition.
pub fn build_coefficients(
    c: &CouplingSpec,
    p: &OscillatorParams,
    grid: &SpectralGrid,
) -> Result<EigenmodeCoefficients> {
    let report = diagonalizability(c, p)?;
    if report.verdict == Diagonalizability::Fails {
        return Err(Error::NotDiagonalizable { integral: report.zero_mode_integral, omega0_sq: p.omega0 * p.omega0 });
    }
    build_with(c, p, grid, report.verdict == Diagonalizability::ZeroModeBoundaryOK)
}

/// Same fields without the diagonalizability check. Used to show what goes
/// wrong for couplings outside the allowed class.
pub fn build_coefficients_unchecked(
    c: &CouplingSpec,
    p: &OscillatorParams,
    grid: &SpectralGrid,
) -> Result<EigenmodeCoefficients> {
    build_with(c, p, grid, false)
}

fn build_with(
    c: &CouplingSpec,
    p: &OscillatorParams,
    grid: &SpectralGrid,
    regulated: bool,
) -> Result<EigenmodeCoefficients> {
    if grid.nodes()[0] <= 0.0 {
        return Err(Error::InvalidParameter { field: "grid", reason: "nodes must be > 0".into() });
    }
    let eta = grid.eta();
    let w2 = p.omega0 * p.omega0;
    let rows = grid
        .nodes()
        .par_iter()
        .map(|&w| {
            let chi = susceptibility(c, p, w)?;
            let d = w * w - w2 * (1.0 - chi);
            let g = if regulated { -w / (Complex64::new(w, eta) * d) } else { -1.0 / d };
            Ok((c.alpha(w)?, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let (alpha, g): (Vec<f64>, Vec<Complex64>) = rows.into_iter().unzip();
    let n = grid.len();
    let h_x: Vec<f64> = grid.nodes().iter().map(|w| (0.5 / w).sqrt()).collect();
    let mut ec = EigenmodeCoefficients {
        grid: grid.clone(),
        f_q: vec![Complex64::new(0.0, 0.0); n],
        h_x,
        g,
        alpha,
        phase: vec![Complex64::new(1.0, 0.0); n],
        h_q: vec![0.0; n],
        regulated,
        omega0: p.omega0,
    };
    ec.refresh();
    Ok(ec)
}

impl EigenmodeCoefficients {
    fn refresh(&mut self) {
        for i in 0..self.grid.len() {
            self.f_q[i] = self.h_q[i] + self.phase[i] * self.h_x[i] * self.alpha[i] * self.g[i];
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `f_Pi_q = -i omega f_q`.
    pub fn f_pi_q(&self, i: usize) -> Complex64 {
        Complex64::new(0.0, -self.grid.nodes()[i]) * self.f_q[i]
    }

    /// Off-diagonal part of `f_X(omega', omega_i)`, `alpha(omega') f_q / (omega'^2 - omega^2)`.
    pub fn f_x(&self, c: &CouplingSpec, omega_prime: f64, i: usize) -> Result<Complex64> {
        let w = self.grid.nodes()[i];
        if omega_prime == w {
            return Err(Error::InvalidParameter { field: "omega", reason: "f_X is singular on the diagonal".into() });
        }
        Ok(c.alpha(omega_prime)? * self.f_q[i] / (omega_prime * omega_prime - w * w))
    }

    /// Multiplies `h_X` by `exp(i theta(omega))`.
    pub fn with_phases(mut self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.len() {
            return Err(Error::GridMismatch(format!("{} phases for {} nodes", theta.len(), self.len())));
        }
        self.phase = theta.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
        self.refresh();
        Ok(self)
    }

    /// Adds a normalized Gaussian line of the given width to `h_q`, standing
    /// in for a delta function.
    pub fn with_hq_line(mut self, center: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter { field: "width", reason: "must be > 0".into() });
        }
        let norm = amplitude / ((2.0 * PI).sqrt() * width);
        for (h, w) in self.h_q.iter_mut().zip(self.grid.nodes()) {
            let z = (w - center) / width;
            *h = norm * (-0.5 * z * z).exp();
        }
        self.refresh();
        Ok(self)
    }

    /// `G` without the pole factor, `-1/D`.
    pub fn g_bare(&self, i: usize) -> Complex64 {
        if self.regulated {
            let w = self.grid.nodes()[i];
            self.g[i] * Complex64::new(w, self.grid.eta()) / w
        } else {
            self.g[i]
        }
    }

    fn f_q_bare(&self, i: usize) -> Complex64 {
        self.h_q[i] + self.phase[i] * self.h_x[i] * self.alpha[i] * self.g_bare(i)
    }

    /// Largest relative deviation from `pi alpha^2 |G|^2 / (2 omega) = Im G`,
    /// using the unregulated Green function.
    pub fn imag_identity_residual(&self) -> f64 {
        let nodes = self.grid.nodes();
        (0..self.len())
            .map(|i| {
                let g = self.g_bare(i);
                let lhs = PI * self.alpha[i] * self.alpha[i] * g.norm_sqr() / (2.0 * nodes[i]);
                let scale = lhs.abs().max(g.im.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (lhs - g.im).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// Writes `omega,Re_fq,Im_fq,hX,Re_G,Im_G`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["omega", "Re_fq", "Im_fq", "hX", "Re_G", "Im_G"])?;
        for i in 0..self.len() {
            wr.write_record([
                fmt_f64(self.grid.nodes()[i]),
                fmt_f64(self.f_q[i].re),
                fmt_f64(self.f_q[i].im),
                fmt_f64(self.h_x[i]),
                fmt_f64(self.g[i].re),
                fmt_f64(self.g[i].im),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Outcome of [`verify_commutators`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// `int_0^inf 2 omega |f_q|^2 d omega`; equals 1 for a valid transformation.
    pub norm_integral: f64,
    /// Largest relative off-diagonal residual over the sampled pairs.
    pub delta_residual: f64,
    /// Contribution added beyond the last node.
    pub tail: f64,
    /// Contribution of the pole factor inside the cutout.
    pub pole_term: f64,
}

/// Checks the system commutator condition and the off-diagonal eigenmode
/// commutators.
///
/// The norm integrand is summed on the grid with the pole factor removed.
/// Inside `[0, 10 eta]` the factor `omega^2/(omega^2 + eta^2)` is applied
/// analytically to the low-frequency limit of the integrand. Beyond the last
/// node a power-law tail fitted to the last two nodes is added.
pub fn verify_commutators(ec: &EigenmodeCoefficients, c: &CouplingSpec) -> Result<CommutatorReport> {
    let nodes = ec.grid.nodes();
    let weights = ec.grid.weights();
    let eta = ec.grid.eta();
    let n = ec.len();
    let density: Vec<f64> = (0..n).map(|i| 2.0 * nodes[i] * ec.f_q_bare(i).norm_sqr()).collect();
    let mut norm: f64 = weights.iter().zip(&density).map(|(w, d)| w * d).sum();
    let (lo, hi) = ec.grid.span();
    norm += lo * density[0];

    let pole_term = if ec.regulated { -density[0] * eta * CUTOUT_ETAS.atan() } else { 0.0 };
    norm += pole_term;

    let tail = if hi.is_finite() && n >= 2 {
        let (w1, w2) = (nodes[n - 2], nodes[n - 1]);
        let (d1, d2) = (density[n - 2], density[n - 1]);
        if d2 == 0.0 {
            0.0
        } else {
            let power = -(d2 / d1).ln() / (w2 / w1).ln();
            if !(power > 1.0) {
                return Err(Error::Divergent(format!("norm integrand decays like omega^-{power}")));
            }
            d2 * hi / (power - 1.0) * (hi / w2).powf(-power)
        }
    } else {
        0.0
    };
    norm += tail;

    let delta_residual = off_diagonal_residual(ec, c)?;
    Ok(CommutatorReport { norm_integral: norm, delta_residual, tail, pole_term })
}

/// `K(omega) = P int alpha^2 / (xi^2 - omega^2) + i pi alpha^2 / (2 omega)` by quadrature.
fn kernel(c: &CouplingSpec, w: f64) -> Result<Complex64> {
    Ok(Complex64::new(pv_kernel_integral(c, w)?.value, PI * c.alpha_sq(w) / (2.0 * w)))
}

fn sample_pairs(ec: &EigenmodeCoefficients) -> Vec<(usize, usize)> {
    let nodes = ec.grid.nodes();
    let cut = CUTOUT_ETAS * ec.grid.eta();
    let first = nodes.partition_point(|w| *w < cut);
    let n = nodes.len();
    if n < first + 2 {
        return Vec::new();
    }
    let gap = 10.0 * (nodes[n - 1] - nodes[first]) / (n - first) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    let mut pairs = Vec::with_capacity(DELTA_PAIRS);
    let mut tries = 0;
    while pairs.len() < DELTA_PAIRS && tries < 100 * DELTA_PAIRS {
        tries += 1;
        let i = rng.random_range(first..n);
        let j = rng.random_range(first..n);
        if (nodes[i] - nodes[j]).abs() > gap {
            pairs.push((i, j));
        }
    }
    pairs
}

fn off_diagonal_residual(ec: &EigenmodeCoefficients, c: &CouplingSpec) -> Result<f64> {
    let nodes = ec.grid.nodes();
    let pairs = sample_pairs(ec);
    let res = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (w, v) = (nodes[i], nodes[j]);
            let (fw, fv) = (ec.f_q_bare(i), ec.f_q_bare(j));
            let (hw, hv) = (ec.phase[i] * ec.h_x[i], ec.phase[j] * ec.h_x[j]);
            let (aw, av) = (ec.alpha[i], ec.alpha[j]);
            let diff = v * v - w * w;
            let overlap = (kernel(c, v)? - kernel(c, w)?.conj()) / diff;
            let terms =
                [fw.conj() * fv, fw.conj() * fv * overlap, -hw.conj() * aw * fv / diff, hv * av * fw.conj() / diff];
            let sum: Complex64 = terms.iter().sum();
            let scale: f64 = terms.iter().map(|t| t.norm()).sum();
            Ok(if scale == 0.0 { 0.0 } else { sum.norm() / scale })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Residuals of the frequency-domain equations satisfied by the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEquationResiduals {
    /// `(omega^2 - omega0^2) f_q + int alpha f_X`, relative to `alpha h_X`.
    pub system: f64,
    /// `(omega^2 - omega'^2) f_X(omega', omega) + alpha(omega') f_q`, relative.
    pub reservoir: f64,
}

/// Evaluates both frequency equations at up to `samples` nodes, with the
/// reservoir integral done by principal-value quadrature.
pub fn frequency_equation_residuals(
    ec: &EigenmodeCoefficients,
    c: &CouplingSpec,
    samples: usize,
) -> Result<FrequencyEquationResiduals> {
    let nodes = ec.grid.nodes();
    let cut = CUTOUT_ETAS * ec.grid.eta();
    let first = nodes.partition_point(|w| *w < cut);
    let stride = ((ec.len() - first) / samples.max(1)).max(1);
    let idx: Vec<usize> = (first..ec.len()).step_by(stride).collect();
    let w2 = ec.omega0 * ec.omega0;
    let system = idx
        .par_iter()
        .map(|&i| {
            let w = nodes[i];
            let f = ec.f_q_bare(i);
            let source = ec.phase[i] * ec.h_x[i] * ec.alpha[i];
            let r = (w * w - w2) * f + source + kernel(c, w)? * f;
            Ok(if source.norm() == 0.0 { r.norm() } else { r.norm() / source.norm() })
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut reservoir: f64 = 0.0;
    for &(i, j) in &sample_pairs(ec) {
        let (w, v) = (nodes[i], nodes[j]);
        let fx = ec.f_x(c, v, i)?;
        let r = (w * w - v * v) * fx + ec.alpha[j] * ec.f_q[i];
        let scale = (ec.alpha[j] * ec.f_q[i]).norm();
        if scale > 0.0 {
            reservoir = reservoir.max(r.norm() / scale);
        }
    }
    Ok(FrequencyEquationResiduals { system, reservoir })
}

/// Coherent-state amplitude `C(omega)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude {
    pub grid: SpectralGrid,
    pub c: Vec<Complex64>,
}

/// `C = -sqrt(omega/2) (A + i B)` from asymptotic reservoir data. The
/// zero-mode displacement has no eigenmode and is not represented.
pub fn coherent_amplitude(rc: &ReservoirCondition) -> Result<CoherentAmplitude> {
    if rc.kind != ConditionKind::Asymptotic {
        return Err(Error::WrongConditionKind { expected: "asymptotic" });
    }
    rc.validate()?;
    let c = rc
        .grid
        .nodes()
        .iter()
        .zip(rc.displacement.iter().zip(&rc.velocity))
        .map(|(w, (a, b))| -(0.5 * w).sqrt() * Complex64::new(*a, *b))
        .collect();
    Ok(CoherentAmplitude { grid: rc.grid.clone(), c })
}

impl CoherentAmplitude {
    /// `<Phi_omega(t)> = sqrt(1/(2 omega)) (C e^{-i omega t} + c.c.)` at node `i`.
    pub fn mode_displacement(&self, i: usize, t: f64) -> f64 {
        let w = self.grid.nodes()[i];
        2.0 * (0.5 / w).sqrt() * (self.c[i] * Complex64::from_polar(1.0, -w * t)).re
    }
}

/// `<q(t)>` in the coherent state, assembled as `2 Re int f_q C e^{-i omega t}`.
///
/// `C` is taken relative to the standard phase of `h_X`, so rephased
/// coefficients give the same expectation value. The mode expansion carries
/// an overall factor -1 relative to the printed amplitude, so that the
/// result coincides with the classical motion driven by the same `(A, B)`.
pub fn q_expectation_from_coherent(ca: &CoherentAmplitude, ec: &EigenmodeCoefficients, t: f64) -> Result<f64> {
    if !ca.grid.same_nodes(&ec.grid, 1e-12) {
        return Err(Error::GridMismatch("coherent amplitude and coefficients use different grids".into()));
    }
    let nodes = ec.grid.nodes();
    let weights = ec.grid.weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..ec.len() {
        let f = ec.f_q[i] * ec.phase[i].conj();
        acc += weights[i] * f * ca.c[i] * Complex64::from_polar(1.0, -nodes[i] * t);
    }
    Ok(-2.0 * acc.re)
}

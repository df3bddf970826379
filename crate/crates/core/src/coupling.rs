//! Coupling functions, principal-value kernel integrals, the effective
//! susceptibility, and the zero-mode and diagonalizability conditions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{pv_inverse_square_sampled, SpectralGrid};
use crate::model::OscillatorParams;
use crate::quad::{integrate_half_line, pv_inverse_square, QuadOptions};

/// Shape of the coupling function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CouplingKind {
    /// `alpha(w) = omega0 w sqrt(2 gamma / (pi (w^2 + gamma^2)))`, which
    /// yields friction proportional to velocity.
    OhmicVelocity { params: OscillatorParams },
    /// Linear interpolation of samples `alpha >= 0` on increasing `omega >= 0`.
    Tabulated { omega: Vec<f64>, alpha: Vec<f64> },
}

/// A coupling function with an overall multiplier on the spectral weight
/// `alpha^2`. A multiplier of `1/2` halves `int alpha^2 / w^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub kind: CouplingKind,
    pub weight: f64,
}

impl CouplingSpec {
    pub fn ohmic(params: OscillatorParams) -> Self {
        Self { kind: CouplingKind::OhmicVelocity { params }, weight: 1.0 }
    }

    pub fn tabulated(omega: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if omega.len() < 2 || omega.len() != alpha.len() {
            return Err(Error::InvalidParameter {
                field: "coupling",
                reason: "need at least two (omega, alpha) samples of equal length".into(),
            });
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) || !omega.iter().all(|w| w.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "coupling",
                reason: "omega must be finite, >= 0 and strictly increasing".into(),
            });
        }
        if alpha.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter { field: "coupling", reason: "alpha must be finite and >= 0".into() });
        }
        Ok(Self { kind: CouplingKind::Tabulated { omega, alpha }, weight: 1.0 })
    }

    pub fn from_grid(grid: &SpectralGrid, alpha: Vec<f64>) -> Result<Self> {
        Self::tabulated(grid.nodes().to_vec(), alpha)
    }

    /// Same shape with `alpha^2` multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.weight *= factor;
        self
    }

    pub fn ohmic_params(&self) -> Option<OscillatorParams> {
        match &self.kind {
            CouplingKind::OhmicVelocity { params } => Some(*params),
            CouplingKind::Tabulated { .. } => None,
        }
    }

    /// `alpha(omega)`; tabulated couplings reject queries outside the table.
    pub fn alpha(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::InvalidParameter { field: "omega", reason: format!("must be >= 0, got {omega}") });
        }
        if let CouplingKind::Tabulated { omega: x, .. } = &self.kind {
            let (lo, hi) = (x[0], x[x.len() - 1]);
            if omega < lo || omega > hi {
                return Err(Error::OutOfGrid { omega, lo, hi });
            }
        }
        Ok(self.alpha_extended(omega))
    }

    /// `alpha^2(|omega|)` with the extension used inside integrals: tabulated
    /// values fall linearly to zero below the table and stay constant above it.
    pub fn alpha_sq(&self, omega: f64) -> f64 {
        let w = omega.abs();
        let raw = match &self.kind {
            CouplingKind::OhmicVelocity { params } => {
                let (w0, g) = (params.omega0, params.gamma);
                if g == 0.0 {
                    0.0
                } else {
                    2.0 * g * w0 * w0 * w * w / (PI * (w * w + g * g))
                }
            }
            CouplingKind::Tabulated { omega: x, alpha } => {
                let a = interp_extended(x, alpha, w);
                a * a
            }
        };
        self.weight * raw
    }

    /// `alpha(|omega|)` with the integration extension.
    pub fn alpha_extended(&self, omega: f64) -> f64 {
        self.alpha_sq(omega).sqrt()
    }

    /// Characteristic frequencies used to place quadrature break points.
    pub fn scales(&self) -> Vec<f64> {
        match &self.kind {
            CouplingKind::OhmicVelocity { params } => {
                let mut s = vec![params.gamma, params.omega0];
                s.retain(|v| *v > 0.0);
                s.sort_by(f64::total_cmp);
                s
            }
            CouplingKind::Tabulated { omega, .. } => omega.iter().copied().filter(|w| *w > 0.0).collect(),
        }
    }

    /// Upper end of the tabulated support, or infinity.
    pub fn support_end(&self) -> f64 {
        match &self.kind {
            CouplingKind::OhmicVelocity { .. } => f64::INFINITY,
            CouplingKind::Tabulated { omega, .. } => omega[omega.len() - 1],
        }
    }

    /// `int_0^inf f(xi) alpha^2(xi) d xi`, splitting at the coupling scales.
    pub(crate) fn integrate_weighted<F: Fn(f64) -> f64>(&self, f: F, extra: &[f64], opts: QuadOptions) -> Result<f64> {
        let mut scales = self.scales();
        scales.extend(extra.iter().copied().filter(|v| *v > 0.0 && v.is_finite()));
        scales.sort_by(f64::total_cmp);
        scales.dedup();
        let opts = QuadOptions { max_intervals: opts.max_intervals + scales.len(), ..opts };
        Ok(integrate_half_line(|x| self.alpha_sq(x) * f(x), &scales, opts)?.value)
    }
}

fn interp_extended(x: &[f64], y: &[f64], w: f64) -> f64 {
    let n = x.len();
    if w <= x[0] {
        return if x[0] > 0.0 { y[0] * w / x[0] } else { y[0] };
    }
    if w >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|v| *v <= w);
    let (x0, x1) = (x[i - 1], x[i]);
    let s = (w - x0) / (x1 - x0);
    y[i - 1] + s * (y[i] - y[i - 1])
}

/// Principal-value kernel integral with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegral {
    pub value: f64,
    /// Analytic contribution beyond the cutoff (alpha^2 held constant).
    pub tail: f64,
    pub error: f64,
    /// Closed form for the Ohmic kind.
    pub closed_form: Option<f64>,
}

/// `gamma^2 omega0^2 / (omega^2 + gamma^2)` for the Ohmic coupling with the given weight.
pub fn pv_kernel_closed_form(p: &OscillatorParams, weight: f64, omega: f64) -> f64 {
    let g2 = p.gamma * p.gamma;
    if g2 == 0.0 {
        return 0.0;
    }
    weight * g2 * p.omega0 * p.omega0 / (omega * omega + g2)
}

/// `P int_0^inf alpha^2(xi) / (xi^2 - omega^2) d xi` by pole subtraction.
pub fn pv_kernel_integral(c: &CouplingSpec, omega: f64) -> Result<KernelIntegral> {
    let w = omega.abs();
    let closed_form = c.ohmic_params().map(|p| pv_kernel_closed_form(&p, c.weight, w));
    let opts = QuadOptions::with_tol(1e-14, 1e-12);
    let scales = c.scales();
    if w == 0.0 {
        let v = c.integrate_weighted(|x| 1.0 / (x * x), &[], opts)?;
        if !v.is_finite() {
            return Err(Error::Divergent("alpha^2 / omega^2 is not integrable at 0".into()));
        }
        return Ok(KernelIntegral { value: v, tail: 0.0, error: 0.0, closed_form });
    }
    let top = scales.iter().copied().fold(w, f64::max);
    let cutoff = if c.support_end().is_finite() { c.support_end().max(2.0 * w) * 1.0 } else { 1e4 * top };
    let cutoff = if cutoff <= w { 2.0 * w } else { cutoff };
    let opts = QuadOptions { max_intervals: 4000 + scales.len(), ..opts };
    let r = pv_inverse_square(|x| c.alpha_sq(x), w, cutoff, &scales, opts)?;
    if !r.value.is_finite() {
        return Err(Error::Divergent("kernel tail does not converge".into()));
    }
    Ok(KernelIntegral { value: r.value, tail: r.tail, error: r.error, closed_form })
}

/// Effective susceptibility on a frequency list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
    pub closed_form: bool,
}

impl Susceptibility {
    /// Evaluates `susceptibility` at each frequency, in parallel.
    pub fn evaluate(c: &CouplingSpec, p: &OscillatorParams, omega: Vec<f64>) -> Result<Self> {
        let values = omega.par_iter().map(|&w| susceptibility(c, p, w)).collect::<Result<Vec<_>>>()?;
        Ok(Self { omega, values, closed_form: c.ohmic_params().is_some() })
    }

    /// The Ohmic closed form on a frequency list.
    pub fn ohmic(p: &OscillatorParams, omega: Vec<f64>) -> Self {
        let values = omega.iter().map(|&w| ohmic_susceptibility(p, 1.0, p.omega0, w)).collect();
        Self { omega, values, closed_form: true }
    }
}

/// `weight * (omega_c^2/omega0^2) * gamma_c / (gamma_c - i omega)` for an
/// Ohmic coupling built from `(omega_c, gamma_c)`.
fn ohmic_susceptibility(cp: &OscillatorParams, weight: f64, omega0: f64, omega: f64) -> Complex64 {
    if cp.gamma == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = weight * cp.omega0 * cp.omega0 / (omega0 * omega0);
    Complex64::new(r * cp.gamma, 0.0) / Complex64::new(cp.gamma, -omega)
}

/// `chi(omega)` with `omega0^2 chi = P int alpha^2/(xi^2 - w^2) + i pi alpha^2(w)/(2w)`.
/// The Ohmic kind returns the exact closed form; negative frequencies use
/// `chi(-w) = conj(chi(w))`.
pub fn susceptibility(c: &CouplingSpec, p: &OscillatorParams, omega: f64) -> Result<Complex64> {
    if let Some(cp) = c.ohmic_params() {
        return Ok(ohmic_susceptibility(&cp, c.weight, p.omega0, omega));
    }
    susceptibility_quadrature(c, p, omega)
}

/// `chi(omega)` from the defining principal-value integral for any kind.
pub fn susceptibility_quadrature(c: &CouplingSpec, p: &OscillatorParams, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        return Err(Error::InvalidParameter { field: "omega", reason: "must be non-zero".into() });
    }
    let w = omega.abs();
    let re = pv_kernel_integral(c, w)?.value;
    let im = PI * c.alpha_sq(w) / (2.0 * w);
    let chi = Complex64::new(re, im) / (p.omega0 * p.omega0);
    Ok(if omega < 0.0 { chi.conj() } else { chi })
}

/// Outcome of a Kramers-Kronig reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KramersKronigReport {
    /// Largest `|Re chi - H[Im chi]|` over interior nodes.
    pub max_abs_error: f64,
    pub omega_at_max: f64,
    /// Largest analytic tail correction added beyond the grid.
    pub max_tail_correction: f64,
    /// Set when the tail correction exceeds the mismatch: the grid is too
    /// short for the reported error to be meaningful.
    pub tail_dominated: bool,
}

/// Reconstructs `Re chi(w) = (2/pi) P int xi Im chi(xi) / (xi^2 - w^2)` from
/// the imaginary part and compares with the stored real part.
pub fn kramers_kronig_check(s: &Susceptibility, grid: &SpectralGrid) -> Result<KramersKronigReport> {
    let nodes = grid.nodes();
    if s.omega.len() != nodes.len()
        || s.omega.iter().zip(nodes).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300))
    {
        return Err(Error::GridMismatch("susceptibility and grid nodes differ".into()));
    }
    let f: Vec<f64> = nodes.iter().zip(&s.values).map(|(x, v)| x * v.im).collect();
    let n = nodes.len();
    let interior: Vec<usize> = (1..n.saturating_sub(1)).filter(|&k| nodes[k] > 0.0).collect();
    let results: Vec<(f64, f64, f64)> = interior
        .par_iter()
        .map(|&k| {
            let (pv, tail) = pv_inverse_square_sampled(grid, &f, nodes[k]);
            let recon = 2.0 / PI * pv;
            ((recon - s.values[k].re).abs(), nodes[k], (2.0 / PI * tail).abs())
        })
        .collect();
    let mut rep = KramersKronigReport {
        max_abs_error: 0.0,
        omega_at_max: f64::NAN,
        max_tail_correction: 0.0,
        tail_dominated: false,
    };
    for (e, w, t) in results {
        if e > rep.max_abs_error || rep.omega_at_max.is_nan() {
            rep.max_abs_error = e;
            rep.omega_at_max = w;
        }
        rep.max_tail_correction = rep.max_tail_correction.max(t);
    }
    rep.tail_dominated = rep.max_tail_correction > rep.max_abs_error && rep.max_abs_error > 0.0;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeReport {
    /// `int_0^inf alpha^2 / omega^2`.
    pub integral: f64,
    pub satisfied: bool,
}

/// Checks `omega0^2 = int alpha^2/omega^2` to relative tolerance `tol`.
pub fn zero_mode_condition(c: &CouplingSpec, p: &OscillatorParams, tol: f64) -> Result<ZeroModeReport> {
    let integral = zero_mode_integral(c)?;
    let w2 = p.omega0 * p.omega0;
    Ok(ZeroModeReport { integral, satisfied: (integral - w2).abs() <= tol * w2 })
}

fn zero_mode_integral(c: &CouplingSpec) -> Result<f64> {
    if let CouplingKind::Tabulated { omega, alpha } = &c.kind {
        if omega[0] == 0.0 && alpha[0] > 0.0 {
            return Err(Error::Divergent("alpha(0) > 0 makes alpha^2/omega^2 non-integrable".into()));
        }
    }
    let v = c.integrate_weighted(|x| 1.0 / (x * x), &[], QuadOptions::with_tol(1e-15, 1e-13))?;
    if !v.is_finite() {
        return Err(Error::Divergent("alpha^2/omega^2 integral diverges".into()));
    }
    Ok(v)
}

/// `omega0^2 + k^2 - int alpha^2/(xi^2 + k^2)`, evaluated in the
/// cancellation-free form `(omega0^2 - Z) + k^2 + k^2 int alpha^2/(xi^2 (xi^2 + k^2))`
/// with `Z = int alpha^2/xi^2`.
pub fn imaginary_axis_denominator(c: &CouplingSpec, p: &OscillatorParams, kappa: f64) -> Result<f64> {
    let z = zero_mode_integral(c)?;
    denominator_with(c, p, z, kappa)
}

fn denominator_with(c: &CouplingSpec, p: &OscillatorParams, z: f64, kappa: f64) -> Result<f64> {
    let k2 = kappa * kappa;
    let inner = if kappa > 0.0 {
        c.integrate_weighted(|x| 1.0 / (x * x * (x * x + k2)), &[kappa], QuadOptions::with_tol(1e-300, 1e-13))?
    } else {
        0.0
    };
    Ok((p.omega0 * p.omega0 - z) + k2 + k2 * inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagonalizability {
    /// `omega0^2 > int alpha^2/omega^2`.
    StrictlyBelow,
    /// Equality, with the imaginary-axis denominator vanishing no faster than linearly.
    ZeroModeBoundaryOK,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizabilityReport {
    pub verdict: Diagonalizability,
    pub zero_mode_integral: f64,
    /// Log-log slope of the denominator over `kappa in [1e-4, 1e-2] * scale`.
    pub kappa_exponent_estimate: Option<f64>,
}

/// Relative tolerance for deciding that the zero-mode integral equals `omega0^2`.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Largest fitted exponent accepted on the boundary.
pub const MAX_BOUNDARY_EXPONENT: f64 = 1.1;

/// Classifies the coupling against the diagonalizability condition.
pub fn diagonalizability(c: &CouplingSpec, p: &OscillatorParams) -> Result<DiagonalizabilityReport> {
    let z = zero_mode_integral(c)?;
    let w2 = p.omega0 * p.omega0;
    let gap = w2 - z;
    let scale = c.ohmic_params().map(|q| q.gamma).filter(|g| *g > 0.0).unwrap_or(if p.gamma > 0.0 {
        p.gamma
    } else {
        p.omega0
    });
    let kappas: Vec<f64> = (0..9).map(|i| scale * 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
    let ds = kappas.iter().map(|&k| denominator_with(c, p, z, k)).collect::<Result<Vec<_>>>()?;
    let all_positive = ds.iter().all(|d| *d > 0.0 && d.is_finite());
    let exponent = if all_positive { Some(log_log_slope(&kappas, &ds)) } else { None };

    let verdict = if gap > BOUNDARY_TOL * w2 {
        Diagonalizability::StrictlyBelow
    } else if gap < -BOUNDARY_TOL * w2 {
        Diagonalizability::Fails
    } else {
        let noise = 1e-13 * w2;
        if ds.iter().any(|d| d.abs() <= noise) {
            return Err(Error::FitDegenerate(format!("denominator below numerical noise {noise:e}")));
        }
        match exponent {
            Some(n) if n <= MAX_BOUNDARY_EXPONENT => Diagonalizability::ZeroModeBoundaryOK,
            _ => Diagonalizability::Fails,
        }
    };
    Ok(DiagonalizabilityReport { verdict, zero_mode_integral: z, kappa_exponent_estimate: exponent })
}

fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> OscillatorParams {
        OscillatorParams::new(3.0, 1.0).unwrap()
    }

    #[test]
    fn ohmic_alpha_values() {
        let c = CouplingSpec::ohmic(fig1());
        assert_eq!(c.alpha(0.0).unwrap(), 0.0);
        assert_relative_eq!(c.alpha(1.0).unwrap(), 3.0 * (1.0 / PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.alpha(1e9).unwrap(), 3.0 * (2.0 / PI).sqrt(), max_relative = 1e-12);
        assert!(c.alpha(-1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_rejects_outside() {
        let c = CouplingSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_relative_eq!(c.alpha(1.5).unwrap(), 2.0);
        assert!(matches!(c.alpha(2.5), Err(Error::OutOfGrid { .. })));
        assert!(CouplingSpec::tabulated(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn pv_kernel_matches_closed_form() {
        let c = CouplingSpec::ohmic(fig1());
        let r = pv_kernel_integral(&c, 2.0).unwrap();
        let exact = 9.0 / 5.0;
        assert_relative_eq!(r.closed_form.unwrap(), exact, max_relative = 1e-15);
        assert_relative_eq!(r.value, exact, max_relative = 1e-8);
    }

    #[test]
    fn ohmic_susceptibility_examples() {
        let p = OscillatorParams::new(1.0, 1.0).unwrap();
        let c = CouplingSpec::ohmic(p);
        let chi = susceptibility(&c, &p, 1.0).unwrap();
        assert_relative_eq!(chi.re, 0.5, max_relative = 1e-15);
        assert_relative_eq!(chi.im, 0.5, max_relative = 1e-15);
        let q = susceptibility_quadrature(&c, &p, 1.0).unwrap();
        assert!((q - chi).norm() < 1e-6);
        let low = susceptibility(&c, &p, 1e-8).unwrap();
        assert!((low - Complex64::new(1.0, 0.0)).norm() < 1e-7);
        assert!(susceptibility(&c, &p, 1e9).unwrap().norm() < 1e-8);
    }

    #[test]
    fn zero_mode_examples() {
        let p = fig1();
        let r = zero_mode_condition(&CouplingSpec::ohmic(p), &p, 1e-8).unwrap();
        assert_relative_eq!(r.integral, 9.0, max_relative = 1e-10);
        assert!(r.satisfied);
        let half = zero_mode_condition(&CouplingSpec::ohmic(p).scaled(0.5), &p, 1e-8).unwrap();
        assert_relative_eq!(half.integral, 4.5, max_relative = 1e-10);
        assert!(!half.satisfied);
        let none = zero_mode_condition(&CouplingSpec::ohmic(p).scaled(0.0), &p, 1e-8).unwrap();
        assert_eq!(none.integral, 0.0);
        assert!(!none.satisfied);
    }

    #[test]
    fn divergent_zero_mode_integral_is_reported() {
        let c = CouplingSpec::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(zero_mode_condition(&c, &fig1(), 1e-8), Err(Error::Divergent(_))));
    }

    #[test]
    fn denominator_matches_ohmic_closed_form() {
        let p = fig1();
        let c = CouplingSpec::ohmic(p);
        for k in [1e-4, 1e-2, 0.3, 5.0] {
            let d = imaginary_axis_denominator(&c, &p, k).unwrap();
            let exact = k * k + 9.0 * k / (1.0 + k);
            assert_relative_eq!(d, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn diagonalizability_examples() {
        let p = fig1();
        let r = diagonalizability(&CouplingSpec::ohmic(p), &p).unwrap();
        assert_eq!(r.verdict, Diagonalizability::ZeroModeBoundaryOK);
        assert!((r.kappa_exponent_estimate.unwrap() - 1.0).abs() < 0.1);
        let half = diagonalizability(&CouplingSpec::ohmic(p).scaled(0.5), &p).unwrap();
        assert_eq!(half.verdict, Diagonalizability::StrictlyBelow);
        let double = diagonalizability(&CouplingSpec::ohmic(p).scaled(2.0), &p).unwrap();
        assert_eq!(double.verdict, Diagonalizability::Fails);
    }

    #[test]
    fn kramers_kronig_trivial_cases() {
        let g = SpectralGrid::trapezoid(0.0, 10.0, 101, 1e-4).unwrap();
        let zero = Susceptibility {
            omega: g.nodes().to_vec(),
            values: vec![Complex64::new(0.0, 0.0); 101],
            closed_form: false,
        };
        assert_eq!(kramers_kronig_check(&zero, &g).unwrap().max_abs_error, 0.0);
    }
}

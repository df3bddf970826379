//! Residuals of the Ohmic equations of motion, evaluated by quadrature.
//!
//! Delta sources are tested against a Gaussian of width `sigma`: a kink at
//! `k` with slope jump `dj` and value jump `vj` contributes
//! `dj phi(t - k) + vj phi'(t - k)` to the mollified second derivative.

use std::f64::consts::PI;

use super::green::{GreenFunctionRetarded, GreenFunctionTwoSided};
use super::homogeneous::q_homogeneous_derivs;
use crate::error::Result;
use crate::model::OscillatorParams;
use crate::quad::{gauss_legendre, integrate_breaks, QuadOptions};

const MEMORY_OPTS: QuadOptions = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 };
const MOLLIFIER_HALF_WIDTH: f64 = 8.0;
const MOLLIFIER_NODES: usize = 24;
const KINK_EPS: f64 = 1e-11;

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

fn gaussian_prime(x: f64, sigma: f64) -> f64 {
    -x / (sigma * sigma) * gaussian(x, sigma)
}

/// `int_lo^hi f(s) exp(-gamma |t - s|) ds`, oriented, with extra break points.
fn memory<F: Fn(f64) -> f64>(f: F, gamma: f64, t: f64, lo: f64, hi: f64, kinks: &[f64]) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let (a, b, sign) = if lo < hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
    let mut breaks = vec![a, b];
    breaks.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    breaks.sort_by(f64::total_cmp);
    let v = integrate_breaks(|s| f(s) * (-gamma * (t - s).abs()).exp(), &breaks, MEMORY_OPTS)?;
    Ok(sign * v.value)
}

/// Mollified residual: the smooth pointwise residual convolved with the
/// Gaussian, plus kink contributions `(k, value_jump, slope_jump)`.
fn mollify<S: Fn(f64) -> Result<f64>>(smooth: S, t: f64, sigma: f64, kinks: &[(f64, f64, f64)]) -> Result<f64> {
    let (x, w) = gauss_legendre(MOLLIFIER_NODES);
    let lo = t - MOLLIFIER_HALF_WIDTH * sigma;
    let hi = t + MOLLIFIER_HALF_WIDTH * sigma;
    let mut breaks = vec![lo, hi];
    breaks.extend(kinks.iter().map(|k| k.0).filter(|k| *k > lo && *k < hi));
    breaks.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let half = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            let s = a + half * (xi + 1.0);
            total += half * wi * smooth(s)? * gaussian(t - s, sigma);
        }
    }
    for &(k, vj, dj) in kinks {
        total += dj * gaussian(t - k, sigma) + vj * gaussian_prime(t - k, sigma);
    }
    Ok(total)
}

fn jumps<D: Fn(f64) -> [f64; 3]>(d: D, k: f64) -> (f64, f64) {
    // One-sided limits extrapolated linearly back to `k`.
    let lo = d(k - KINK_EPS);
    let hi = d(k + KINK_EPS);
    let vj = hi[0] - lo[0] - KINK_EPS * (hi[1] + lo[1]);
    let dj = hi[1] - lo[1] - KINK_EPS * (hi[2] + lo[2]);
    (vj, dj)
}

/// Residual of `G'' + omega0^2 G - gamma omega0^2 int_{-inf}^t G(s) e^{-gamma(t-s)} ds - delta(t)`
/// at `t`, with the delta mollified to width `sigma`.
pub fn retarded_residual(p: &OscillatorParams, t: f64, sigma: f64) -> Result<f64> {
    let g = GreenFunctionRetarded::new(*p, 0.0);
    let w2 = p.omega0 * p.omega0;
    let smooth = |s: f64| -> Result<f64> {
        let [v, _, dd] = g.derivs(s);
        let mem = if s > 0.0 { memory(|u| g.value(u), p.gamma, s, 0.0, s, &[])? } else { 0.0 };
        Ok(dd + w2 * v - p.gamma * w2 * mem)
    };
    let (vj, dj) = jumps(|s| g.derivs(s), 0.0);
    mollify(smooth, t, sigma, &[(0.0, vj, dj - 1.0)])
}

/// Residual of the two-sided Green function equation with memory from
/// `t = 0` and source at `t0`.
pub fn two_sided_residual(p: &OscillatorParams, t0: f64, t: f64, sigma: f64) -> Result<f64> {
    let g = GreenFunctionTwoSided::new(*p, 0.0);
    let w2 = p.omega0 * p.omega0;
    let smooth = |s: f64| -> Result<f64> {
        let [v, _, dd] = g.derivs(s, t0);
        let mem = memory(|u| g.value(u, t0), p.gamma, s, 0.0, s, &[t0])?;
        let sgn = if s < 0.0 { -1.0 } else { 1.0 };
        Ok(dd + w2 * v - sgn * p.gamma * w2 * mem)
    };
    let (v0, d0) = jumps(|s| g.derivs(s, t0), 0.0);
    let (vs, ds) = jumps(|s| g.derivs(s, t0), t0);
    let kinks = if t0 == 0.0 { vec![(0.0, v0, d0 - 1.0)] } else { vec![(0.0, v0, d0), (t0, vs, ds - 1.0)] };
    mollify(smooth, t, sigma, &kinks)
}

/// Pointwise residual of the source-free memory equation with lower limit
/// at `t = 0` for the symmetric damped solution.
pub fn memory_residual_homogeneous(p: &OscillatorParams, b: f64, t: f64) -> Result<f64> {
    let [q, _, qdd] = q_homogeneous_derivs(p, b, t);
    let mem = memory(|u| q_homogeneous_derivs(p, b, u)[0], p.gamma, t, 0.0, t, &[])?;
    let sgn = if t < 0.0 { -1.0 } else { 1.0 };
    Ok(qdd + p.omega0 * p.omega0 * q - sgn * p.gamma * p.omega0 * p.omega0 * mem)
}

/// `q'' + sgn(t) gamma q' + omega0^2 q` for the symmetric damped solution.
pub fn ode_residual_homogeneous(p: &OscillatorParams, b: f64, t: f64) -> f64 {
    let [q, dq, ddq] = q_homogeneous_derivs(p, b, t);
    let sgn = if t < 0.0 { -1.0 } else { 1.0 };
    ddq + sgn * p.gamma * dq + p.omega0 * p.omega0 * q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> OscillatorParams {
        OscillatorParams::new(3.0, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_solution_has_no_residual() {
        for (w0, g) in [(3.0, 1.0), (1.0, 2.0), (1.0, 5.0)] {
            let p = OscillatorParams::new(w0, g).unwrap();
            for t in [-3.0, -0.5, 0.2, 2.5] {
                assert!(ode_residual_homogeneous(&p, 1.0, t).abs() < 1e-10);
                assert!(memory_residual_homogeneous(&p, 1.0, t).unwrap().abs() < 1e-7);
            }
        }
    }

    #[test]
    fn retarded_residual_small() {
        let p = fig1();
        let sigma = 1e-3 / p.omega0;
        for t in [-0.5, -sigma, 0.0, sigma, 0.3, 2.0] {
            let r = retarded_residual(&p, t, sigma).unwrap();
            assert!(r.abs() < 1e-6, "t={t} r={r}");
        }
    }

    #[test]
    fn two_sided_residual_small() {
        let p = fig1();
        let sigma = 1e-3 / p.omega0;
        for t0 in [0.7, -0.6] {
            for t in [-1.0, 0.0, 0.5 * t0, t0 - sigma, t0, t0 + 2.0 * sigma, 2.0] {
                let r = two_sided_residual(&p, t0, t, sigma).unwrap();
                assert!(r.abs() < 1e-6, "t0={t0} t={t} r={r}");
            }
        }
    }
}

//! Retarded and two-sided Green functions of the Ohmic memory equations.
//!
//! Time forms are written with the shared damped kernel so that the
//! under-, critically and overdamped regimes use one expression.

use num_complex::Complex64;

use super::homogeneous::{q_homogeneous_derivs, q_homogeneous_spectrum, resonance_denominator};
use super::kernel::Kernel;
use crate::model::OscillatorParams;

/// Causal Green function of the memory equation with lower limit at the
/// infinite past. `eta` regulates the zero-frequency pole; the time form
/// carries the plateau `gamma/omega0^2 * exp(-eta t)`.
#[derive(Debug, Clone, Copy)]
pub struct GreenFunctionRetarded {
    pub p: OscillatorParams,
    pub eta: f64,
}

impl GreenFunctionRetarded {
    pub fn new(p: OscillatorParams, eta: f64) -> Self {
        Self { p, eta }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivs(t)[0]
    }

    /// `[G, G', G'']` for `t != 0`; the right-hand limits at `t = 0`.
    pub fn derivs(&self, t: f64) -> [f64; 3] {
        if t < 0.0 {
            return [0.0; 3];
        }
        let p = &self.p;
        let w2 = p.omega0 * p.omega0;
        let g = p.gamma;
        let h = g / w2;
        let e = (-self.eta * t).exp();
        let [y, dy, ddy] = Kernel::new(p).eval(t, h, (g * g - 2.0 * w2) / w2);
        [h * e - y, -self.eta * h * e - dy, self.eta * self.eta * h * e - ddy]
    }

    /// `-(w + i gamma) / ((w + i eta)(w^2 + i gamma w - omega0^2))`.
    pub fn freq(&self, omega: f64) -> Complex64 {
        let p = &self.p;
        let i = Complex64::i();
        let num = omega + i * p.gamma;
        let den = (omega + i * self.eta) * (omega * omega - p.omega0 * p.omega0 + i * p.gamma * omega);
        -num / den
    }
}

/// Retarded Green function at vanishing regulator.
pub fn green_retarded(p: &OscillatorParams, t: f64) -> f64 {
    GreenFunctionRetarded::new(*p, 0.0).value(t)
}

pub fn green_retarded_freq(p: &OscillatorParams, omega: f64, eta: f64) -> Complex64 {
    GreenFunctionRetarded::new(*p, eta).freq(omega)
}

/// Green function of the memory equation with lower limit at `t = 0`,
/// sourced at `t0`. Undefined (NaN) for `gamma = 0`.
///
/// `homogeneous` adds `b` times the symmetric source-free solution; it
/// defaults to zero.
#[derive(Debug, Clone, Copy)]
pub struct GreenFunctionTwoSided {
    pub p: OscillatorParams,
    pub eta: f64,
    pub homogeneous: f64,
}

impl GreenFunctionTwoSided {
    pub fn new(p: OscillatorParams, eta: f64) -> Self {
        Self { p, eta, homogeneous: 0.0 }
    }

    pub fn with_homogeneous(mut self, b: f64) -> Self {
        self.homogeneous = b;
        self
    }

    pub fn value(&self, t: f64, t0: f64) -> f64 {
        self.derivs(t, t0)[0]
    }

    /// `[G, G', G'']` in `t`, away from the kinks at `t = 0` and `t = t0`.
    pub fn derivs(&self, t: f64, t0: f64) -> [f64; 3] {
        let p = &self.p;
        if p.gamma == 0.0 {
            return [f64::NAN; 3];
        }
        let k = Kernel::new(p);
        let g = p.gamma;
        let w2 = p.omega0 * p.omega0;
        let h = g / w2;
        let sgn = if t < 0.0 { -1.0 } else { 1.0 };
        let tau = t.abs();
        let mut out = [0.0; 3];
        let mut add = |d: [f64; 3], c: f64| {
            for (o, v) in out.iter_mut().zip(d) {
                *o += c * v;
            }
        };

        let e = (self.eta * t).exp();
        let plateau = [h * e, self.eta * h * e, self.eta * self.eta * h * e];
        // y(s) = exp(-gamma s/2)[gamma C + (gamma^2 - 2 omega0^2) S] / omega0^2
        let y = |s: f64| k.eval(s, h, (g * g - 2.0 * w2) / w2);

        if t0 >= 0.0 {
            let step = if t < 0.0 {
                1.0
            } else if t < t0 {
                -1.0
            } else {
                0.0
            };
            add(plateau, step);
            let [a, b, c] = y(tau);
            add([sgn * a, b, sgn * c], 1.0);
            if t >= t0 {
                add(y(t - t0), -1.0);
            }
        } else if t < t0 {
            add(plateau, 1.0);
            let [a, b, c] = y(t0 - t);
            add([a, -b, c], -1.0);
        }

        let amp = k.eval(t0.abs(), g * g - w2, (g * g - 3.0 * w2) * g)[0] / (2.0 * g * w2);
        let [a, b, c] = k.eval(tau, 1.0, g);
        add([a, sgn * b, c], -amp);

        if self.homogeneous != 0.0 {
            add(q_homogeneous_derivs(p, self.homogeneous, t), 1.0);
        }
        out
    }

    /// Frequency form; the regulator moves the pole at `omega = 0` to `+i eta`.
    pub fn freq(&self, omega: f64, t0: f64) -> Complex64 {
        let p = &self.p;
        let i = Complex64::i();
        let g = p.gamma;
        let w2 = p.omega0 * p.omega0;
        let d = resonance_denominator(p, omega);
        let shift = (i * omega * t0).exp();
        let pole = omega - i * self.eta;
        let tail = Kernel::new(p).eval(t0.abs(), w2 - g * g, -g * (g * g - 3.0 * w2))[0] / d;
        let mut out = if t0 >= 0.0 {
            -(omega + i * g) * shift / (pole * (omega * omega - w2 + i * g * omega)) - 2.0 * i * g * w2 / (pole * d)
                + tail
        } else {
            -(omega - i * g) * shift / (pole * (omega * omega - w2 - i * g * omega)) + tail
        };
        if self.homogeneous != 0.0 {
            out += q_homogeneous_spectrum(p, self.homogeneous, omega);
        }
        out
    }
}

pub fn green_two_sided(p: &OscillatorParams, t: f64, t0: f64, eta: f64) -> f64 {
    GreenFunctionTwoSided::new(*p, eta).value(t, t0)
}

pub fn green_two_sided_freq(p: &OscillatorParams, omega: f64, t0: f64, eta: f64) -> Complex64 {
    GreenFunctionTwoSided::new(*p, eta).freq(omega, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> OscillatorParams {
        OscillatorParams::new(3.0, 1.0).unwrap()
    }

    #[test]
    fn retarded_is_causal_and_starts_flat() {
        let g = GreenFunctionRetarded::new(fig1(), 0.0);
        assert_eq!(g.value(-1.0), 0.0);
        let [v, d, _] = g.derivs(0.0);
        assert!(v.abs() < 1e-15);
        assert_relative_eq!(d, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn retarded_plateau() {
        for (w0, gm) in [(3.0, 1.0), (1.0, 2.0), (1.0, 5.0)] {
            let p = OscillatorParams::new(w0, gm).unwrap();
            assert_relative_eq!(green_retarded(&p, 200.0), gm / (w0 * w0), max_relative = 1e-12);
        }
    }

    #[test]
    fn retarded_matches_written_underdamped_form() {
        let p = fig1();
        let w1 = 35f64.sqrt();
        let t: f64 = 1.3;
        let closed =
            (1.0 / 9.0) * (1.0 - (-0.5 * t).exp() * ((0.5 * w1 * t).cos() + (1.0 - 18.0) / w1 * (0.5 * w1 * t).sin()));
        assert_relative_eq!(green_retarded(&p, t), closed, max_relative = 1e-13);
    }

    #[test]
    fn two_sided_matches_written_form() {
        let p = fig1();
        let (g, w0sq) = (1.0_f64, 9.0_f64);
        let w1 = 35f64.sqrt();
        let t0 = 0.7;
        let cs = |x: f64| ((0.5 * w1 * x).cos(), (0.5 * w1 * x).sin());
        for t in [-1.4, 0.3, 2.2] {
            let theta = |x: f64| if x > 0.0 { 1.0 } else { 0.0 };
            let sg = if t < 0.0 { -1.0 } else { 1.0 };
            let (c, s) = cs(t);
            let (ca, sa) = cs(t.abs());
            let (cd, sd) = cs(t - t0);
            let (c0, s0) = cs(t0);
            let mut v = (2.0 * theta(-t) - theta(t0 - t)) * g / w0sq;
            v += (-0.5 * g * t.abs()).exp() / (w1 * w0sq) * (g * w1 * sg * c + (g * g - 2.0 * w0sq) * s);
            v -= theta(t - t0) * (-0.5 * g * (t - t0)).exp() / (w1 * w0sq) * (g * w1 * cd + (g * g - 2.0 * w0sq) * sd);
            v -= (-0.5 * g * (t.abs() + t0)).exp() / (2.0 * g * w1 * w1 * w0sq)
                * (w1 * ca + g * sa)
                * ((g * g - w0sq) * w1 * c0 + (g * g - 3.0 * w0sq) * g * s0);
            assert_relative_eq!(green_two_sided(&p, t, t0, 0.0), v, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_sided_continuity_and_unit_jump() {
        let p = fig1();
        let g = GreenFunctionTwoSided::new(p, 0.0);
        let eps = 1e-10;
        for t0 in [0.7, -0.4, 2.0] {
            let lo = g.derivs(t0 - eps, t0);
            let hi = g.derivs(t0 + eps, t0);
            assert!((hi[0] - lo[0]).abs() < 1e-9);
            assert_relative_eq!(hi[1] - lo[1], 1.0, max_relative = 1e-8);
            let lo = g.derivs(-eps, t0);
            let hi = g.derivs(eps, t0);
            assert!((hi[0] - lo[0]).abs() < 1e-9);
            assert!((hi[1] - lo[1]).abs() < 1e-8, "slope jump at t=0: {}", hi[1] - lo[1]);
        }
    }

    #[test]
    fn branches_agree_at_zero_source_time() {
        let p = fig1();
        for t in [-2.0, -0.1, 0.4, 3.0] {
            let a = green_two_sided(&p, t, 0.0, 0.0);
            let b = green_two_sided(&p, t, -1e-12, 0.0);
            assert!((a - b).abs() < 1e-10);
            let fa = green_two_sided_freq(&p, 1.3, 0.0, 1e-6);
            let fb = green_two_sided_freq(&p, 1.3, -1e-12, 1e-6);
            assert!((fa - fb).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_damping_is_undefined() {
        let p = OscillatorParams::new(1.0, 0.0).unwrap();
        assert!(green_two_sided(&p, 0.3, 0.1, 0.0).is_nan());
    }
}

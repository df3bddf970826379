//! Damped oscillation kernel shared by the closed forms.
//!
//! With `z = 4 omega0^2 - gamma^2`, the building blocks are
//! `C(t) = cos(sqrt(z) t / 2)` and `S(t) = sin(sqrt(z) t / 2) / sqrt(z)`,
//! continued to `cosh` / `sinh` for `z < 0` and to a Taylor series near
//! critical damping. `C' = -(z/2) S` and `S' = C/2`.

use crate::model::OscillatorParams;

/// Relative size of `|omega1|` below which the series form is used.
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
enum Form {
    Trig { w: f64 },
    Hyp { w: f64 },
    Series,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub gamma: f64,
    pub z: f64,
    form: Form,
}

impl Kernel {
    pub fn new(p: &OscillatorParams) -> Self {
        let z = p.discriminant();
        let root = z.abs().sqrt();
        let form = if root < SERIES_THRESHOLD * p.omega0 {
            Form::Series
        } else if z > 0.0 {
            Form::Trig { w: 0.5 * root }
        } else {
            Form::Hyp { w: 0.5 * root }
        };
        Self { gamma: p.gamma, z, form }
    }

    /// `exp(-gamma t / 2) * (C(t), S(t))`, computed without overflow for the
    /// hyperbolic form.
    pub fn damped_cs(&self, t: f64) -> (f64, f64) {
        let h = -0.5 * self.gamma * t;
        match self.form {
            Form::Trig { w } => {
                let e = h.exp();
                let (s, c) = (w * t).sin_cos();
                (e * c, e * s / (2.0 * w))
            }
            Form::Hyp { w } => {
                let x = w * t;
                if x.abs() < 1.0 {
                    let e = h.exp();
                    (e * x.cosh(), e * 0.5 * (x.exp_m1() - (-x).exp_m1()) / (2.0 * w))
                } else {
                    let ep = (h + x).exp();
                    let em = (h - x).exp();
                    (0.5 * (ep + em), (ep - em) / (4.0 * w))
                }
            }
            Form::Series => {
                let e = h.exp();
                let u = -self.z * t * t / 4.0;
                let c = 1.0 + u / 2.0 + u * u / 24.0 + u * u * u / 720.0;
                let s = 0.5 * t * (1.0 + u / 6.0 + u * u / 120.0 + u * u * u / 5040.0);
                (e * c, e * s)
            }
        }
    }

    /// `y = exp(-gamma t/2) (a C + k S)` with `y'` and `y''`.
    pub fn eval(&self, t: f64, a: f64, k: f64) -> [f64; 3] {
        let (c, s) = self.damped_cs(t);
        let (a1, k1) = self.derive(a, k);
        let (a2, k2) = self.derive(a1, k1);
        [a * c + k * s, a1 * c + k1 * s, a2 * c + k2 * s]
    }

    /// Coefficients of the derivative of `exp(-gamma t/2)(a C + k S)`.
    pub fn derive(&self, a: f64, k: f64) -> (f64, f64) {
        let g = self.gamma;
        (-0.5 * g * a + 0.5 * k, -0.5 * g * k - 0.5 * a * self.z)
    }
}

#![allow(dead_code)]

/// Fixed-step RK4 for `q'' = -gamma q' - omega0^2 q`, returning samples at
/// every `stride` steps.
pub fn rk4_damped(omega0: f64, gamma: f64, q0: f64, v0: f64, dt: f64, steps: usize) -> Vec<(f64, f64, f64)> {
    let f = |q: f64, v: f64| (v, -gamma * v - omega0 * omega0 * q);
    let (mut q, mut v) = (q0, v0);
    let mut out = vec![(0.0, q, v)];
    for i in 0..steps {
        let (k1q, k1v) = f(q, v);
        let (k2q, k2v) = f(q + 0.5 * dt * k1q, v + 0.5 * dt * k1v);
        let (k3q, k3v) = f(q + 0.5 * dt * k2q, v + 0.5 * dt * k2v);
        let (k4q, k4v) = f(q + dt * k3q, v + dt * k3v);
        q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.push(((i + 1) as f64 * dt, q, v));
    }
    out
}

/// Composite Simpson rule for `f` on `[a, b]` with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Simpson over consecutive break points, `per` intervals per unit length.
/// Segment ends are pulled inside by a few ulps so that one-sided limits
/// are sampled at jumps.
pub fn simpson_breaks<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], per: f64) -> f64 {
    const NUDGE: f64 = 1e-13;
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (a, b) = (w[0] + NUDGE, w[1] - NUDGE);
            simpson(f, a, b, (((b - a) * per).ceil() as usize).max(2))
        })
        .sum()
}

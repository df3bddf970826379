//! Reservoir motion reconstructed from a sampled system trajectory.

use super::homogeneous::q_homogeneous_derivs;
use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::grid::lagrange_local;
use crate::model::{ConditionKind, OscillatorParams, ReservoirCondition, Trajectory};
use crate::quad::gauss_legendre;

const PANEL_NODES: usize = 8;

/// One reservoir mode sampled at the trajectory times.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSamples {
    pub omega: f64,
    pub values: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Bound on the contribution of system motion before the first sample
    /// (asymptotic kind only); that contribution is included assuming the
    /// system held its first sampled displacement.
    pub truncation_estimate: f64,
}

fn amplitudes_at(rc: &ReservoirCondition, omega: f64) -> (f64, f64) {
    if rc.is_quiescent() {
        return (0.0, 0.0);
    }
    let nodes = rc.grid.nodes();
    let i = rc.grid.nearest(omega);
    if (nodes[i] - omega).abs() <= 1e-12 * omega {
        return (rc.displacement[i], rc.velocity[i]);
    }
    (lagrange_local(nodes, &rc.displacement, omega).0, lagrange_local(nodes, &rc.velocity, omega).0)
}

/// Running integrals `int q(s) cos(w s) ds` and `int q(s) sin(w s) ds` from
/// the first sample, with `q` interpolated by cubic Hermite polynomials.
fn running_moments(q: &Trajectory, omega: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(PANEL_NODES);
    let n = q.len();
    let mut cc = vec![0.0; n];
    let mut ss = vec![0.0; n];
    for j in 1..n {
        let (a, b) = (q.t[j - 1], q.t[j]);
        let (c, s) = panel_moments(q, j - 1, a, b, omega, &x, &w);
        cc[j] = cc[j - 1] + c;
        ss[j] = ss[j - 1] + s;
    }
    (cc, ss)
}

/// Moments over `[lo, hi]` inside the panel starting at sample `k`.
fn panel_moments(q: &Trajectory, k: usize, lo: f64, hi: f64, omega: f64, x: &[f64], w: &[f64]) -> (f64, f64) {
    let (t0, t1) = (q.t[k], q.t[k + 1]);
    let h = t1 - t0;
    let half = 0.5 * (hi - lo);
    let mut c = 0.0;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let t = lo + half * (xi + 1.0);
        let u = (t - t0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * q.q[k]
            + (u3 - 2.0 * u2 + u) * h * q.qdot[k]
            + (-2.0 * u3 + 3.0 * u2) * q.q[k + 1]
            + (u3 - u2) * h * q.qdot[k + 1];
        let (sn, cs) = (omega * t).sin_cos();
        c += half * wi * v * cs;
        s += half * wi * v * sn;
    }
    (c, s)
}

/// Reservoir mode at `omega` driven by the sampled motion `q`.
///
/// For time-zero data the memory integral starts at `t = 0`, which must lie
/// inside the sampled interval. For asymptotic data it starts at the first
/// sample.
pub fn reservoir_from_q(
    _p: &OscillatorParams,
    c: &CouplingSpec,
    rc: &ReservoirCondition,
    q: &Trajectory,
    omega: f64,
) -> Result<ReservoirSamples> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter { field: "omega", reason: format!("must be > 0, got {omega}") });
    }
    q.validate()?;
    rc.validate()?;
    let alpha = c.alpha(omega)?;
    let (a, b) = amplitudes_at(rc, omega);
    let (cc, ss) = running_moments(q, omega);
    let n = q.len();
    let (c0, s0, truncation, t_first, q_first) = match rc.kind {
        ConditionKind::TimeZero => {
            let (lo, hi) = (q.t[0], q.t[n - 1]);
            if !(lo <= 0.0 && 0.0 <= hi) {
                return Err(Error::InvalidParameter {
                    field: "trajectory",
                    reason: format!("time-zero data needs t = 0 inside [{lo}, {hi}]"),
                });
            }
            let k = q.t.partition_point(|t| *t <= 0.0).saturating_sub(1).min(n.saturating_sub(2));
            let (x, w) = gauss_legendre(PANEL_NODES);
            let (pc, ps) = panel_moments(q, k, q.t[k], 0.0, omega, &x, &w);
            (cc[k] + pc, ss[k] + ps, 0.0, 0.0, 0.0)
        }
        ConditionKind::Asymptotic => (0.0, 0.0, (alpha * q.q[0]).abs() / (omega * omega), q.t[0], q.q[0]),
    };
    let k = alpha / omega;
    let mut values = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for j in 0..n {
        let t = q.t[j];
        let (sn, cs) = (omega * t).sin_cos();
        let (mc, ms) = (cc[j] - c0, ss[j] - s0);
        let mut x = a * cs + b * sn + k * (sn * mc - cs * ms);
        let mut v = omega * (b * cs - a * sn) + alpha * (cs * mc + sn * ms);
        if rc.kind == ConditionKind::Asymptotic {
            let (sp, cp) = (omega * (t - t_first)).sin_cos();
            x += k * q_first * cp / omega;
            v -= k * q_first * sp;
        }
        values.push(x);
        velocities.push(v);
    }
    Ok(ReservoirSamples { omega, values, velocities, truncation_estimate: truncation })
}

/// Symmetric damped solution sampled on a uniform grid, for use with
/// [`reservoir_from_q`].
pub fn homogeneous_trajectory(p: &OscillatorParams, b: f64, t0: f64, t1: f64, n: usize) -> Trajectory {
    Trajectory::from_fn(Trajectory::uniform_times(t0, t1, n), |t| {
        let [q, v, _] = q_homogeneous_derivs(p, b, t);
        (q, v)
    })
}

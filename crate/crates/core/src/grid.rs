//! Frequency grids with quadrature weights and a pole regulator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OscillatorParams;
use crate::quad::gauss_legendre;

/// Frequency nodes on `omega >= 0` with matching quadrature weights.
///
/// `span` is the integration interval the weights cover; for a mapped
/// semi-infinite grid its upper end is `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    omega_max: f64,
    eta: f64,
    span: (f64, f64),
}

/// Default pole regulator `1e-4 * min(gamma, omega0)`; falls back to
/// `1e-4 * omega0` for an undamped oscillator.
pub fn default_eta(p: &OscillatorParams) -> f64 {
    let scale = if p.gamma > 0.0 { p.gamma.min(p.omega0) } else { p.omega0 };
    1e-4 * scale
}

impl SpectralGrid {
    /// Builds a grid from explicit nodes and weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, eta: f64, span: (f64, f64)) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter { field: "grid", reason: "no nodes".into() });
        }
        if nodes.len() != weights.len() {
            return Err(Error::GridMismatch(format!("{} nodes but {} weights", nodes.len(), weights.len())));
        }
        if nodes[0] < 0.0 || !nodes.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter { field: "grid", reason: "nodes must be finite and >= 0".into() });
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter { field: "grid", reason: "nodes must be strictly increasing".into() });
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter { field: "grid", reason: "weights must be positive".into() });
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter { field: "eta", reason: format!("must be > 0, got {eta}") });
        }
        let omega_max = *nodes.last().unwrap();
        Ok(Self { nodes, weights, omega_max, eta, span })
    }

    /// `n` cell-centred nodes on `[0, omega_max]` with equal weights.
    pub fn midpoint(span_max: f64, n: usize, eta: f64) -> Result<Self> {
        check_count(n, 1)?;
        check_positive("omega_max", span_max)?;
        let h = span_max / n as f64;
        let nodes = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        Self::from_parts(nodes, vec![h; n], eta, (0.0, span_max))
    }

    /// `n` equispaced nodes including both ends, with trapezoid weights.
    pub fn trapezoid(lo: f64, hi: f64, n: usize, eta: f64) -> Result<Self> {
        check_count(n, 2)?;
        if !(hi > lo) || lo < 0.0 {
            return Err(Error::InvalidParameter { field: "grid", reason: format!("bad interval [{lo}, {hi}]") });
        }
        let h = (hi - lo) / (n - 1) as f64;
        let nodes = (0..n).map(|j| if j == n - 1 { hi } else { lo + j as f64 * h }).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self::from_parts(nodes, weights, eta, (lo, hi))
    }

    /// Composite Gauss-Legendre rule: `panels` equal panels of `order` nodes on `[lo, hi]`.
    pub fn gauss_panels(lo: f64, hi: f64, panels: usize, order: usize, eta: f64) -> Result<Self> {
        check_count(panels, 1)?;
        check_count(order, 1)?;
        if !(hi > lo) || lo < 0.0 {
            return Err(Error::InvalidParameter { field: "grid", reason: format!("bad interval [{lo}, {hi}]") });
        }
        let (x, w) = gauss_legendre(order);
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let a = lo + k as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        Self::from_parts(nodes, weights, eta, (lo, hi))
    }

    /// Gauss-Legendre panels on consecutive intervals `[breaks[i], breaks[i+1]]`.
    pub fn gauss_breaks(breaks: &[f64], panels_per_interval: usize, order: usize, eta: f64) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidParameter { field: "grid", reason: "need two break points".into() });
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let g = Self::gauss_panels(w[0], w[1], panels_per_interval, order, eta)?;
            nodes.extend_from_slice(&g.nodes);
            weights.extend_from_slice(&g.weights);
        }
        Self::from_parts(nodes, weights, eta, (breaks[0], *breaks.last().unwrap()))
    }

    /// Semi-infinite grid `omega = scale * tan(pi x / 2)` with Gauss-Legendre
    /// nodes in `x`. Integrands decaying like `1/omega^2` are integrated to
    /// spectral accuracy with no truncation.
    pub fn mapped_half_line(n: usize, scale: f64, eta: f64) -> Result<Self> {
        check_count(n, 1)?;
        check_positive("scale", scale)?;
        let (x, w) = gauss_legendre(n);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 0.5 * (xi + 1.0);
            let c = (half_pi * u).cos();
            nodes.push(scale * (half_pi * u).tan());
            weights.push(0.5 * wi * scale * half_pi / (c * c));
        }
        Self::from_parts(nodes, weights, eta, (0.0, f64::INFINITY))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Copy with a different regulator.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::from_parts(self.nodes.clone(), self.weights.clone(), eta, self.span)
    }

    /// Weighted sum of samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| v * *w).sum()
    }

    /// Weighted sum of `f(omega)` over the nodes.
    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Smallest gap between consecutive nodes.
    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Index of the node closest to `omega`.
    pub fn nearest(&self, omega: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&omega)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if omega - self.nodes[i - 1] <= self.nodes[i] - omega {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// True when both grids share nodes to relative precision `tol`.
    pub fn same_nodes(&self, other: &SpectralGrid, tol: f64) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
    }
}

fn check_count(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter { field: "n", reason: format!("need at least {min} nodes, got {n}") });
    }
    Ok(())
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter { field, reason: format!("must be finite and > 0, got {v}") });
    }
    Ok(())
}

const LAGRANGE_POINTS: usize = 8;

/// Local Lagrange interpolation of sampled data, with its derivative.
/// Uses fewer points on short arrays.
pub(crate) fn lagrange_local(x: &[f64], y: &[f64], at: f64) -> (f64, f64) {
    let n = x.len();
    if n == 1 {
        return (y[0], 0.0);
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&at)) {
        Ok(i) => i,
        Err(i) => i,
    };
    let m = n.min(LAGRANGE_POINTS);
    let start = i.saturating_sub(m / 2).min(n - m);
    let xs = &x[start..start + m];
    let ys = &y[start..start + m];
    let mut val = 0.0;
    let mut der = 0.0;
    for j in 0..m {
        let mut l = 1.0;
        let mut dl = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let denom = xs[j] - xs[k];
            let mut prod = 1.0 / denom;
            for r in 0..m {
                if r != j && r != k {
                    prod *= (at - xs[r]) / (xs[j] - xs[r]);
                }
            }
            dl += prod;
            l *= (at - xs[k]) / denom;
        }
        val += ys[j] * l;
        der += ys[j] * dl;
    }
    (val, der)
}

/// `P int f(x)/(x^2 - w^2) dx` for samples `values` on `grid`, by pole
/// subtraction. Beyond the grid span `f` is held at its last sample and the
/// tail added analytically. Returns `(value, tail)`.
pub(crate) fn pv_inverse_square_sampled(grid: &SpectralGrid, values: &[f64], w: f64) -> (f64, f64) {
    let x = grid.nodes();
    let (fw, dfw) = lagrange_local(x, values, w);
    let (lo, hi) = grid.span();
    let scale = grid.min_spacing().min(w) * 1e-9;
    let mut sum = 0.0;
    for ((xi, wi), fi) in x.iter().zip(grid.weights()).zip(values) {
        let d = xi - w;
        let r = if d.abs() <= scale { dfw / (2.0 * w) } else { (fi - fw) / (d * (xi + w)) };
        sum += wi * r;
    }
    let mut value = sum;
    if hi.is_finite() {
        value += fw * crate::quad::pv_inverse_square_elementary(lo, hi, w);
        let tail = values[values.len() - 1] * (((hi + w) / (hi - w)).ln() / (2.0 * w));
        (value + tail, tail)
    } else {
        // The elementary PV over [lo, inf) is -ln|(lo-w)/(lo+w)|/(2w).
        value += fw * (-((lo - w) / (lo + w)).abs().ln() / (2.0 * w));
        (value, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constructors_validate() {
        assert!(SpectralGrid::midpoint(10.0, 0, 1e-4).is_err());
        assert!(SpectralGrid::trapezoid(1.0, 1.0, 10, 1e-4).is_err());
        assert!(SpectralGrid::midpoint(10.0, 10, 0.0).is_err());
        assert!(SpectralGrid::from_parts(vec![1.0, 0.5], vec![1.0, 1.0], 1e-4, (0.0, 2.0)).is_err());
    }

    #[test]
    fn midpoint_layout() {
        let g = SpectralGrid::midpoint(100.0, 4000, 1e-4).unwrap();
        assert_eq!(g.len(), 4000);
        assert_relative_eq!(g.nodes()[0], 0.0125);
        assert_eq!(g.omega_max(), *g.nodes().last().unwrap());
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 100.0, max_relative = 1e-12);
    }

    #[test]
    fn rules_integrate_smooth_functions() {
        let f = |x: f64| (-x).exp();
        let exact = 1.0 - (-5.0f64).exp();
        let t = SpectralGrid::trapezoid(0.0, 5.0, 2001, 1e-4).unwrap();
        assert_relative_eq!(t.integrate_fn(f), exact, max_relative = 1e-6);
        let g = SpectralGrid::gauss_panels(0.0, 5.0, 4, 12, 1e-4).unwrap();
        assert_relative_eq!(g.integrate_fn(f), exact, max_relative = 1e-13);
        let m = SpectralGrid::mapped_half_line(200, 1.0, 1e-4).unwrap();
        assert_relative_eq!(m.integrate_fn(|x| 1.0 / (1.0 + x * x)), std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
    }

    #[test]
    fn nearest_node() {
        let g = SpectralGrid::trapezoid(0.0, 1.0, 11, 1e-4).unwrap();
        assert_eq!(g.nearest(0.34), 3);
        assert_eq!(g.nearest(-1.0), 0);
        assert_eq!(g.nearest(7.0), 10);
    }

    #[test]
    fn lagrange_is_exact_on_cubics() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v - 2.0 * v).collect();
        let (v, d) = lagrange_local(&x, &y, 1.1);
        assert_relative_eq!(v, 1.1f64.powi(3) - 2.2, max_relative = 1e-12);
        assert_relative_eq!(d, 3.0 * 1.21 - 2.0, max_relative = 1e-11);
    }

    #[test]
    fn sampled_pv_matches_closed_form() {
        // P int_0^inf 1/((x^2+a^2)(x^2-w^2)) dx = -pi/(2a(a^2+w^2)).
        let g = SpectralGrid::gauss_panels(0.0, 2000.0, 400, 16, 1e-4).unwrap();
        let exact = |a: f64, w: f64| -std::f64::consts::PI / (2.0 * a * (a * a + w * w));
        let vals: Vec<f64> = g.nodes().iter().map(|x| 1.0 / (1.0 + x * x)).collect();
        let w = g.nodes()[20];
        let (v, _) = pv_inverse_square_sampled(&g, &vals, w);
        assert_relative_eq!(v, exact(1.0, w), max_relative = 1e-7);
        let vals: Vec<f64> = g.nodes().iter().map(|x| 1.0 / (25.0 + x * x)).collect();
        let (v, _) = pv_inverse_square_sampled(&g, &vals, 0.8);
        assert_relative_eq!(v, exact(5.0, 0.8), max_relative = 1e-6);
    }
}

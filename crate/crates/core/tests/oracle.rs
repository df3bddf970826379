use qdamp::analytic::q_homogeneous;
use qdamp::oracle::{build_bath, integrate, thermal_sample, DiscreteBath, SampleOptions};
use qdamp::thermal::{momentum_correlation, ThermalParams};
use qdamp::{CouplingSpec, OscillatorParams, SpectralGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig1() -> OscillatorParams {
    OscillatorParams::new(3.0, 1.0).unwrap()
}

fn bath(p: &OscillatorParams, n: usize, omega_max: f64) -> DiscreteBath {
    let g = SpectralGrid::midpoint(omega_max, n, 1e-4).unwrap();
    build_bath(&CouplingSpec::ohmic(*p), &g).unwrap()
}

fn max_error(p: &OscillatorParams, n: usize, omega_max: f64, t_end: f64, dt: f64) -> (f64, f64) {
    let b = bath(p, n, omega_max).with_system(1.0, 0.0);
    let run = integrate(&b, p, (0.0, t_end), dt).unwrap();
    let err = run
        .trajectory
        .t
        .iter()
        .zip(&run.trajectory.q)
        .map(|(t, q)| (q - q_homogeneous(p, 1.0, *t)).abs())
        .fold(0.0, f64::max);
    (err, run.max_relative_drift / t_end)
}

#[test]
fn continuum_limit_convergence_and_energy() {
    let p = fig1();
    let (e4000, drift) = max_error(&p, 4000, 100.0, 5.0, 5e-4);
    assert!(e4000 <= 1e-2, "N=4000 error {e4000}");
    assert!(drift <= 1e-8, "energy drift per unit time {drift}");
}

#[test]
fn coarse_bath_shows_revival() {
    let p = fig1();
    let (coarse, _) = max_error(&p, 50, 20.0, 20.0, 5e-3);
    assert!(coarse > 0.1, "N=50 deviation {coarse}");
    let (fine, _) = max_error(&p, 2000, 50.0, 5.0, 2e-3);
    assert!(fine < 0.1);
}

#[test]
fn error_falls_with_bandwidth_at_fixed_density() {
    let p = fig1();
    let mut last = f64::INFINITY;
    for (n, wmax) in [(250, 25.0), (500, 50.0), (1000, 100.0)] {
        let (e, _) = max_error(&p, n, wmax, 3.0, 1e-3);
        assert!(e < last, "N={n}: {e} !< {last}");
        last = e;
    }
    // At fixed omega_max the grid error is already far below the truncation
    // error, so refining N leaves the deviation unchanged.
    let (a, _) = max_error(&p, 250, 50.0, 3.0, 2e-3);
    let (b, _) = max_error(&p, 1000, 50.0, 3.0, 2e-3);
    assert!((a - b).abs() <= 1e-4 * a, "{a} vs {b}");
}

#[test]
fn discretization_defect_shrinks_with_n() {
    let p = fig1();
    let d1 = bath(&p, 1000, 100.0).report.defect.abs();
    let d2 = bath(&p, 2000, 100.0).report.defect.abs();
    assert!(d2 <= 0.5 * d1, "{d1} -> {d2}");
}

#[test]
fn zero_mode_is_stationary() {
    let p = fig1();
    let b = bath(&p, 4000, 100.0);
    let s = b.zero_mode_state(1.0);
    let b = b.with_state(s).unwrap();
    let run = integrate(&b, &p, (0.0, 5.0), 5e-4).unwrap();
    let drift = run.trajectory.q.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-6, "drift {drift}");
}

#[test]
fn trajectories_are_linear_in_initial_data() {
    let p = fig1();
    let b = bath(&p, 200, 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let mut draw = || {
            let mut s = b.state.clone();
            s.q = rng.random_range(-1.0..1.0);
            s.qdot = rng.random_range(-1.0..1.0);
            for j in 0..b.len() {
                s.x[j] = rng.random_range(-0.1..0.1);
                s.xdot[j] = rng.random_range(-0.1..0.1);
            }
            s
        };
        let (u, v) = (draw(), draw());
        let (a, c) = (0.7, -1.3);
        let mut w = u.clone();
        w.q = a * u.q + c * v.q;
        w.qdot = a * u.qdot + c * v.qdot;
        for j in 0..b.len() {
            w.x[j] = a * u.x[j] + c * v.x[j];
            w.xdot[j] = a * u.xdot[j] + c * v.xdot[j];
        }
        let run = |s| integrate(&b.clone().with_state(s).unwrap(), &p, (0.0, 2.0), 5e-3).unwrap().trajectory.q;
        let (qu, qv, qw) = (run(u), run(v), run(w));
        for i in 0..qw.len() {
            assert!((qw[i] - a * qu[i] - c * qv[i]).abs() <= 1e-10);
        }
    }
}

#[test]
fn symmetric_into_past_and_future() {
    let p = fig1();
    let b = bath(&p, 1000, 50.0).with_system(1.0, 0.0);
    let fwd = integrate(&b, &p, (0.0, 3.0), 1e-3).unwrap().trajectory;
    let bwd = integrate(&b, &p, (0.0, -3.0), 1e-3).unwrap().trajectory;
    let n = fwd.len();
    for i in 0..n {
        assert!((fwd.q[i] - bwd.q[n - 1 - i]).abs() <= 1e-12);
        assert!((fwd.t[i] + bwd.t[n - 1 - i]).abs() <= 1e-12);
    }
}

#[test]
fn uncoupled_quantum_ensemble_is_stationary() {
    let p = OscillatorParams::new(2.0, 0.0).unwrap();
    let b = bath(&p, 10, 5.0);
    let t = 1.5;
    let opts = SampleOptions { record_stride: 20, ..SampleOptions::new(4.0, 0.02) };
    let s = thermal_sample(&b, &p, t, 20_000, 42, &opts).unwrap();
    let expected = 1.0 / (2.0 / (2.0 * t)).tanh() / (2.0 * p.omega0);
    let mean = s.q2.iter().sum::<f64>() / s.q2.len() as f64;
    assert!((mean - expected).abs() <= 3e-2 * expected, "{mean} vs {expected}");
}

#[test]
fn ensemble_momentum_plateau_matches_quadrature() {
    let p = OscillatorParams::new(1.0, 1.0).unwrap();
    let t = 5.0;
    let b = bath(&p, 800, 10.0);
    let opts = SampleOptions { record_stride: 10, ..SampleOptions::new(10.0, 0.01) };
    let s = thermal_sample(&b, &p, t, 2000, 7, &opts).unwrap();
    let plateau = s.late_qdot2(6.0);
    let c = CouplingSpec::ohmic(p);
    let target = momentum_correlation(&p, &c, &ThermalParams::new(t, 1e-4).unwrap(), 0.0).unwrap();
    assert!((plateau - target).abs() <= 5e-2 * target, "{plateau} vs {target}");
    let json: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    assert_eq!(json["n_samples"], 2000);
    assert_eq!(json["seed"], 7);
}

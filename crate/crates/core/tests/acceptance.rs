//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing the summary. With `QDAMP_ACCEPTANCE_STRICT=1` any
//! FAIL makes the exit status 1.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use qdamp::analytic::*;
use qdamp::coupling::susceptibility_quadrature;
use qdamp::oracle::{build_bath, integrate};
use qdamp::quantization::{
    build_coefficients, build_coefficients_unchecked, coherent_amplitude, q_expectation_from_coherent,
    verify_commutators,
};
use qdamp::thermal::{momentum_correlation, position_correlation_at, thermal_energy, ThermalParams};
use qdamp::{
    derived_rates, diagonalizability, kramers_kronig_check, total_energy, ConditionKind, CouplingSpec,
    Diagonalizability, InstantState, OscillatorParams, ReservoirCondition, SpectralGrid, Spectrum, Susceptibility,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fig1() -> OscillatorParams {
    OscillatorParams::new(3.0, 1.0).unwrap()
}

fn window() -> Vec<f64> {
    (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect()
}

fn figure_one() -> Outcome {
    let p = fig1();
    let w1 = derived_rates(&p).omega1.unwrap();
    let q0 = q_homogeneous(&p, 1.0, 0.0);
    let ts: Vec<f64> = (0..=2000).map(|i| -10.0 + 0.01 * i as f64).collect();
    let sym = ts.iter().map(|t| (q_homogeneous(&p, 1.0, *t) - q_homogeneous(&p, 1.0, -t)).abs()).fold(0.0, f64::max);
    let envelope_ok =
        ts.iter().all(|t| q_homogeneous(&p, 1.0, *t).abs() <= (-0.5 * t.abs()).exp() * (1.0 + 1.0 / w1) + 1e-15);
    let omegas: Vec<f64> = (1..=1000).map(|i| 0.01 * i as f64).collect();
    let peak = omegas
        .iter()
        .map(|w| (*w, x_reservoir_homogeneous(&p, 1.0, *w, 10.0).abs()))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
        .0;
    let pass = q0 == 1.0 && sym <= 1e-12 && envelope_ok && (2.5..=3.5).contains(&peak);
    outcome(pass, format!("q(0)={q0}, symmetry {sym:.1e}, envelope {envelope_ok}, reservoir peak at omega={peak:.2}"))
}

fn ode_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for (w0, g) in [(3.0, 1.0), (1.0, 2.0), (1.0, 5.0)] {
        let p = OscillatorParams::new(w0, g).unwrap();
        for (t, q, _) in common::rk4_damped(w0, g, 1.0, 0.0, 1e-3, 5000) {
            worst = worst.max((q_homogeneous(&p, 1.0, t) - q).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max |q - q_rk4| = {worst:.2e} over three regimes"))
}

fn oracle_error(n: usize) -> (f64, f64) {
    let p = fig1();
    let g = SpectralGrid::midpoint(100.0, n, 1e-4).unwrap();
    let bath = build_bath(&CouplingSpec::ohmic(p), &g).unwrap().with_system(1.0, 0.0);
    let run = integrate(&bath, &p, (0.0, 5.0), 5e-4).unwrap();
    let err = run
        .trajectory
        .t
        .iter()
        .zip(&run.trajectory.q)
        .map(|(t, q)| (q - q_homogeneous(&p, 1.0, *t)).abs())
        .fold(0.0, f64::max);
    (err, run.max_relative_drift)
}

fn continuum_limit() -> Outcome {
    let (e4, d4) = oracle_error(4000);
    let (e8, _) = oracle_error(8000);
    let pass = e4 <= 1e-2 && e8 < e4;
    outcome(pass, format!("N=4000 error {e4:.6e} (drift {d4:.1e}), N=8000 error {e8:.6e}, decrease {}", e8 < e4))
}

fn memory_kernel() -> Outcome {
    let p = fig1();
    let worst = window().iter().map(|t| memory_residual_homogeneous(&p, 1.0, *t).unwrap().abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-7 * 9.0, format!("max residual {worst:.2e} (threshold {:.1e})", 9e-7))
}

fn green_functions() -> Outcome {
    let p = fig1();
    let sigma = 1e-3 / 3.0;
    let ret = [-0.2, 0.0, 3.0 * sigma, 0.1, 1.0, 4.0]
        .iter()
        .map(|t| retarded_residual(&p, *t, sigma).unwrap().abs())
        .fold(0.0, f64::max);
    let mut two: f64 = 0.0;
    let mut jump: f64 = 0.0;
    for t0 in [-0.7, 0.0, 0.7] {
        let g = GreenFunctionTwoSided::new(p, 0.0);
        let (lo, hi) = (g.derivs(t0 - 1e-9, t0), g.derivs(t0 + 1e-9, t0));
        jump = jump.max((hi[1] - lo[1] - 1.0).abs()).max((hi[0] - lo[0]).abs());
        for t in [-1.0, t0 - 2.0 * sigma, t0, t0 + sigma, 0.35, 1.5] {
            two = two.max(two_sided_residual(&p, t0, t, sigma).unwrap().abs());
        }
    }
    let pass = ret <= 1e-6 && two <= 1e-6 && jump <= 1e-6;
    outcome(pass, format!("retarded {ret:.1e}, two-sided {two:.1e}, jump/continuity {jump:.1e}"))
}

fn susceptibility_checks() -> Outcome {
    let p = fig1();
    let c = CouplingSpec::ohmic(p);
    let mut worst: f64 = 0.0;
    for k in 0..=60 {
        let w = 0.01 * 5000f64.powf(k as f64 / 60.0);
        let closed = Complex64::new(1.0, 0.0) / Complex64::new(1.0, -w);
        worst = worst.max((susceptibility_quadrature(&c, &p, w).unwrap() - closed).norm());
    }
    let g = SpectralGrid::trapezoid(0.0, 100.0, 4000, 1e-4).unwrap();
    let s = Susceptibility::ohmic(&p, g.nodes().to_vec());
    let kk = kramers_kronig_check(&s, &g).unwrap();
    let pass = worst <= 1e-6 && kk.max_abs_error <= 1e-3;
    outcome(
        pass,
        format!(
            "quadrature vs closed form {worst:.1e}, Kramers-Kronig {:.1e} at omega={:.2}",
            kk.max_abs_error, kk.omega_at_max
        ),
    )
}

fn diagonalization() -> Outcome {
    let p = fig1();
    let ohmic = CouplingSpec::ohmic(p);
    let r1 = diagonalizability(&ohmic, &p).unwrap();
    let r2 = diagonalizability(&ohmic.clone().scaled(0.5), &p).unwrap();
    let r3 = diagonalizability(&ohmic.clone().scaled(2.0), &p).unwrap();
    let exponent = r1.kappa_exponent_estimate.unwrap_or(f64::NAN);
    let g = SpectralGrid::trapezoid(1e-4, 500.0, 40_000, 1e-4).unwrap();
    let half = ohmic.clone().scaled(0.5);
    let double = ohmic.clone().scaled(2.0);
    let n1 = verify_commutators(&build_coefficients(&ohmic, &p, &g).unwrap(), &ohmic).unwrap().norm_integral;
    let n2 = verify_commutators(&build_coefficients(&half, &p, &g).unwrap(), &half).unwrap().norm_integral;
    let n3 =
        verify_commutators(&build_coefficients_unchecked(&double, &p, &g).unwrap(), &double).unwrap().norm_integral;
    let pass = r1.verdict == Diagonalizability::ZeroModeBoundaryOK
        && (exponent - 1.0).abs() <= 0.1
        && r2.verdict == Diagonalizability::StrictlyBelow
        && r3.verdict == Diagonalizability::Fails
        && (n1 - 1.0).abs() <= 1e-4
        && (n2 - 1.0).abs() <= 1e-4
        && (n3 - 1.0).abs() > 0.05;
    outcome(
        pass,
        format!(
            "{:?} (exponent {exponent:.3}), {:?}, {:?}; norms {n1:.6}, {n2:.6}, {n3:.4}",
            r1.verdict, r2.verdict, r3.verdict
        ),
    )
}

fn zero_mode() -> Outcome {
    let p = fig1();
    let c = CouplingSpec::ohmic(p);
    let g = SpectralGrid::mapped_half_line(400, 1.0, 1e-4).unwrap();
    let x: Vec<f64> = g.nodes().iter().map(|w| c.alpha_extended(*w) / (w * w)).collect();
    let state = InstantState { q: 1.0, qdot: 0.0, grid: &g, x, xdot: vec![0.0; g.len()] };
    let energy = total_energy(&p, &c, &state).unwrap().value;
    let bath = build_bath(&c, &SpectralGrid::midpoint(100.0, 4000, 1e-4).unwrap()).unwrap();
    let s = bath.zero_mode_state(1.0);
    let bath = bath.with_state(s).unwrap();
    let run = integrate(&bath, &p, (0.0, 5.0), 5e-4).unwrap();
    let drift = run.trajectory.q.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    outcome(energy.abs() <= 1e-8 * 9.0 && drift <= 1e-6, format!("energy {energy:.1e}, oracle drift {drift:.1e}"))
}

fn condition_maps() -> Outcome {
    let p = fig1();
    let c = CouplingSpec::ohmic(p);
    let grid = SpectralGrid::gauss_panels(0.0, 400.0, 1600, 16, 1e-4).unwrap();
    let q = Spectrum::from_fn(grid.nodes().to_vec(), |w| Complex64::new(q_homogeneous_spectrum(&p, 1.0, w), 0.0));
    let rc0 = ReservoirCondition::quiescent(ConditionKind::TimeZero, grid.clone());
    let rc = map_conditions(&p, &c, &q, &rc0).unwrap();
    let mut rel: f64 = 0.0;
    for (i, &w) in grid.nodes().iter().enumerate() {
        if (0.1..=20.0).contains(&w) {
            let (ar, br) = asymptotic_amplitudes(&p, 1.0, w);
            rel = rel.max((rc.displacement[i] - ar).abs() / ar.abs()).max((rc.velocity[i] - br).abs() / br.abs());
        }
    }
    let ts = window();
    let qs = q_from_asymptotic_series(&p, &rc, &ts, &ConvolutionOptions::for_params(&p)).unwrap();
    let recon = ts.iter().zip(&qs).map(|(t, v)| (v - q_homogeneous(&p, 1.0, *t)).abs()).fold(0.0, f64::max);
    outcome(rel <= 1e-4 && recon <= 1e-3, format!("amplitude relative error {rel:.1e}, reconstruction {recon:.1e}"))
}

fn thermal_limits() -> Outcome {
    let w0 = 3.0;
    let p = OscillatorParams::new(w0, 1e-3 * w0).unwrap();
    let c = CouplingSpec::ohmic(p);
    let coth = |x: f64| 1.0 / x.tanh();
    let mut p2_worst: f64 = 0.0;
    for t in [0.0, w0, 5.0 * w0] {
        let v = momentum_correlation(&p, &c, &ThermalParams::new(t, 1e-4 * w0).unwrap(), 0.0).unwrap();
        let free = 0.5 * w0 * if t == 0.0 { 1.0 } else { coth(w0 / (2.0 * t)) };
        p2_worst = p2_worst.max((v - free).abs() / free);
    }
    let t = 2.0 * w0;
    let e = thermal_energy(&p, &c, &ThermalParams::new(t, 1e-4).unwrap()).unwrap();
    let target = 0.5 * w0 * coth(w0 / (2.0 * t)) - 0.5 * t;
    let e_rel = (e - target).abs() / target.abs();
    let e0 = thermal_energy(&p, &c, &ThermalParams::new(0.0, 1e-4).unwrap()).unwrap();
    let e0_rel = (e0 - 0.5 * w0).abs() / (0.5 * w0);

    let pd = OscillatorParams::new(w0, 1.0).unwrap();
    let cd = CouplingSpec::ohmic(pd);
    let temp = 3.0 * w0;
    let etas = [1e-3 * w0, 5e-4 * w0, 2.5e-4 * w0];
    let x: Vec<f64> = etas.iter().map(|e| 1.0 / e).collect();
    let y: Vec<f64> = etas.iter().map(|e| position_correlation_at(&pd, &cd, temp, *e, 0.0).unwrap()).collect();
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    let expected = temp * 1.0 / (w0 * w0);
    let slope_rel = (slope - expected).abs() / expected;
    let pass = p2_worst <= 1e-2 && e_rel <= 2e-2 && e0_rel <= 1e-2 && slope_rel <= 2e-2;
    outcome(
        pass,
        format!("<P^2> {p2_worst:.1e}, E(T=2w0) {e_rel:.1e}, E(0) {e0_rel:.1e}, divergent coefficient {slope_rel:.1e} (relative)"),
    )
}

fn coherent_state() -> Outcome {
    let p = fig1();
    let g =
        SpectralGrid::gauss_breaks(&[0.0, 0.01, 1.0, 2.0, 3.0, 4.0, 6.0, 10.0, 30.0, 100.0, 1000.0, 1e4], 8, 12, 1e-4)
            .unwrap();
    let ec = build_coefficients(&CouplingSpec::ohmic(p), &p, &g).unwrap();
    let ca = coherent_amplitude(&asymptotic_condition_homogeneous(&p, 1.0, g.clone()).unwrap()).unwrap();
    let worst = window()
        .iter()
        .map(|t| (q_expectation_from_coherent(&ca, &ec, *t).unwrap() - q_homogeneous(&p, 1.0, *t)).abs())
        .fold(0.0, f64::max);
    let vacuum = coherent_amplitude(&ReservoirCondition::quiescent(ConditionKind::Asymptotic, g.clone())).unwrap();
    let v = window().iter().map(|t| q_expectation_from_coherent(&vacuum, &ec, *t).unwrap().abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-3 && v <= 1e-12, format!("max |<q> - q| = {worst:.1e}, vacuum {v:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("figure-1 reproduction", figure_one),
        ("ODE equivalence", ode_equivalence),
        ("continuum-limit convergence", continuum_limit),
        ("memory-kernel residual", memory_kernel),
        ("Green functions", green_functions),
        ("susceptibility", susceptibility_checks),
        ("diagonalizability", diagonalization),
        ("zero mode", zero_mode),
        ("condition maps", condition_maps),
        ("thermal limits", thermal_limits),
        ("coherent-state consistency", coherent_state),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {} [{secs:.2} s]", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("QDAMP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

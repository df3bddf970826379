//! Subcommand implementations. Each writes its files into the output
//! directory and returns `CliError::Verify` when a reported check fails.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qdamp::analytic::{
    homogeneous_trajectory, memory_residual_homogeneous, ode_residual_homogeneous, q_homogeneous, retarded_residual,
    two_sided_residual, x_reservoir_homogeneous, GreenFunctionTwoSided,
};
use qdamp::coupling::susceptibility_quadrature;
use qdamp::io::write_trajectory_csv;
use qdamp::oracle::{build_bath, integrate_with, IntegrateOptions};
use qdamp::quantization::{build_coefficients, frequency_equation_residuals, verify_commutators};
use qdamp::thermal::{thermal_report, ThermalParams};
use qdamp::{
    classify_regime, diagonalizability, kramers_kronig_check, zero_mode_condition, Diagonalizability, SpectralGrid,
    Susceptibility,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{io_err, CliError};
use crate::svg;

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(cfg: &RunConfig, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = cfg.output_dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn require(cfg: &RunConfig, allowed: &[Format]) -> Result<(), CliError> {
    match cfg.format {
        Some(f) if !allowed.contains(&f) => Err(CliError::Config(format!(
            "`format`: {f:?} output is not produced by {}",
            cfg.command.map(|c| c.name()).unwrap_or("this command")
        ))),
        _ => Ok(()),
    }
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize + 1;
    qdamp::Trajectory::uniform_times(lo, hi, n.max(2))
}

/// `q(t)` on `[-t_span, t_span]` and the reservoir raster `X_omega(t)` for
/// `omega in [0, omega_max]`.
pub fn figure1(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    require(cfg, &[Format::Csv, Format::Svg])?;
    let p = cfg.params;
    let span = cfg.t_span;
    let n = ((2.0 * span / cfg.dt).round() as usize + 1).max(2);
    let tr = homogeneous_trajectory(&p, cfg.b, -span, span, n);
    let omegas = qdamp::Trajectory::uniform_times(0.0, cfg.omega_max, cfg.n_modes);
    let times = uniform(-span, span, (2.0 * span / 200.0).max(cfg.dt));
    let x: Vec<Vec<f64>> =
        omegas.iter().map(|w| times.iter().map(|t| x_reservoir_homogeneous(&p, cfg.b, *w, *t)).collect()).collect();

    prepare_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    if cfg.writes(Format::Csv) {
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf)?;
        written.push(write_file(cfg, "qt.csv", &buf)?);
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(["omega", "t", "x"]).map_err(|e| CliError::Io(e.to_string()))?;
        for (w, row) in omegas.iter().zip(&x) {
            for (t, v) in times.iter().zip(row) {
                let rec = [qdamp::io::fmt_f64(*w), qdamp::io::fmt_f64(*t), qdamp::io::fmt_f64(*v)];
                wr.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        let buf = wr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        written.push(write_file(cfg, "xomega.csv", &buf)?);
    }
    if cfg.writes(Format::Svg) {
        let row_step = omegas.len().div_ceil(60).max(1);
        let col_step = times.len().div_ceil(120).max(1);
        let w_sub: Vec<f64> = omegas.iter().step_by(row_step).copied().collect();
        let t_sub: Vec<f64> = times.iter().step_by(col_step).copied().collect();
        let x_sub: Vec<Vec<f64>> =
            x.iter().step_by(row_step).map(|r| r.iter().step_by(col_step).copied().collect()).collect();
        let doc = svg::figure(&tr.t, &tr.q, &w_sub, &t_sub, &x_sub);
        written.push(write_file(cfg, "figure1.svg", doc.as_bytes())?);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Skipped {
    name: &'static str,
    reason: String,
}

#[derive(Debug, Serialize)]
struct VerifyInfo {
    regime: String,
    diagonalizability: Diagonalizability,
    zero_mode_integral: f64,
    zero_mode_condition_satisfied: bool,
    kappa_exponent: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    config: &'a RunConfig,
    info: VerifyInfo,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
    pass: bool,
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
}

impl Suite {
    /// Records `value <= threshold`; a library error counts as a failed check.
    fn add(&mut self, name: &'static str, threshold: f64, value: qdamp::Result<f64>) {
        let value = value.unwrap_or(f64::INFINITY);
        self.checks.push(Check { name, value, threshold, pass: value <= threshold });
    }

    fn skip(&mut self, names: &[&'static str], reason: &str) {
        self.skipped.extend(names.iter().map(|n| Skipped { name: n, reason: reason.to_string() }));
    }
}

fn max_abs<I: IntoIterator<Item = qdamp::Result<f64>>>(it: I) -> qdamp::Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?.abs())))
}

const COEFFICIENT_CHECKS: [&str; 5] = [
    "imaginary_part_identity",
    "commutator_norm",
    "commutator_off_diagonal",
    "frequency_equations",
    "phase_invariance",
];

/// Runs the residual suite and writes `verification.json`.
pub fn verify(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    require(cfg, &[Format::Json])?;
    let p = cfg.params;
    let w2 = p.omega0 * p.omega0;
    let c = cfg.coupling();
    let window: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).filter(|t: &f64| t.abs() > 1e-12).collect();
    let mut s = Suite::default();

    s.add(
        "ode_residual",
        1e-10 * (w2 + p.gamma * p.gamma),
        Ok(window.iter().map(|t| ode_residual_homogeneous(&p, cfg.b, *t).abs()).fold(0.0, f64::max)),
    );
    s.add(
        "memory_kernel_residual",
        1e-7 * w2 * cfg.b.abs().max(1.0),
        max_abs(window.iter().map(|t| memory_residual_homogeneous(&p, cfg.b, *t))),
    );
    let sigma = 1e-3 / p.omega0;
    s.add(
        "green_retarded_residual",
        1e-6,
        max_abs([-0.2, 0.0, 3.0 * sigma, 0.1, 1.0, 4.0].iter().map(|t| retarded_residual(&p, *t, sigma))),
    );
    if p.gamma > 0.0 {
        let mut jump = 0.0f64;
        let mut two = Vec::new();
        for t0 in [-0.7, 0.0, 0.7] {
            let g = GreenFunctionTwoSided::new(p, 0.0);
            let (lo, hi) = (g.derivs(t0 - 1e-9, t0), g.derivs(t0 + 1e-9, t0));
            jump = jump.max((hi[1] - lo[1] - 1.0).abs()).max((hi[0] - lo[0]).abs());
            two.extend(
                [-1.0, t0 - 2.0 * sigma, t0, t0 + sigma, 0.35, 1.5].map(|t| two_sided_residual(&p, t0, t, sigma)),
            );
        }
        s.add("green_two_sided_residual", 1e-6, max_abs(two));
        s.add("green_jump", 1e-6, Ok(jump));
    } else {
        s.skip(&["green_two_sided_residual", "green_jump"], "two-sided Green function is undefined for gamma = 0");
    }

    let diag = diagonalizability(&c, &p)?;
    let zm = zero_mode_condition(&c, &p, 1e-8)?;
    s.checks.push(Check {
        name: "diagonalizability",
        value: diag.zero_mode_integral / w2,
        threshold: 1.0,
        pass: diag.verdict != Diagonalizability::Fails,
    });

    let coupled = p.gamma > 0.0 && cfg.coupling_scale > 0.0;
    if coupled {
        let closed = |w: f64| Complex64::new(cfg.coupling_scale * p.gamma, 0.0) / Complex64::new(p.gamma, -w);
        let sus = (0..=60)
            .map(|k| {
                let w = 0.01 * p.gamma * 5000f64.powf(k as f64 / 60.0);
                susceptibility_quadrature(&c, &p, w).map(|v| (v - closed(w)).norm())
            })
            .collect::<qdamp::Result<Vec<f64>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max));
        s.add("susceptibility_closed_form", 1e-6 * cfg.coupling_scale.max(1.0), sus);
        let kk = SpectralGrid::trapezoid(0.0, 100.0 * p.gamma, 4000, cfg.eta)
            .and_then(|g| kramers_kronig_check(&Susceptibility::evaluate(&c, &p, g.nodes().to_vec())?, &g))
            .map(|r| r.max_abs_error);
        s.add("kramers_kronig", 1e-3 * cfg.coupling_scale.max(1.0), kk);
    } else {
        s.skip(&["susceptibility_closed_form", "kramers_kronig"], "coupling vanishes: oscillator is decoupled");
    }

    if !coupled {
        s.skip(&COEFFICIENT_CHECKS, "coupling vanishes: oscillator is decoupled");
    } else if diag.verdict == Diagonalizability::Fails {
        s.skip(&COEFFICIENT_CHECKS, "coupling fails the diagonalizability condition");
    } else {
        coefficient_checks(cfg, &c, &mut s)?;
    }

    let pass = s.checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        config: cfg,
        info: VerifyInfo {
            regime: format!("{:?}", classify_regime(&p, 1e-12)),
            diagonalizability: diag.verdict,
            zero_mode_integral: diag.zero_mode_integral,
            zero_mode_condition_satisfied: zm.satisfied,
            kappa_exponent: diag.kappa_exponent_estimate,
        },
        checks: s.checks,
        skipped: s.skipped,
        pass,
    };
    prepare_dir(&cfg.output_dir)?;
    let path = write_file(cfg, "verification.json", to_json(&report)?.as_bytes())?;
    if pass {
        Ok(vec![path])
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::Verify(failed.join(", ")))
    }
}

fn coefficient_checks(cfg: &RunConfig, c: &qdamp::CouplingSpec, s: &mut Suite) -> Result<(), CliError> {
    let p = cfg.params;
    let small = SpectralGrid::trapezoid(p.omega0 / 300.0, 40.0 * p.omega0 / 3.0, 4000, cfg.eta)?;
    let ec_small = build_coefficients(c, &p, &small)?;
    s.add("imaginary_part_identity", 1e-9, Ok(ec_small.imag_identity_residual()));
    let wide = SpectralGrid::trapezoid(1e-4, cfg.omega_max, cfg.n_modes, cfg.eta)?;
    let ec = build_coefficients(c, &p, &wide)?;
    let rep = verify_commutators(&ec, c);
    s.add("commutator_norm", 1e-4, rep.as_ref().map(|r| (r.norm_integral - 1.0).abs()).map_err(Clone::clone));
    s.add("commutator_off_diagonal", 1e-8, rep.as_ref().map(|r| r.delta_residual).map_err(Clone::clone));
    s.add(
        "frequency_equations",
        1e-8,
        frequency_equation_residuals(&ec_small, c, 64).map(|r| r.system.max(r.reservoir)),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let theta: Vec<f64> =
        (0..ec.len()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let rotated = ec.clone().with_phases(&theta)?;
    let shift = verify_commutators(&rotated, c).and_then(|r| rep.map(|q| (r.norm_integral - q.norm_integral).abs()));
    s.add("phase_invariance", 1e-12, shift);
    Ok(())
}

#[derive(Serialize)]
struct ThermalOutput<'a> {
    config: &'a RunConfig,
    report: qdamp::thermal::ThermalReport,
}

pub fn thermal(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    require(cfg, &[Format::Json])?;
    if cfg.params.gamma == 0.0 || cfg.coupling_scale == 0.0 {
        return Err(CliError::Config(
            "`gamma`/`coupling-scale`: thermal observables need a nonzero coupling; use a small gamma for the free limit".into(),
        ));
    }
    let tp = ThermalParams::new(cfg.temperature, cfg.eta)?;
    let report = thermal_report(&cfg.params, &cfg.coupling(), &tp)?;
    prepare_dir(&cfg.output_dir)?;
    let out = ThermalOutput { config: cfg, report };
    Ok(vec![write_file(cfg, "thermal.json", to_json(&out)?.as_bytes())?])
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    config: &'a RunConfig,
    max_abs_dq: f64,
    threshold: f64,
    pass: bool,
    max_relative_energy_drift: f64,
    samples: usize,
}

pub const ORACLE_THRESHOLD: f64 = 1e-2;

/// Integrates the discretized bath from rest with `(q, qdot) = (b, 0)` and
/// compares against the closed-form trajectory.
pub fn oracle_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    require(cfg, &[Format::Csv, Format::Json])?;
    let p = cfg.params;
    let grid = SpectralGrid::midpoint(cfg.omega_max, cfg.n_modes, cfg.eta)?;
    let bath = build_bath(&cfg.coupling(), &grid)?.with_system(cfg.b, 0.0);
    let stride = ((0.01 / cfg.dt).round() as usize).max(1);
    let run = integrate_with(
        &bath,
        &p,
        (0.0, cfg.t_span),
        cfg.dt,
        &IntegrateOptions { record_stride: stride, record_modes: Vec::new() },
    )?;
    let tr = &run.trajectory;
    let analytic: Vec<f64> = tr.t.iter().map(|t| q_homogeneous(&p, cfg.b, *t)).collect();
    let max_abs_dq = tr.q.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let pass = max_abs_dq <= ORACLE_THRESHOLD;

    prepare_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    if cfg.writes(Format::Csv) {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(["t", "q_oracle", "q_analytic", "delta"]).map_err(|e| CliError::Io(e.to_string()))?;
        for ((t, q), a) in tr.t.iter().zip(&tr.q).zip(&analytic) {
            let rec = [*t, *q, *a, q - a].map(qdamp::io::fmt_f64);
            wr.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let buf = wr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        written.push(write_file(cfg, "oracle.csv", &buf)?);
    }
    if cfg.writes(Format::Json) {
        let out = OracleOutput {
            config: cfg,
            max_abs_dq,
            threshold: ORACLE_THRESHOLD,
            pass,
            max_relative_energy_drift: run.max_relative_drift,
            samples: tr.len(),
        };
        written.push(write_file(cfg, "oracle_compare.json", to_json(&out)?.as_bytes())?);
    }
    if pass {
        Ok(written)
    } else {
        Err(CliError::Verify(format!("max |dq| = {max_abs_dq:e} exceeds {ORACLE_THRESHOLD:e}")))
    }
}

#[derive(Serialize)]
struct CoefficientOutput<'a> {
    config: &'a RunConfig,
    norm_integral: f64,
    off_diagonal_residual: f64,
    tail: f64,
    pole_term: f64,
    threshold: f64,
    pass: bool,
}

pub const NORM_THRESHOLD: f64 = 1e-4;

/// Eigenmode coefficients on `[1e-4, omega_max]` with the normalization echoed.
pub fn coefficients(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    require(cfg, &[Format::Csv, Format::Json])?;
    let p = cfg.params;
    let c = cfg.coupling();
    let grid = SpectralGrid::trapezoid(1e-4, cfg.omega_max, cfg.n_modes, cfg.eta)?;
    let ec = build_coefficients(&c, &p, &grid)?;
    let rep = verify_commutators(&ec, &c)?;
    let pass = (rep.norm_integral - 1.0).abs() <= NORM_THRESHOLD;

    prepare_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    if cfg.writes(Format::Csv) {
        let mut buf = Vec::new();
        ec.write_csv(&mut buf)?;
        written.push(write_file(cfg, "coefficients.csv", &buf)?);
    }
    if cfg.writes(Format::Json) {
        let out = CoefficientOutput {
            config: cfg,
            norm_integral: rep.norm_integral,
            off_diagonal_residual: rep.delta_residual,
            tail: rep.tail,
            pole_term: rep.pole_term,
            threshold: NORM_THRESHOLD,
            pass,
        };
        written.push(write_file(cfg, "coefficients.json", to_json(&out)?.as_bytes())?);
    }
    if pass {
        Ok(written)
    } else {
        Err(CliError::Verify(format!(
            "normalization integral {} differs from 1 by more than {NORM_THRESHOLD:e}",
            rep.norm_integral
        )))
    }
}

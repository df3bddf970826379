//! Continuum-reservoir model of the damped quantum harmonic oscillator.
//!
//! The system oscillator (frequency `omega0`) couples linearly to a continuum
//! of reservoir oscillators through `alpha(omega)`. For the Ohmic coupling
//! the reduced dynamics is friction proportional to velocity with rate
//! `gamma`. The crate provides closed-form trajectories and Green functions,
//! the effective susceptibility, diagonalizability tests, coherent-state and
//! thermal expectation values, and a discretized-bath integrator used as an
//! independent check.
//!
//! Units: hbar = k_B = 1.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod coupling;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod quantization;
pub mod thermal;

pub use coupling::{
    diagonalizability, imaginary_axis_denominator, kramers_kronig_check, pv_kernel_integral, susceptibility,
    zero_mode_condition, CouplingKind, CouplingSpec, Diagonalizability, DiagonalizabilityReport, KramersKronigReport,
    Susceptibility, ZeroModeReport,
};
pub use error::{Error, Result};
pub use grid::{default_eta, SpectralGrid};
pub use model::{
    classify_regime, derived_rates, total_energy, ConditionKind, DerivedRates, EnergyReport, InstantState,
    OscillatorParams, Regime, ReservoirCondition, Spectrum, Trajectory,
};

//! Run configuration: command-line flags layered over an optional
//! `key=value` file, validated before any computation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qdamp::OscillatorParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Plain `key=value` file; flags take precedence over its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Initial displacement of the symmetric solution.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub temperature: Option<f64>,
    /// Pole regulator.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long = "omega-max", global = true, allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    #[arg(long = "n-modes", global = true)]
    pub n_modes: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Half-width of the figure window, or end time of oracle runs.
    #[arg(long = "t-span", global = true, allow_negative_numbers = true)]
    pub t_span: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplies the Ohmic coupling strength.
    #[arg(long = "coupling-scale", global = true, allow_negative_numbers = true)]
    pub coupling_scale: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Restrict written files to one format.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Figure1,
    Verify,
    Thermal,
    OracleCompare,
    Coefficients,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Figure1 => "figure1",
            Command::Verify => "verify",
            Command::Thermal => "thermal",
            Command::OracleCompare => "oracle-compare",
            Command::Coefficients => "coefficients",
        }
    }

    /// `(omega_max, n_modes, dt, t_span)` used when neither flag nor file sets them.
    fn defaults(self) -> (f64, usize, f64, f64) {
        match self {
            Command::Figure1 => (10.0, 101, 0.01, 10.0),
            Command::OracleCompare => (100.0, 4000, 5e-4, 5.0),
            Command::Verify | Command::Coefficients => (500.0, 40_000, 1e-3, 5.0),
            Command::Thermal => (100.0, 4000, 1e-3, 5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    #[serde(skip)]
    pub command: Option<Command>,
    pub params: OscillatorParams,
    pub b: f64,
    pub temperature: f64,
    pub eta: f64,
    pub omega_max: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t_span: f64,
    pub seed: u64,
    pub coupling_scale: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn writes(&self, f: Format) -> bool {
        self.format.is_none_or(|g| g == f)
    }

    pub fn coupling(&self) -> qdamp::CouplingSpec {
        qdamp::CouplingSpec::ohmic(self.params).scaled(self.coupling_scale)
    }
}

const KEYS: &[&str] = &[
    "omega0",
    "gamma",
    "b",
    "temperature",
    "eta",
    "omega-max",
    "n-modes",
    "dt",
    "t-span",
    "seed",
    "coupling-scale",
    "out",
    "format",
];

/// Parses `key=value` lines; `#` starts a comment, keys accept `_` for `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value, got `{line}`", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key `{key}`", k + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn from_file<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))))
        .transpose()
}

fn check(ok: bool, field: &str, value: impl std::fmt::Display, rule: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{field}` = {value}: {rule}")))
    }
}

fn read_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    parse_config_file(&text)
}

/// Merges flags over the config file over defaults and validates every field.
pub fn resolve(command: Command, o: &Overrides) -> Result<RunConfig, CliError> {
    let file = match &o.config {
        Some(p) => read_file(p)?,
        None => BTreeMap::new(),
    };
    let (d_wmax, d_n, d_dt, d_span) = command.defaults();
    let omega0 = o.omega0.or(from_file(&file, "omega0")?).unwrap_or(3.0);
    let gamma = o.gamma.or(from_file(&file, "gamma")?).unwrap_or(1.0);
    let b = o.b.or(from_file(&file, "b")?).unwrap_or(1.0);
    let temperature = o.temperature.or(from_file(&file, "temperature")?).unwrap_or(0.0);
    let eta = o.eta.or(from_file(&file, "eta")?).unwrap_or(1e-4);
    let omega_max = o.omega_max.or(from_file(&file, "omega-max")?).unwrap_or(d_wmax);
    let n_modes = o.n_modes.or(from_file(&file, "n-modes")?).unwrap_or(d_n);
    let dt = o.dt.or(from_file(&file, "dt")?).unwrap_or(d_dt);
    let t_span = o.t_span.or(from_file(&file, "t-span")?).unwrap_or(d_span);
    let seed = o.seed.or(from_file(&file, "seed")?).unwrap_or(0);
    let coupling_scale = o.coupling_scale.or(from_file(&file, "coupling-scale")?).unwrap_or(1.0);
    let output_dir = o.out.clone().or(from_file(&file, "out")?).unwrap_or_else(|| PathBuf::from("qdamp-out"));
    let format = match (o.format, file.get("format")) {
        (Some(f), _) => Some(f),
        (None, Some(s)) => {
            Some(Format::parse(s).ok_or_else(|| CliError::Config(format!("`format`: unknown format `{s}`")))?)
        }
        (None, None) => None,
    };

    check(omega0.is_finite() && omega0 > 0.0, "omega0", omega0, "must be finite and > 0")?;
    check(gamma.is_finite() && gamma >= 0.0, "gamma", gamma, "must be finite and >= 0")?;
    check(b.is_finite(), "b", b, "must be finite")?;
    check(temperature.is_finite() && temperature >= 0.0, "temperature", temperature, "must be finite and >= 0")?;
    check(eta.is_finite() && eta > 0.0, "eta", eta, "must be finite and > 0")?;
    check(omega_max.is_finite() && omega_max > 0.0, "omega-max", omega_max, "must be finite and > 0")?;
    check(n_modes >= 2, "n-modes", n_modes, "must be at least 2")?;
    check(dt.is_finite() && dt > 0.0, "dt", dt, "must be finite and > 0")?;
    check(t_span.is_finite() && t_span > 0.0, "t-span", t_span, "must be finite and > 0")?;
    check(
        coupling_scale.is_finite() && coupling_scale >= 0.0,
        "coupling-scale",
        coupling_scale,
        "must be finite and >= 0",
    )?;
    if command == Command::Figure1 {
        check(dt <= t_span, "dt", dt, "must not exceed t-span")?;
    }
    let params = OscillatorParams::new(omega0, gamma).map_err(|e| CliError::Config(e.to_string()))?;

    Ok(RunConfig {
        command: Some(command),
        params,
        b,
        temperature,
        eta,
        omega_max,
        n_modes,
        dt,
        t_span,
        seed,
        coupling_scale,
        output_dir,
        format,
    })
}

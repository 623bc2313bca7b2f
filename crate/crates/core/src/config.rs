//! Run configuration: `section.key = value` lines, `#` starts a comment.
//!
//! ```text
//! # δ = 2 g_A
//! model.delta = 0.2
//! cavity.gamma_factor = 1
//! run.states = 500
//! sweep.gamma_factors = 0, 0.5, 1, 1.5, 2
//! ```
//!
//! Every key has a default (see [`KEYS`]) and unknown keys are rejected.
//! Later assignments override earlier ones, so command-line overrides are
//! applied with [`RunConfig::set`] after the file is read.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{
    FidelityStrategy, FluctuationParameter, GateOptions, VerifyOptions, DEFAULT_STATE_COUNT,
    DEFAULT_STEP_BUDGET,
};
use crate::hamiltonians::Mode;
use crate::lindblad::DEFAULT_SUBSTEPS;
use crate::model::{gamma0_mev, DerivedParams, DotParams, SystemParams};
use crate::qcore::{FockConfig, C64};

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("dot_a.g", "0.10", "cavity coupling of dot A, meV"),
    ("dot_a.omega", "10", "Rabi frequency of the Δ-detuned drive on dot A, meV"),
    ("dot_a.omega_prime", "10", "Rabi frequency of the −Δ'-detuned drive on dot A, meV"),
    ("dot_a.delta_laser", "200", "drive detuning Δ of dot A, meV"),
    ("dot_a.delta_laser_prime", "200", "drive detuning Δ' of dot A, meV"),
    ("dot_a.delta_cavity", "delta_laser + model.delta", "cavity detuning Δ^C of dot A, meV"),
    ("dot_b.g", "0.08", "cavity coupling of dot B, meV"),
    ("dot_b.omega", "13.75", "Rabi frequency of the Δ-detuned drive on dot B, meV"),
    ("dot_b.omega_prime", "13.75", "Rabi frequency of the −Δ'-detuned drive on dot B, meV"),
    ("dot_b.delta_laser", "220", "drive detuning Δ of dot B, meV"),
    ("dot_b.delta_laser_prime", "220", "drive detuning Δ' of dot B, meV"),
    ("dot_b.delta_cavity", "delta_laser + model.delta", "cavity detuning Δ^C of dot B, meV"),
    ("model.delta", "0.025", "δ = Δ^C − Δ used for cavity detunings not set explicitly, meV"),
    ("cavity.gamma", "0", "cavity decay rate as an energy, meV"),
    ("cavity.gamma_factor", "unset", "cavity decay in multiples of (5 ns)⁻¹; excludes cavity.gamma"),
    ("cavity.fock_cutoff", "12", "number of retained Fock levels"),
    ("gate.target_phi", "1.5707963267948966", "target conditional phase Φ, rad"),
    ("gate.lambda_tolerance", "1e-6", "largest accepted |λ_A − λ_B|, meV"),
    ("integrator.substeps", "200", "RK4 steps per period of the fastest rotation"),
    ("integrator.strict", "false", "treat truncation-unsafe runs as errors"),
    ("integrator.step_budget", "50000000", "refuse runs needing more RK4 steps than this"),
    ("run.mode", "effective", "effective or full Hamiltonian"),
    ("run.strategy", "sector-kernel", "sector-kernel or per-state fidelity evaluation"),
    ("run.seed", "20240601", "seed of the random input states"),
    ("run.states", "500", "number of random input states"),
    ("run.complex_states", "false", "sample complex instead of real input amplitudes"),
    ("run.workers", "1", "worker threads (0 = one per core); never changes results"),
    ("run.output", "unset", "output CSV path; standard output when unset"),
    ("run.trajectory", "unset", "gate: CSV path for the trajectory of the first input state"),
    ("run.trajectory_every", "50", "gate: RK4 steps between trajectory rows"),
    ("phases.loops", "1", "number of loops in the phase time series"),
    ("phases.samples", "1000", "samples in the phase time series"),
    ("sweep.gamma_factors", "0, 0.5, 1, 1.5, 2", "decay grid in multiples of (5 ns)⁻¹"),
    ("sweep.zetas", "0, 0.01, 0.02, 0.03, 0.04", "fluctuation grid ζ"),
    ("sweep.parameter", "all", "g, omega, delta_laser, delta_cavity, epsilon or all"),
    ("verify.regime", "reduced", "reduced (Δ/Ω = 20) or configured parameters"),
    ("verify.delta", "0.05", "δ of the reduced regime, meV"),
    ("verify.fock_cutoff", "8", "Fock levels in the reduced regime"),
    ("verify.scales", "1, 2, 4", "detuning scale points"),
    ("verify.loops", "1", "loops integrated per scale point"),
    ("verify.step_budget", "20000000", "refuse comparisons needing more RK4 steps than this"),
    ("check.tolerance", "unset", "override every upper-bound tolerance of the check suite"),
    ("check.inject_fault", "false", "flip the sign of θ_gg inside the check suite"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyRegime {
    Reduced,
    Configured,
}

/// Which fluctuation classes a sweep covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterSelection {
    All,
    One(FluctuationParameter),
}

impl ParameterSelection {
    pub fn parameters(self) -> Vec<FluctuationParameter> {
        match self {
            Self::All => FluctuationParameter::ALL.to_vec(),
            Self::One(p) => vec![p],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dot_a: DotParams,
    pub dot_b: DotParams,
    dot_a_cavity_set: bool,
    dot_b_cavity_set: bool,
    pub delta: f64,
    pub gamma: f64,
    pub gamma_factor: Option<f64>,
    pub fock_cutoff: usize,
    pub target_phi: f64,
    pub lambda_tolerance: f64,
    pub substeps: u32,
    pub strict: bool,
    pub step_budget: u64,
    pub mode: Mode,
    pub strategy: FidelityStrategy,
    pub seed: u64,
    pub states: usize,
    pub complex_states: bool,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub trajectory_every: u64,
    pub phase_loops: u64,
    pub phase_samples: usize,
    pub gamma_factors: Vec<f64>,
    pub zetas: Vec<f64>,
    pub sweep_parameter: ParameterSelection,
    pub verify_regime: VerifyRegime,
    pub verify_delta: f64,
    pub verify_fock_cutoff: usize,
    pub verify_scales: Vec<f64>,
    pub verify_loops: u64,
    pub verify_step_budget: u64,
    pub check_tolerance: Option<f64>,
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let delta = 0.025;
        Self {
            dot_a: DotParams::symmetric(0.10, 10.0, 200.0, delta),
            dot_b: DotParams::symmetric(0.08, 13.75, 220.0, delta),
            dot_a_cavity_set: false,
            dot_b_cavity_set: false,
            delta,
            gamma: 0.0,
            gamma_factor: None,
            fock_cutoff: 12,
            target_phi: PI / 2.0,
            lambda_tolerance: 1e-6,
            substeps: DEFAULT_SUBSTEPS,
            strict: false,
            step_budget: DEFAULT_STEP_BUDGET,
            mode: Mode::Effective,
            strategy: FidelityStrategy::SectorKernel,
            seed: 20240601,
            states: DEFAULT_STATE_COUNT,
            complex_states: false,
            workers: 1,
            output: None,
            trajectory: None,
            trajectory_every: 50,
            phase_loops: 1,
            phase_samples: 1000,
            gamma_factors: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            zetas: vec![0.0, 0.01, 0.02, 0.03, 0.04],
            sweep_parameter: ParameterSelection::All,
            verify_regime: VerifyRegime::Reduced,
            verify_delta: 0.05,
            verify_fock_cutoff: 8,
            verify_scales: vec![1.0, 2.0, 4.0],
            verify_loops: 1,
            verify_step_budget: 20_000_000,
            check_tolerance: None,
            inject_fault: false,
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Error {
    Error::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn real(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|_| invalid(key, value, "expected a number"))?;
    if !x.is_finite() {
        return Err(invalid(key, value, "must be finite"));
    }
    Ok(x)
}

fn non_negative(key: &str, value: &str) -> Result<f64> {
    let x = real(key, value)?;
    if x < 0.0 {
        return Err(invalid(key, value, "must be ≥ 0"));
    }
    Ok(x)
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let x = real(key, value)?;
    if x <= 0.0 {
        return Err(invalid(key, value, "must be > 0"));
    }
    Ok(x)
}

fn integer<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(key, value, "expected a non-negative integer"))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| real(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(invalid(key, value, "expected a comma-separated list of numbers"));
    }
    Ok(items)
}

impl RunConfig {
    /// Parses a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigSyntax {
                    line: i + 1,
                    message: format!("expected `section.key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if !key.contains('.') {
                return Err(Error::ConfigSyntax {
                    line: i + 1,
                    message: format!("key `{key}` has no section"),
                });
            }
            self.set(key, value.trim())?;
        }
        Ok(())
    }

    /// Assigns one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (section, name) = key.split_once('.').ok_or_else(|| Error::UnknownKey(key.into()))?;
        match section {
            "dot_a" | "dot_b" => {
                let (dot, cavity_set) = if section == "dot_a" {
                    (&mut self.dot_a, &mut self.dot_a_cavity_set)
                } else {
                    (&mut self.dot_b, &mut self.dot_b_cavity_set)
                };
                match name {
                    "g" => dot.g = real(key, value)?,
                    "omega" => dot.omega = C64::new(real(key, value)?, 0.0),
                    "omega_prime" => dot.omega_prime = C64::new(real(key, value)?, 0.0),
                    "delta_laser" => dot.delta_laser = real(key, value)?,
                    "delta_laser_prime" => dot.delta_laser_prime = real(key, value)?,
                    "delta_cavity" => {
                        dot.delta_cavity = real(key, value)?;
                        *cavity_set = true;
                    }
                    _ => return Err(Error::UnknownKey(key.into())),
                }
            }
            "model" => match name {
                "delta" => self.delta = real(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "cavity" => match name {
                "gamma" => self.gamma = non_negative(key, value)?,
                "gamma_factor" => self.gamma_factor = Some(non_negative(key, value)?),
                "fock_cutoff" => {
                    let n: usize = integer(key, value)?;
                    FockConfig::new(n).map_err(|e| invalid(key, value, e.to_string()))?;
                    self.fock_cutoff = n;
                }
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "gate" => match name {
                "target_phi" => self.target_phi = positive(key, value)?,
                "lambda_tolerance" => self.lambda_tolerance = positive(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "integrator" => match name {
                "substeps" => {
                    let n: u32 = integer(key, value)?;
                    if n == 0 {
                        return Err(invalid(key, value, "must be ≥ 1"));
                    }
                    self.substeps = n;
                }
                "strict" => self.strict = boolean(key, value)?,
                "step_budget" => self.step_budget = integer(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "run" => match name {
                "mode" => self.mode = value.parse().map_err(|e: Error| invalid(key, value, e.to_string()))?,
                "strategy" => {
                    self.strategy = value.parse().map_err(|e: Error| invalid(key, value, e.to_string()))?
                }
                "seed" => self.seed = integer(key, value)?,
                "states" => {
                    let n: usize = integer(key, value)?;
                    if n == 0 {
                        return Err(invalid(key, value, "must be ≥ 1"));
                    }
                    self.states = n;
                }
                "complex_states" => self.complex_states = boolean(key, value)?,
                "workers" => self.workers = integer(key, value)?,
                "output" => self.output = Some(PathBuf::from(value)),
                "trajectory" => self.trajectory = Some(PathBuf::from(value)),
                "trajectory_every" => {
                    let n: u64 = integer(key, value)?;
                    if n == 0 {
                        return Err(invalid(key, value, "must be ≥ 1"));
                    }
                    self.trajectory_every = n;
                }
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "phases" => match name {
                "loops" => self.phase_loops = integer(key, value)?,
                "samples" => self.phase_samples = integer(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "sweep" => match name {
                "gamma_factors" => {
                    let v = list(key, value)?;
                    if v.iter().any(|x| *x < 0.0) {
                        return Err(invalid(key, value, "decay multiples must be ≥ 0"));
                    }
                    self.gamma_factors = v;
                }
                "zetas" => {
                    let v = list(key, value)?;
                    if v.iter().any(|x| !(0.0..1.0).contains(x)) {
                        return Err(invalid(key, value, "ζ must lie in [0, 1)"));
                    }
                    self.zetas = v;
                }
                "parameter" => {
                    self.sweep_parameter = if value == "all" {
                        ParameterSelection::All
                    } else {
                        ParameterSelection::One(
                            value.parse().map_err(|e: Error| invalid(key, value, e.to_string()))?,
                        )
                    }
                }
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "verify" => match name {
                "regime" => {
                    self.verify_regime = match value {
                        "reduced" => VerifyRegime::Reduced,
                        "configured" => VerifyRegime::Configured,
                        _ => return Err(invalid(key, value, "expected reduced or configured")),
                    }
                }
                "delta" => self.verify_delta = real(key, value)?,
                "fock_cutoff" => {
                    let n: usize = integer(key, value)?;
                    FockConfig::new(n).map_err(|e| invalid(key, value, e.to_string()))?;
                    self.verify_fock_cutoff = n;
                }
                "scales" => {
                    let v = list(key, value)?;
                    if v.iter().any(|x| *x <= 0.0) {
                        return Err(invalid(key, value, "scales must be > 0"));
                    }
                    self.verify_scales = v;
                }
                "loops" => self.verify_loops = integer(key, value)?,
                "step_budget" => self.verify_step_budget = integer(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            "check" => match name {
                "tolerance" => self.check_tolerance = Some(positive(key, value)?),
                "inject_fault" => self.inject_fault = boolean(key, value)?,
                _ => return Err(Error::UnknownKey(key.into())),
            },
            _ => return Err(Error::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Cavity decay in meV after resolving `cavity.gamma_factor`.
    pub fn resolved_gamma(&self) -> Result<f64> {
        match self.gamma_factor {
            Some(f) if self.gamma != 0.0 => Err(invalid(
                "cavity.gamma_factor",
                &f.to_string(),
                "cavity.gamma is also set; use one of them",
            )),
            Some(f) => Ok(f * gamma0_mev()),
            None => Ok(self.gamma),
        }
    }

    pub fn fock(&self) -> Result<FockConfig> {
        FockConfig::new(self.fock_cutoff)
    }

    pub fn system(&self) -> Result<SystemParams> {
        let mut dot_a = self.dot_a;
        let mut dot_b = self.dot_b;
        if !self.dot_a_cavity_set {
            dot_a.delta_cavity = dot_a.delta_laser + self.delta;
        }
        if !self.dot_b_cavity_set {
            dot_b.delta_cavity = dot_b.delta_laser + self.delta;
        }
        Ok(SystemParams {
            dot_a,
            dot_b,
            gamma: self.resolved_gamma()?,
            fock: self.fock()?,
        })
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        DerivedParams::derive(&self.system()?, self.target_phi, self.lambda_tolerance)
    }

    pub fn gate_options(&self) -> GateOptions {
        GateOptions {
            mode: self.mode,
            strategy: self.strategy,
            substeps: self.substeps,
            strict: self.strict,
            workers: self.workers,
            step_budget: self.step_budget,
        }
    }

    /// System used by `verify-effective`.
    pub fn verify_system(&self) -> Result<SystemParams> {
        match self.verify_regime {
            VerifyRegime::Reduced => Ok(SystemParams::reduced(
                self.verify_delta,
                0.0,
                FockConfig::new(self.verify_fock_cutoff)?,
            )),
            VerifyRegime::Configured => self.system(),
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            scales: self.verify_scales.clone(),
            loops: self.verify_loops,
            substeps: self.substeps,
            step_budget: self.verify_step_budget,
            workers: self.workers,
        }
    }
}

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{HamiltonianGenerator, Mode, Sector};
use crate::lindblad::{
    evolve, evolve_sector_kernel, fidelity, DensityMatrix, IntegratorConfig, DEFAULT_SUBSTEPS,
    TOP_POPULATION_LIMIT,
};
use crate::model::{DerivedParams, EffectiveParams, Schedule, SystemParams};
use crate::qcore::C64;

use super::states::{embed_sectors, target_amplitudes, target_state, InitialStateSet};

/// Total RK4 steps (over all states) a single fidelity run may take before
/// it is refused.
pub const DEFAULT_STEP_BUDGET: u64 = 50_000_000;

/// How the final density matrices are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityStrategy {
    /// Effective mode only. The effective dynamics never mix qubit sectors,
    /// so every block of ρ(T) is a fixed field-space kernel times `c_s c_s'*`.
    /// Six kernels are integrated once and shared by all input states.
    SectorKernel,
    /// One full density-matrix integration per input state.
    PerState,
}

impl FromStr for FidelityStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sector-kernel" | "sector_kernel" => Ok(Self::SectorKernel),
            "per-state" | "per_state" => Ok(Self::PerState),
            other => Err(Error::InvalidParameter(format!(
                "unknown fidelity strategy `{other}` (expected sector-kernel or per-state)"
            ))),
        }
    }
}

impl fmt::Display for FidelityStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SectorKernel => "sector-kernel",
            Self::PerState => "per-state",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOptions {
    pub mode: Mode,
    pub strategy: FidelityStrategy,
    pub substeps: u32,
    pub strict: bool,
    /// Worker threads; 0 means one per core. Results do not depend on it.
    pub workers: usize,
    pub step_budget: u64,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Effective,
            strategy: FidelityStrategy::SectorKernel,
            substeps: DEFAULT_SUBSTEPS,
            strict: false,
            workers: 1,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

impl GateOptions {
    /// The strategy that will actually run: full mode has no sector kernels.
    pub fn effective_strategy(&self) -> FidelityStrategy {
        match self.mode {
            Mode::Full => FidelityStrategy::PerState,
            Mode::Effective => self.strategy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDiagnostics {
    pub steps: u64,
    pub dt: f64,
    pub max_trace_drift: f64,
    pub max_top_population: f64,
    pub truncation_unsafe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateFidelity {
    pub mean: f64,
    /// Sample standard deviation over √n.
    pub std_error: f64,
    pub min: f64,
    pub per_state: Vec<f64>,
    pub mode: Mode,
    pub strategy: FidelityStrategy,
    pub diagnostics: GateDiagnostics,
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Mean fidelity of the scheduled gate over `states` with cavity decay
/// `gamma`.
pub fn run_gate_fidelity(
    sys: &SystemParams,
    derived: &DerivedParams,
    gamma: f64,
    states: &InitialStateSet,
    opts: &GateOptions,
) -> Result<GateFidelity> {
    run_gate_fidelity_with(sys, &derived.effective, &derived.schedule, gamma, states, opts)
}

/// [`run_gate_fidelity`] with the dynamics (`sys`, `effective`) decoupled
/// from the plan (`schedule`). Used for miscalibrated runs.
pub fn run_gate_fidelity_with(
    sys: &SystemParams,
    effective: &EffectiveParams,
    schedule: &Schedule,
    gamma: f64,
    states: &InitialStateSet,
    opts: &GateOptions,
) -> Result<GateFidelity> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("decay rate must be ≥ 0, got {gamma}")));
    }
    if states.is_empty() {
        return Err(Error::InvalidParameter("no input states".into()));
    }
    let cfg = IntegratorConfig::new(schedule.gate_time)
        .with_substeps(opts.substeps)
        .strict(opts.strict);
    let pool = thread_pool(opts.workers)?;
    let strategy = opts.effective_strategy();
    let (per_state, diagnostics) = match strategy {
        FidelityStrategy::SectorKernel => {
            by_sector_kernels(sys, effective, schedule, gamma, states, &cfg, opts, &pool)?
        }
        FidelityStrategy::PerState => {
            by_state(sys, effective, schedule, gamma, states, &cfg, opts, &pool)?
        }
    };
    let (mean, std_error, min) = summarize(&per_state);
    Ok(GateFidelity {
        mean,
        std_error,
        min,
        per_state,
        mode: opts.mode,
        strategy,
        diagnostics,
    })
}

/// Mean, standard error and minimum, reduced in index order.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (n - 1.0);
        var.sqrt() / n.sqrt()
    } else {
        0.0
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, std_error, min)
}

const KERNEL_PAIRS: [(u8, u8); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[allow(clippy::too_many_arguments)]
fn by_sector_kernels(
    sys: &SystemParams,
    effective: &EffectiveParams,
    schedule: &Schedule,
    gamma: f64,
    states: &InitialStateSet,
    cfg: &IntegratorConfig,
    opts: &GateOptions,
    pool: &rayon::ThreadPool,
) -> Result<(Vec<f64>, GateDiagnostics)> {
    let estimated = cfg.resolve(effective.delta)?.0 * KERNEL_PAIRS.len() as u64;
    if estimated > opts.step_budget {
        return Err(Error::Intractable {
            estimated,
            budget: opts.step_budget,
        });
    }
    let kernels = pool.install(|| {
        KERNEL_PAIRS
            .par_iter()
            .map(|&w| evolve_sector_kernel(effective, w, gamma, sys.fock, cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    // vacuum element of every block kernel, k[w][w']
    let mut k = [[C64::new(0.0, 0.0); 3]; 3];
    let mut diagnostics = GateDiagnostics {
        steps: kernels[0].steps,
        dt: kernels[0].dt,
        max_trace_drift: 0.0,
        max_top_population: 0.0,
        truncation_unsafe: false,
    };
    for kernel in &kernels {
        let (w, v) = (kernel.weights.0 as usize, kernel.weights.1 as usize);
        k[w][v] = kernel.kernel[[0, 0]];
        k[v][w] = kernel.kernel[[0, 0]].conj();
        if w == v {
            diagnostics.max_trace_drift = diagnostics.max_trace_drift.max(kernel.max_trace_drift);
            diagnostics.max_top_population =
                diagnostics.max_top_population.max(kernel.max_top_population);
        }
    }
    diagnostics.truncation_unsafe = diagnostics.max_top_population > TOP_POPULATION_LIMIT;

    let weights = Sector::ALL.map(|s| s.weight() as usize);
    let per_state = (0..states.len())
        .map(|i| {
            let c = states.amplitudes(i);
            let t = target_amplitudes(&c, schedule.phi);
            let mut f = C64::new(0.0, 0.0);
            for s in 0..4 {
                for r in 0..4 {
                    f += t[s].conj() * c[s] * c[r].conj() * k[weights[s]][weights[r]] * t[r];
                }
            }
            f.re
        })
        .collect();
    Ok((per_state, diagnostics))
}

#[allow(clippy::too_many_arguments)]
fn by_state(
    sys: &SystemParams,
    effective: &EffectiveParams,
    schedule: &Schedule,
    gamma: f64,
    states: &InitialStateSet,
    cfg: &IntegratorConfig,
    opts: &GateOptions,
    pool: &rayon::ThreadPool,
) -> Result<(Vec<f64>, GateDiagnostics)> {
    let generator = HamiltonianGenerator::build(opts.mode, sys, effective);
    let estimated = cfg.estimate_steps(&generator)?.saturating_mul(states.len() as u64);
    if estimated > opts.step_budget {
        return Err(Error::Intractable {
            estimated,
            budget: opts.step_budget,
        });
    }
    let fock = sys.fock;
    let runs = pool.install(|| {
        (0..states.len())
            .into_par_iter()
            .map(|i| {
                let c = states.amplitudes(i);
                let rho0 = DensityMatrix::pure(&embed_sectors(&c, fock));
                let out = evolve(&rho0, &generator, gamma, cfg)?;
                let f = fidelity(&out.rho, &target_state(&c, schedule.phi, fock))?;
                Ok((f, out.diagnostics))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut diagnostics = GateDiagnostics {
        steps: runs[0].1.steps,
        dt: runs[0].1.dt,
        max_trace_drift: 0.0,
        max_top_population: 0.0,
        truncation_unsafe: false,
    };
    for (_, d) in &runs {
        diagnostics.max_trace_drift = diagnostics.max_trace_drift.max(d.max_trace_drift);
        diagnostics.max_top_population = diagnostics.max_top_population.max(d.max_top_population);
        diagnostics.truncation_unsafe |= d.truncation_unsafe;
    }
    Ok((runs.into_iter().map(|(f, _)| f).collect(), diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gamma0_mev;
    use crate::qcore::FockConfig;
    use std::f64::consts::PI;

    fn setup(delta: f64, n: usize) -> (SystemParams, DerivedParams) {
        let sys = SystemParams::paper(delta, 0.0, FockConfig::new(n).unwrap());
        let d = DerivedParams::derive(&sys, PI / 2.0, 1e-6).unwrap();
        (sys, d)
    }

    #[test]
    fn lossless_gate_is_ideal() {
        let (sys, d) = setup(0.025, 12);
        let states = InitialStateSet::generate(5, 50).unwrap();
        let r = run_gate_fidelity(&sys, &d, 0.0, &states, &GateOptions::default()).unwrap();
        assert!(r.mean >= 0.9999, "{}", r.mean);
        assert!(r.min >= 0.9999);
        assert!(!r.diagnostics.truncation_unsafe);
    }

    #[test]
    fn dark_sector_is_untouched_by_decay() {
        let (sys, d) = setup(0.025, 12);
        let states = InitialStateSet::from_tuples(&[[1.0, 0.0, 0.0, 0.0]]).unwrap();
        for gamma in [0.0, gamma0_mev(), 10.0 * gamma0_mev()] {
            let r = run_gate_fidelity(&sys, &d, gamma, &states, &GateOptions::default()).unwrap();
            assert!((r.mean - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kernels_agree_with_per_state_integration() {
        let (sys, d) = setup(0.025, 10);
        let states = InitialStateSet::generate(17, 3).unwrap();
        let gamma = 2.0 * gamma0_mev();
        let kern = run_gate_fidelity(&sys, &d, gamma, &states, &GateOptions::default()).unwrap();
        let opts = GateOptions {
            strategy: FidelityStrategy::PerState,
            workers: 3,
            ..GateOptions::default()
        };
        let full = run_gate_fidelity(&sys, &d, gamma, &states, &opts).unwrap();
        for (a, b) in kern.per_state.iter().zip(&full.per_state) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
        assert!(full.diagnostics.max_trace_drift < 1e-9);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let (sys, d) = setup(0.025, 10);
        let states = InitialStateSet::generate(1, 40).unwrap();
        let one = run_gate_fidelity(&sys, &d, gamma0_mev(), &states, &GateOptions::default()).unwrap();
        let many = run_gate_fidelity(
            &sys,
            &d,
            gamma0_mev(),
            &states,
            &GateOptions {
                workers: 4,
                ..GateOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn budget_refuses_full_mode_at_paper_detunings() {
        let (sys, d) = setup(0.025, 8);
        let states = InitialStateSet::generate(1, 2).unwrap();
        let opts = GateOptions {
            mode: Mode::Full,
            ..GateOptions::default()
        };
        assert!(matches!(
            run_gate_fidelity(&sys, &d, 0.0, &states, &opts),
            Err(Error::Intractable { .. })
        ));
    }

    #[test]
    fn summary_statistics() {
        let (m, se, min) = summarize(&[1.0, 0.5, 0.75]);
        assert!((m - 0.75).abs() < 1e-15);
        assert!((se - 0.25 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(min, 0.5);
        assert_eq!(summarize(&[0.9]).1, 0.0);
    }
}

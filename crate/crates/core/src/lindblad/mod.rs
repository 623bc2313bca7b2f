//! Master-equation integration with cavity decay.
//!
//! `ρ̇ = −i[H(t), ρ] + (γ/2)(2aρa† − a†aρ − ρa†a)`, integrated with
//! fixed-step classical RK4. The step is chosen as a fixed fraction of the
//! fastest phase rotation in the generator so that a given configuration
//! always produces bit-identical output.
//!
//! [`branch_oracle`] integrates the scalar equation obeyed by the field mean
//! in one qubit sector; it is used to check [`evolve`] and is independent of
//! it.

mod oracle;
mod rk4;

pub use oracle::{branch_closed_form, branch_oracle, BranchOracle};
pub use rk4::Collapse;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hamiltonians::{field_annihilation, sector_field_hamiltonian, HamiltonianGenerator};
use crate::model::EffectiveParams;
use crate::qcore::{
    annihilation, inner, max_abs, FockConfig, Ket, Matrix, SparseMatrix, TimeDependentOperator,
    C64, ZERO,
};
use rk4::TwoSided;

/// Top-two-Fock-level population above which a run is truncation-unsafe.
pub const TOP_POPULATION_LIMIT: f64 = 1e-6;

/// Default number of RK4 steps per period of the fastest rotation.
pub const DEFAULT_SUBSTEPS: u32 = 200;

/// A density matrix. Hermiticity and unit trace are checked on demand, not
/// enforced, so integration drift stays observable.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: Matrix,
}

impl DensityMatrix {
    pub fn from_matrix(data: Matrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &Ket) -> Self {
        let n = psi.len();
        let data = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self { data }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            data: Array2::from_shape_fn((dim, dim), |(i, j)| {
                if i == j {
                    C64::new(1.0 / dim as f64, 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().iter().sum()
    }

    /// `max|ρ − ρ†| / max|ρ|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        worst / max_abs(&self.data).max(f64::MIN_POSITIVE)
    }

    /// Smallest eigenvalue of the Hermitian part. O(dim³); meant for
    /// checkpoints, not for every step.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let herm = DMatrix::from_fn(n, n, |i, j| {
            let z = 0.5 * (self.data[[i, j]] + self.data[[j, i]].conj());
            nalgebra::Complex::new(z.re, z.im)
        });
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, op: &SparseMatrix) -> C64 {
        op.entries()
            .iter()
            .map(|&(i, j, v)| v * self.data[[j, i]])
            .sum()
    }

    /// Population of the two highest Fock levels, with the field as the
    /// fastest-varying index of a space of cutoff `fock`.
    pub fn top_fock_population(&self, fock: FockConfig) -> f64 {
        let n = fock.cutoff();
        self.data
            .diag()
            .iter()
            .enumerate()
            .filter(|(i, _)| i % n >= n - 2)
            .map(|(_, z)| z.re)
            .sum()
    }
}

/// `Re⟨Ψ|ρ|Ψ⟩` for a normalized target.
pub fn fidelity(rho: &DensityMatrix, target: &Ket) -> Result<f64> {
    if rho.dim() != target.len() {
        return Err(Error::Dimension(format!(
            "density matrix is {0}x{0} but target has {1} amplitudes",
            rho.dim(),
            target.len()
        )));
    }
    let norm = inner(target, target).re;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "target state is not normalized (norm² = {norm})"
        )));
    }
    let value = inner(target, &rho.matrix().dot(target));
    if value.im.abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "⟨Ψ|ρ|Ψ⟩ has imaginary part {:.3e}; ρ is not Hermitian",
            value.im
        )));
    }
    Ok(value.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// Steps per period of the fastest rotation in the generator.
    SubstepsPerPeriod(u32),
    /// Explicit step in meV⁻¹ (rounded down so the horizon is hit exactly).
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: StepPolicy,
    /// Final time, meV⁻¹.
    pub horizon: f64,
    pub renormalize_trace: bool,
    /// Escalate the truncation-unsafe flag to an error.
    pub strict: bool,
    /// Keep a snapshot every this many steps, plus the initial and final states.
    pub checkpoint_every: Option<u64>,
}

impl IntegratorConfig {
    pub fn new(horizon: f64) -> Self {
        Self {
            step: StepPolicy::SubstepsPerPeriod(DEFAULT_SUBSTEPS),
            horizon,
            renormalize_trace: false,
            strict: false,
            checkpoint_every: None,
        }
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.step = StepPolicy::SubstepsPerPeriod(substeps);
        self
    }

    pub fn with_fixed_step(mut self, dt: f64) -> Self {
        self.step = StepPolicy::Fixed(dt);
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Step count and step size for a generator whose fastest rotation is
    /// `frequency`.
    pub fn resolve(&self, frequency: f64) -> Result<(u64, f64)> {
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integration horizon must be finite and non-negative, got {}",
                self.horizon
            )));
        }
        let nominal = match self.step {
            StepPolicy::SubstepsPerPeriod(n) => {
                if n == 0 {
                    return Err(Error::InvalidParameter("substeps must be positive".into()));
                }
                if frequency == 0.0 {
                    return Err(Error::InvalidParameter(
                        "static generator has no period; use a fixed step".into(),
                    ));
                }
                2.0 * PI / frequency.abs() / n as f64
            }
            StepPolicy::Fixed(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidParameter(format!("step must be positive, got {dt}")));
                }
                dt
            }
        };
        if self.horizon == 0.0 {
            return Ok((0, nominal));
        }
        let ratio = self.horizon / nominal;
        // absorb rounding so that T = l·period gives exactly l·n steps
        let steps = (ratio * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        Ok((steps, self.horizon / steps as f64))
    }

    /// Number of steps [`evolve`] would take with this generator.
    pub fn estimate_steps(&self, generator: &HamiltonianGenerator) -> Result<u64> {
        self.resolve(generator.fastest_frequency()).map(|(n, _)| n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub steps: u64,
    pub dt: f64,
    pub max_trace_drift: f64,
    pub max_top_population: f64,
    pub truncation_unsafe: bool,
    pub final_hermiticity_error: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub rho: DensityMatrix,
    pub diagnostics: Diagnostics,
    /// `(t, ρ(t))` snapshots when checkpointing was requested.
    pub checkpoints: Vec<(f64, DensityMatrix)>,
}

/// The pieces of a master equation on a space whose last tensor factor is a
/// Fock space of the given cutoff.
pub struct MasterEquation<'a> {
    pub hamiltonian: &'a TimeDependentOperator,
    pub collapse: Option<Collapse>,
    pub fock: FockConfig,
}

impl<'a> MasterEquation<'a> {
    /// A bare cavity mode with decay `gamma` and Hamiltonian `h` on the field.
    pub fn single_mode(h: &'a TimeDependentOperator, gamma: f64, fock: FockConfig) -> Self {
        let a = SparseMatrix::from_dense(&annihilation(fock));
        Self {
            hamiltonian: h,
            collapse: (gamma > 0.0).then(|| Collapse::new(&a, gamma)),
            fock,
        }
    }
}

/// Integrates the master equation of `generator` with cavity decay `gamma`
/// (meV) from `rho0` to `cfg.horizon`.
pub fn evolve(
    rho0: &DensityMatrix,
    generator: &HamiltonianGenerator,
    gamma: f64,
    cfg: &IntegratorConfig,
) -> Result<Evolution> {
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!("decay rate must be ≥ 0, got {gamma}")));
    }
    let a = field_annihilation(generator.fock());
    let eq = MasterEquation {
        hamiltonian: generator.operator(),
        collapse: (gamma > 0.0).then(|| Collapse::new(&a, gamma)),
        fock: generator.fock(),
    };
    evolve_with(rho0, &eq, generator.fastest_frequency(), cfg)
}

/// [`evolve`] for an arbitrary master equation. `frequency` sets the step
/// under [`StepPolicy::SubstepsPerPeriod`].
pub fn evolve_with(
    rho0: &DensityMatrix,
    eq: &MasterEquation<'_>,
    frequency: f64,
    cfg: &IntegratorConfig,
) -> Result<Evolution> {
    if rho0.dim() != eq.hamiltonian.dim() {
        return Err(Error::Dimension(format!(
            "density matrix is {0}x{0} but the Hamiltonian acts on dimension {1}",
            rho0.dim(),
            eq.hamiltonian.dim()
        )));
    }
    if !eq.hamiltonian.dim().is_multiple_of(eq.fock.cutoff()) {
        return Err(Error::Dimension(format!(
            "space of dimension {} has no Fock factor of cutoff {}",
            eq.hamiltonian.dim(),
            eq.fock.cutoff()
        )));
    }
    let (steps, dt) = cfg.resolve(frequency)?;
    let two_sided = TwoSided {
        left: eq.hamiltonian,
        right: eq.hamiltonian,
        collapse: eq.collapse.as_ref(),
    };

    let initial_trace = rho0.trace();
    let n = eq.fock.cutoff();
    let top = |m: &Matrix| -> f64 {
        m.diag()
            .iter()
            .enumerate()
            .filter(|(i, _)| i % n >= n - 2)
            .map(|(_, z)| z.re)
            .sum()
    };
    let mut max_trace_drift = 0.0f64;
    let mut max_top = top(rho0.matrix());
    let mut checkpoints = Vec::new();

    if cfg.checkpoint_every.is_some_and(|e| e > 0) {
        checkpoints.push((0.0, rho0.clone()));
    }
    let final_state = rk4::integrate(&two_sided, rho0.matrix().clone(), 0.0, dt, steps, |step, t, x| {
        let tr: C64 = x.diag().iter().sum();
        max_trace_drift = max_trace_drift.max((tr - initial_trace).norm());
        if cfg.renormalize_trace && tr.re != 0.0 {
            let s = initial_trace.re / tr.re;
            x.mapv_inplace(|z| z * s);
        }
        let p = top(x);
        max_top = max_top.max(p);
        if cfg.strict && p > TOP_POPULATION_LIMIT {
            return Err(Error::TruncationUnsafe {
                population: p,
                limit: TOP_POPULATION_LIMIT,
            });
        }
        if let Some(every) = cfg.checkpoint_every {
            if every > 0 && (step % every == 0 || step == steps) {
                checkpoints.push((t, DensityMatrix { data: x.clone() }));
            }
        }
        Ok(())
    })?;

    let rho = DensityMatrix { data: final_state };
    let diagnostics = Diagnostics {
        steps,
        dt,
        max_trace_drift,
        max_top_population: max_top,
        truncation_unsafe: max_top > TOP_POPULATION_LIMIT,
        final_hermiticity_error: rho.hermiticity_error(),
    };
    Ok(Evolution {
        rho,
        diagnostics,
        checkpoints,
    })
}

/// Schrödinger evolution of a state vector with the same RK4 scheme.
pub fn evolve_pure(
    psi0: &Ket,
    hamiltonian: &TimeDependentOperator,
    frequency: f64,
    cfg: &IntegratorConfig,
) -> Result<(Ket, u64)> {
    evolve_pure_with(psi0, hamiltonian, frequency, cfg, |_, _, _| Ok(()))
}

/// [`evolve_pure`] with an observer that sees `(step, t, ψ(t))` after every
/// step and may abort the run.
pub fn evolve_pure_with<F>(
    psi0: &Ket,
    hamiltonian: &TimeDependentOperator,
    frequency: f64,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<(Ket, u64)>
where
    F: FnMut(u64, f64, ndarray::ArrayView1<C64>) -> Result<()>,
{
    if psi0.len() != hamiltonian.dim() {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes but the Hamiltonian acts on dimension {}",
            psi0.len(),
            hamiltonian.dim()
        )));
    }
    let (steps, dt) = cfg.resolve(frequency)?;
    let nothing = TimeDependentOperator::zero(1);
    let eq = TwoSided {
        left: hamiltonian,
        right: &nothing,
        collapse: None,
    };
    let column = psi0.clone().insert_axis(ndarray::Axis(1));
    let out = rk4::integrate(&eq, column, 0.0, dt, steps, |step, t, x| {
        observer(step, t, x.column(0))
    })?;
    Ok((out.column(0).to_owned(), steps))
}

pub const TRAJECTORY_CSV_HEADER: &str = "t_inv_mev,t_ps,trace,pop_ff,pop_fg,pop_gf,pop_gg,a_ff_re,a_ff_im,a_fg_re,a_fg_im,a_gf_re,a_gf_im,a_gg_re,a_gg_im,top_fock_population";

/// Writes composite-space checkpoints as trajectory rows: trace, the
/// population of each qubit sector, the field mean conditioned on each
/// sector (zero for an empty sector) and the top-two-Fock-level population.
pub fn write_trajectory_csv<W: std::io::Write>(
    checkpoints: &[(f64, DensityMatrix)],
    fock: FockConfig,
    out: &mut W,
) -> std::io::Result<()> {
    use crate::hamiltonians::{composite_index, Sector};
    use crate::report::full_precision;

    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    let n = fock.cutoff();
    for (t, rho) in checkpoints {
        let m = rho.matrix();
        let mut cols = vec![*t, crate::model::to_ps(*t), rho.trace().re];
        let mut means = Vec::with_capacity(8);
        for s in Sector::ALL {
            let (a, b) = s.levels();
            let base = composite_index(a, b, 0, fock);
            let pop: f64 = (0..n).map(|k| m[[base + k, base + k]].re).sum();
            let mean: C64 = (0..n - 1)
                .map(|k| m[[base + k + 1, base + k]] * ((k + 1) as f64).sqrt())
                .sum();
            let mean = if pop > 0.0 { mean / pop } else { ZERO };
            cols.push(pop);
            means.extend([mean.re, mean.im]);
        }
        cols.extend(means);
        cols.push(rho.top_fock_population(fock));
        let line: Vec<String> = cols.into_iter().map(full_precision).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Field-space kernel of the effective dynamics between two qubit sectors.
///
/// Under the effective Hamiltonian with cavity decay the block of ρ between
/// sectors of weights `w` and `w'` evolves on its own:
/// `K̇ = −i(w·h K − w'·K h) + D[K]`. Starting from `K(0) = |0⟩⟨0|`, the
/// block for an initial qubit state `Σ c_s |s⟩` is `c_s c_s'* K(t)`.
pub fn evolve_sector_kernel(
    params: &EffectiveParams,
    weights: (u8, u8),
    gamma: f64,
    fock: FockConfig,
    cfg: &IntegratorConfig,
) -> Result<SectorKernel> {
    let left = sector_field_hamiltonian(params, weights.0, fock);
    let right = sector_field_hamiltonian(params, weights.1, fock);
    let a = SparseMatrix::from_dense(&annihilation(fock));
    let collapse = (gamma > 0.0).then(|| Collapse::new(&a, gamma));
    let eq = TwoSided {
        left: &left,
        right: &right,
        collapse: collapse.as_ref(),
    };
    let (steps, dt) = cfg.resolve(params.delta)?;
    let n = fock.cutoff();
    let mut k0 = Array2::from_elem((n, n), ZERO);
    k0[[0, 0]] = C64::new(1.0, 0.0);
    let top = |m: &Matrix| m[[n - 1, n - 1]].norm() + m[[n - 2, n - 2]].norm();
    let mut max_top = 0.0f64;
    let mut max_trace_drift = 0.0f64;
    let mut checkpoints = Vec::new();
    if cfg.checkpoint_every.is_some_and(|e| e > 0) {
        checkpoints.push((0.0, k0.clone()));
    }
    let kernel = rk4::integrate(&eq, k0, 0.0, dt, steps, |step, t, x| {
        let tr: C64 = x.diag().iter().sum();
        max_trace_drift = max_trace_drift.max((tr - C64::new(1.0, 0.0)).norm());
        let p = top(x);
        max_top = max_top.max(p);
        if cfg.strict && p > TOP_POPULATION_LIMIT {
            return Err(Error::TruncationUnsafe {
                population: p,
                limit: TOP_POPULATION_LIMIT,
            });
        }
        if let Some(every) = cfg.checkpoint_every {
            if every > 0 && (step % every == 0 || step == steps) {
                checkpoints.push((t, x.clone()));
            }
        }
        Ok(())
    })?;
    Ok(SectorKernel {
        weights,
        kernel,
        steps,
        dt,
        max_top_population: max_top,
        max_trace_drift,
        checkpoints,
    })
}

#[derive(Debug, Clone)]
pub struct SectorKernel {
    pub weights: (u8, u8),
    pub kernel: Matrix,
    pub steps: u64,
    pub dt: f64,
    /// Largest |K| on the two highest Fock levels' diagonal.
    pub max_top_population: f64,
    /// Largest |Tr K − 1|. Only a conservation law when the weights agree.
    pub max_trace_drift: f64,
    pub checkpoints: Vec<(f64, Matrix)>,
}

//! Cross-module invariant suite run by `qdgate check`.
//!
//! Each check measures one number and compares it with a pinned tolerance.
//! An override tolerance replaces every upper bound; a check that fails
//! only because of the override is reported as tolerance-induced.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ndarray::s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::geometry::{alpha_closed_form, discretized_loop, phases_closed_form, total_phase_polyline};
use crate::hamiltonians::{composite_dim, composite_index, field_annihilation, HamiltonianGenerator, Sector};
use crate::lindblad::{
    branch_oracle, evolve, evolve_with, DensityMatrix, IntegratorConfig, MasterEquation,
};
use crate::model::{gamma0_mev, EffectiveParams, SystemParams};
use crate::qcore::{
    annihilation, coherent_state, displacement_matrix, max_abs_diff, FockConfig, SparseMatrix,
    TimeDependentOperator, C64, I, ZERO,
};

/// Which side of the tolerance passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `measured ≤ tolerance`.
    Upper,
    /// `measured ≥ tolerance`; never overridden.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub default_tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    pub passed_at_default: bool,
    pub elapsed: Duration,
}

impl CheckOutcome {
    pub fn tolerance_induced(&self) -> bool {
        !self.passed && self.passed_at_default
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

/// Process exit code for a finished check run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    /// Some check fails at its default tolerance.
    Failed,
    /// Every failure disappears at the default tolerances.
    ToleranceInduced,
}

impl CheckReport {
    pub fn status(&self) -> CheckStatus {
        let failed: Vec<_> = self.outcomes.iter().filter(|o| !o.passed).collect();
        if failed.is_empty() {
            CheckStatus::Passed
        } else if failed.iter().all(|o| o.tolerance_induced()) {
            CheckStatus::ToleranceInduced
        } else {
            CheckStatus::Failed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckOptions {
    pub tolerance_override: Option<f64>,
    /// Flip the sign of θ_gg when assembling φ_gg.
    pub inject_fault: bool,
}

type Measure = fn(&CheckOptions) -> Result<f64>;

const SUITE: &[(&str, Bound, f64, Measure)] = &[
    ("bch_identity", Bound::Upper, 1e-7, bch_identity),
    ("loop_closure", Bound::Upper, 1e-12, loop_closure),
    ("phase_ratio_gg_fg", Bound::Upper, 1e-12, phase_ratio),
    ("polyline_quadrature_order", Bound::Lower, 3.5, quadrature_order),
    ("damped_cavity_mean", Bound::Upper, 1e-7, damped_cavity),
    ("trace_preservation", Bound::Upper, 1e-9, trace_preservation),
    ("rk4_step_halving_ratio", Bound::Lower, 7.2, rk4_order),
    ("branch_oracle_mean", Bound::Upper, 1e-6, branch_equivalence),
];

/// Names of the checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    SUITE.iter().map(|c| c.0).collect()
}

pub fn run_checks(opts: &CheckOptions) -> Result<CheckReport> {
    let mut outcomes = Vec::with_capacity(SUITE.len());
    for &(name, bound, default_tolerance, measure) in SUITE {
        let start = Instant::now();
        let measured = measure(opts)?;
        let elapsed = start.elapsed();
        let tolerance = match (bound, opts.tolerance_override) {
            (Bound::Upper, Some(t)) => t,
            _ => default_tolerance,
        };
        let ok = |tol: f64| match bound {
            Bound::Upper => measured <= tol,
            Bound::Lower => measured >= tol,
        };
        outcomes.push(CheckOutcome {
            name,
            measured,
            tolerance,
            default_tolerance,
            bound,
            passed: ok(tolerance),
            passed_at_default: ok(default_tolerance),
            elapsed,
        });
    }
    Ok(CheckReport { outcomes })
}

const EPS: C64 = C64::new(0.0025, 0.0);
const DELTA: f64 = 0.025;

/// Largest entry error of `D(α)D(β) = e^{i Im(αβ*)} D(α+β)` on the lowest
/// 10×10 block, over random pairs with |α|, |β| ≤ 1.
fn bch_identity(_: &CheckOptions) -> Result<f64> {
    let fock = FockConfig::new(40)?;
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut disc = || {
        let r: f64 = rng.random::<f64>().sqrt();
        let t: f64 = rng.random::<f64>() * 2.0 * PI;
        C64::from_polar(r, t)
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (a, b) = (disc(), disc());
        let lhs = displacement_matrix(a, fock)?.dot(&displacement_matrix(b, fock)?);
        let rhs = displacement_matrix(a + b, fock)?.mapv(|z| z * (I * (a * b.conj()).im).exp());
        let block = s![0..10, 0..10];
        worst = worst.max(max_abs_diff(&lhs.slice(block).to_owned(), &rhs.slice(block).to_owned()));
    }
    Ok(worst)
}

/// `max_l |α_gg(2πl/δ)| / |ε/δ|` over l = 1..10.
fn loop_closure(_: &CheckOptions) -> Result<f64> {
    let mut worst = 0.0f64;
    for l in 1..=10 {
        let a = alpha_closed_form(EPS, DELTA, 2.0 * PI * l as f64 / DELTA)?;
        worst = worst.max(a.gg.norm().max(a.fg.norm()) / (EPS.norm() / DELTA));
    }
    Ok(worst)
}

/// `|φ_gg / (4φ_fg) − 1|` over a range of times.
fn phase_ratio(opts: &CheckOptions) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 1..=20 {
        let t = 2.0 * PI / DELTA * k as f64 * 0.37;
        let p = phases_closed_form(EPS, DELTA, t)?;
        let theta = if opts.inject_fault { -p.theta_gg } else { p.theta_gg };
        let gg = p.fg + p.gf + theta;
        worst = worst.max((gg / (4.0 * p.fg) - 1.0).abs());
    }
    Ok(worst)
}

/// Error ratio of the polyline loop phase when the segment count doubles.
fn quadrature_order(_: &CheckOptions) -> Result<f64> {
    let exact = phases_closed_form(EPS, DELTA, 2.0 * PI / DELTA)?.fg;
    let err = |n: usize| -> Result<f64> {
        let path = discretized_loop(EPS, DELTA, 1.0, n)?;
        Ok((total_phase_polyline(&path)?.total_phase - exact).abs())
    };
    Ok(err(64)? / err(128)?)
}

/// `max_t |⟨a⟩(t) − α₀ e^{−γt/2}|` for a decaying coherent state.
fn damped_cavity(_: &CheckOptions) -> Result<f64> {
    let fock = FockConfig::new(15)?;
    let gamma = 0.01;
    let alpha0 = C64::new(0.3, 0.0);
    let h = TimeDependentOperator::zero(15);
    let eq = MasterEquation::single_mode(&h, gamma, fock);
    let rho0 = DensityMatrix::pure(&coherent_state(alpha0, fock)?.ket);
    let a = SparseMatrix::from_dense(&annihilation(fock));
    let cfg = IntegratorConfig {
        checkpoint_every: Some(50),
        ..IntegratorConfig::new(200.0).with_fixed_step(0.1)
    };
    let out = evolve_with(&rho0, &eq, 0.0, &cfg)?;
    Ok(out
        .checkpoints
        .iter()
        .map(|(t, rho)| (rho.expectation(&a) - alpha0 * (-gamma * t / 2.0).exp()).norm())
        .fold(0.0, f64::max))
}

fn gg_gate_setup(n: usize) -> Result<(EffectiveParams, FockConfig, DensityMatrix)> {
    let fock = FockConfig::new(n)?;
    let sys = SystemParams::paper(DELTA, 0.0, fock);
    let p = EffectiveParams::from_system(&sys, Some(1e-6))?;
    let dim = composite_dim(fock);
    let mut psi = ndarray::Array1::from_elem(dim, ZERO);
    let h = C64::new(0.5, 0.0);
    for s in Sector::ALL {
        let (a, b) = s.levels();
        psi[composite_index(a, b, 0, fock)] = h;
    }
    Ok((p, fock, DensityMatrix::pure(&psi)))
}

/// Trace drift over five loops with twice the nominal decay.
fn trace_preservation(_: &CheckOptions) -> Result<f64> {
    let (p, fock, rho0) = gg_gate_setup(12)?;
    let gen = HamiltonianGenerator::effective(&p, fock);
    let cfg = IntegratorConfig::new(5.0 * 2.0 * PI / DELTA);
    Ok(evolve(&rho0, &gen, 2.0 * gamma0_mev(), &cfg)?.diagnostics.max_trace_drift)
}

/// `‖ρ_dt − ρ_dt/2‖ / ‖ρ_dt/2 − ρ_dt/4‖` on a coarse reference run.
fn rk4_order(_: &CheckOptions) -> Result<f64> {
    let (_, fock, rho0) = gg_gate_setup(8)?;
    let p = EffectiveParams::new(C64::new(0.01, 0.0), DELTA)?;
    let gen = HamiltonianGenerator::effective(&p, fock);
    let run = |n: u32| -> Result<ndarray::Array2<C64>> {
        let cfg = IntegratorConfig::new(2.0 * PI / DELTA).with_substeps(n);
        Ok(evolve(&rho0, &gen, 10.0 * gamma0_mev(), &cfg)?.rho.into_matrix())
    };
    let (a, b, c) = (run(20)?, run(40)?, run(80)?);
    Ok(max_abs_diff(&a, &b) / max_abs_diff(&b, &c))
}

/// Largest gap between the per-sector field mean of a decaying gate and
/// the scalar branch equation, sampled over one loop.
fn branch_equivalence(_: &CheckOptions) -> Result<f64> {
    let (p, fock, rho0) = gg_gate_setup(12)?;
    let gamma = gamma0_mev();
    let gen = HamiltonianGenerator::effective(&p, fock);
    let cfg = IntegratorConfig {
        checkpoint_every: Some(40),
        ..IntegratorConfig::new(2.0 * PI / DELTA)
    };
    let out = evolve(&rho0, &gen, gamma, &cfg)?;
    let a = field_annihilation(fock);
    let n = fock.cutoff();
    let mut worst = 0.0f64;
    for (t, rho) in &out.checkpoints {
        let m = rho.matrix();
        let am = a.to_dense().dot(m);
        for s in Sector::ALL {
            let (da, db) = s.levels();
            let base = composite_index(da, db, 0, fock);
            let pop: f64 = (0..n).map(|k| m[[base + k, base + k]].re).sum();
            let mean: C64 = (0..n).map(|k| am[[base + k, base + k]]).sum::<C64>() / pop;
            let oracle = branch_oracle(s.weight(), p.epsilon, p.delta, gamma, *t)?.alpha;
            worst = worst.max((mean - oracle).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_checks(&CheckOptions::default()).unwrap();
        for o in &r.outcomes {
            assert!(o.passed, "{} measured {:e} vs {:e}", o.name, o.measured, o.tolerance);
        }
        assert_eq!(r.status(), CheckStatus::Passed);
    }

    #[test]
    fn injected_fault_breaks_phase_ratio() {
        let r = run_checks(&CheckOptions {
            inject_fault: true,
            ..CheckOptions::default()
        })
        .unwrap();
        let failed: Vec<_> = r.outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
        assert_eq!(failed, vec!["phase_ratio_gg_fg"]);
        assert_eq!(r.status(), CheckStatus::Failed);
    }

    #[test]
    fn tiny_override_is_tolerance_induced() {
        let r = run_checks(&CheckOptions {
            tolerance_override: Some(1e-30),
            ..CheckOptions::default()
        })
        .unwrap();
        assert!(r.outcomes.iter().any(|o| !o.passed));
        assert_eq!(r.status(), CheckStatus::ToleranceInduced);
    }
}

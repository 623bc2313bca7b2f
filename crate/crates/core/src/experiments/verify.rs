use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{composite_dim, HamiltonianGenerator, Sector, DOT_DIM, E};
use crate::lindblad::{evolve_pure, evolve_pure_with, IntegratorConfig, DEFAULT_SUBSTEPS};
use crate::model::{EffectiveParams, SystemParams};
use crate::qcore::{inner, Ket, C64};

use super::fidelity::thread_pool;
use super::states::embed_sectors;

/// Excited-level population allowed, in units of `(Ω/2Δ)²`.
pub const LEAKAGE_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub scales: Vec<f64>,
    pub loops: u64,
    pub substeps: u32,
    /// Refuse to start if the total RK4 step count would exceed this.
    pub step_budget: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            scales: vec![1.0, 2.0, 4.0],
            loops: 1,
            substeps: DEFAULT_SUBSTEPS,
            step_budget: 20_000_000,
            workers: 1,
        }
    }
}

/// Full-versus-effective comparison at one detuning scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePoint {
    pub scale: f64,
    pub epsilon: C64,
    /// Smallest Δ/|Ω| over both dots and both drives.
    pub detuning_ratio: f64,
    /// `|⟨ψ_eff|ψ_full⟩|²` per input sector ff, fg, gf, gg.
    pub sector_overlaps: [f64; 4],
    /// `1 − |Σ_s ⟨ψ_eff,s|ψ_full,s⟩ / 4|²`.
    pub gate_infidelity: f64,
    /// Largest |e⟩ population reached by dot A and dot B.
    pub max_leakage: [f64; 2],
    /// `LEAKAGE_MARGIN · (|Ω|/2Δ)²` per dot.
    pub leakage_bound: [f64; 2],
    pub full_steps: u64,
}

impl ScalePoint {
    pub fn leakage_within_bound(&self) -> bool {
        self.max_leakage
            .iter()
            .zip(self.leakage_bound)
            .all(|(p, b)| *p <= b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub loops: u64,
    pub points: Vec<ScalePoint>,
}

impl VerifyReport {
    /// Infidelity strictly decreases from one scale point to the next.
    pub fn monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].gate_infidelity < w[0].gate_infidelity)
    }

    pub fn leakage_ok(&self) -> bool {
        self.points.iter().all(ScalePoint::leakage_within_bound)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        use crate::report::full_precision;
        writeln!(out, "# loops = {}", self.loops)?;
        writeln!(out, "{VERIFY_CSV_HEADER}")?;
        for p in &self.points {
            let mut cols = vec![p.scale, p.detuning_ratio, p.epsilon.re, p.epsilon.im];
            cols.extend(p.sector_overlaps);
            cols.push(p.gate_infidelity);
            cols.extend(p.max_leakage);
            cols.extend(p.leakage_bound);
            let cols: Vec<String> = cols.into_iter().map(full_precision).collect();
            writeln!(out, "{},{}", cols.join(","), p.full_steps)?;
        }
        Ok(())
    }
}

pub const VERIFY_CSV_HEADER: &str = "scale,detuning_ratio,epsilon_re,epsilon_im,overlap_ff,overlap_fg,overlap_gf,overlap_gg,gate_infidelity,leakage_a,leakage_b,leakage_bound_a,leakage_bound_b,full_steps";

/// Drive detunings times `s`, Rabi frequencies times √s, cavity detunings
/// kept `δ` above the drives; couplings g unchanged.
pub fn scaled_system(sys: &SystemParams, s: f64) -> Result<SystemParams> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {s}")));
    }
    let mut p = *sys;
    for dot in [&mut p.dot_a, &mut p.dot_b] {
        let delta = dot.detuning_difference();
        dot.delta_laser *= s;
        dot.delta_laser_prime *= s;
        dot.delta_cavity = dot.delta_laser + delta;
        dot.omega *= s.sqrt();
        dot.omega_prime *= s.sqrt();
    }
    Ok(p)
}

fn excited_population(psi: ndarray::ArrayView1<C64>, n: usize) -> [f64; 2] {
    let mut pop = [0.0; 2];
    for (i, z) in psi.iter().enumerate() {
        let dots = i / n;
        let (a, b) = (dots / DOT_DIM, dots % DOT_DIM);
        if a == E {
            pop[0] += z.norm_sqr();
        }
        if b == E {
            pop[1] += z.norm_sqr();
        }
    }
    pop
}

/// Evolves the four sector basis states ⊗ vacuum over `opts.loops` loops
/// under the full and the effective Hamiltonian without loss, at every
/// scale in `opts.scales`.
pub fn verify_effective(sys: &SystemParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.loops == 0 {
        return Err(Error::InvalidParameter("at least one loop is required".into()));
    }
    let systems = opts
        .scales
        .iter()
        .map(|&s| scaled_system(sys, s))
        .collect::<Result<Vec<_>>>()?;
    let mut estimated = 0u64;
    let mut plans = Vec::with_capacity(systems.len());
    for scaled in &systems {
        let effective = EffectiveParams::from_system(scaled, None)?;
        let cfg = IntegratorConfig::new(opts.loops as f64 * 2.0 * PI / effective.delta.abs())
            .with_substeps(opts.substeps);
        let full = HamiltonianGenerator::full(scaled);
        let eff = HamiltonianGenerator::effective(&effective, scaled.fock);
        estimated += 4 * (cfg.estimate_steps(&full)? + cfg.estimate_steps(&eff)?);
        plans.push((effective, cfg, full, eff));
    }
    if estimated > opts.step_budget {
        return Err(Error::Intractable {
            estimated,
            budget: opts.step_budget,
        });
    }

    let pool = thread_pool(opts.workers)?;
    let n = sys.fock.cutoff();
    let mut points = Vec::with_capacity(plans.len());
    for ((scale, scaled), (effective, cfg, full, eff)) in
        opts.scales.iter().zip(&systems).zip(&plans)
    {
        let runs = pool.install(|| {
            Sector::ALL
                .par_iter()
                .map(|&s| -> Result<(Ket, Ket, [f64; 2], u64)> {
                    let mut c = [C64::new(0.0, 0.0); 4];
                    c[s.index()] = C64::new(1.0, 0.0);
                    let psi0 = embed_sectors(&c, scaled.fock);
                    let mut leak = [0.0f64; 2];
                    let (full_t, steps) = evolve_pure_with(
                        &psi0,
                        full.operator(),
                        full.fastest_frequency(),
                        cfg,
                        |_, _, psi| {
                            let p = excited_population(psi, n);
                            leak[0] = leak[0].max(p[0]);
                            leak[1] = leak[1].max(p[1]);
                            Ok(())
                        },
                    )?;
                    let (eff_t, _) = evolve_pure(&psi0, eff.operator(), eff.fastest_frequency(), cfg)?;
                    Ok((full_t, eff_t, leak, steps))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut overlaps = [0.0; 4];
        let mut sum = C64::new(0.0, 0.0);
        let mut max_leakage = [0.0f64; 2];
        for (k, (full_t, eff_t, leak, _)) in runs.iter().enumerate() {
            let o = inner(eff_t, full_t);
            overlaps[k] = o.norm_sqr();
            sum += o;
            max_leakage[0] = max_leakage[0].max(leak[0]);
            max_leakage[1] = max_leakage[1].max(leak[1]);
        }
        let bound = |d: &crate::model::DotParams| {
            let r = d.omega.norm().max(d.omega_prime.norm())
                / (2.0 * d.delta_laser.abs().min(d.delta_laser_prime.abs()));
            LEAKAGE_MARGIN * r * r
        };
        let ratio = scaled
            .dots()
            .iter()
            .map(|d| {
                d.delta_laser.abs().min(d.delta_laser_prime.abs())
                    / d.omega.norm().max(d.omega_prime.norm())
            })
            .fold(f64::INFINITY, f64::min);
        debug_assert_eq!(composite_dim(scaled.fock), runs[0].0.len());
        points.push(ScalePoint {
            scale: *scale,
            epsilon: effective.epsilon,
            detuning_ratio: ratio,
            sector_overlaps: overlaps,
            gate_infidelity: 1.0 - (sum / 4.0).norm_sqr(),
            max_leakage,
            leakage_bound: [bound(&scaled.dot_a), bound(&scaled.dot_b)],
            full_steps: runs[0].3,
        });
    }
    Ok(VerifyReport {
        loops: opts.loops,
        points,
    })
}

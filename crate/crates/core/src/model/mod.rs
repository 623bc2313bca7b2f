//! Physical parameters and the quantities derived from them.
//!
//! Every energy is in meV with ħ = 1, so times are in meV⁻¹; see [`units`]
//! for the conversions used at the boundaries.

pub mod units;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::{FockConfig, C64};

pub use units::{convert_units, gamma0_mev, to_ps, UnitKind, HBAR_MEV_PS};

/// Detuning differences of the two dots must agree to this many meV.
pub const DETUNING_MATCH_TOLERANCE: f64 = 1e-9;

/// Default tolerance on |λ_A − λ_B| before a common ε is accepted.
pub const DEFAULT_LAMBDA_TOLERANCE: f64 = 1e-6;

/// Couplings and detunings of one dot, all in meV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotParams {
    /// Cavity coupling g_j.
    pub g: f64,
    /// Rabi frequency Ω_j of the drive detuned by Δ_j.
    pub omega: C64,
    /// Rabi frequency Ω'_j of the drive detuned by −Δ'_j.
    pub omega_prime: C64,
    pub delta_laser: f64,
    pub delta_laser_prime: f64,
    pub delta_cavity: f64,
}

impl DotParams {
    /// Symmetric drive: Ω' = Ω, Δ' = Δ, and Δ^C = Δ + δ.
    pub fn symmetric(g: f64, omega: f64, delta_laser: f64, delta: f64) -> Self {
        Self {
            g,
            omega: C64::new(omega, 0.0),
            omega_prime: C64::new(omega, 0.0),
            delta_laser,
            delta_laser_prime: delta_laser,
            delta_cavity: delta_laser + delta,
        }
    }

    /// Δ_j^C − Δ_j.
    pub fn detuning_difference(&self) -> f64 {
        self.delta_cavity - self.delta_laser
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub dot_a: DotParams,
    pub dot_b: DotParams,
    /// Cavity decay rate as an energy (ħ·rate), meV.
    pub gamma: f64,
    pub fock: FockConfig,
}

impl SystemParams {
    /// The two-dot parameter set used for the decay and fluctuation
    /// experiments, with cavity detunings placed `delta` above the drive
    /// detunings: g = 0.10 / 0.08 meV, Ω = 10 / 13.75 meV, Δ = 200 / 220 meV.
    pub fn paper(delta: f64, gamma: f64, fock: FockConfig) -> Self {
        Self {
            dot_a: DotParams::symmetric(0.10, 10.0, 200.0, delta),
            dot_b: DotParams::symmetric(0.08, 13.75, 220.0, delta),
            gamma,
            fock,
        }
    }

    /// Same couplings as [`SystemParams::paper`] with Ω and Δ divided by ten,
    /// so Δ/Ω = 20 is kept while full-Hamiltonian integration stays cheap.
    pub fn reduced(delta: f64, gamma: f64, fock: FockConfig) -> Self {
        Self {
            dot_a: DotParams::symmetric(0.10, 1.0, 20.0, delta),
            dot_b: DotParams::symmetric(0.08, 1.375, 22.0, delta),
            gamma,
            fock,
        }
    }

    pub fn dots(&self) -> [&DotParams; 2] {
        [&self.dot_a, &self.dot_b]
    }
}

/// λ_j = Ω_j* g_j / 4 · (1/Δ_j + 1/Δ_j^C).
pub fn derive_lambda(dot: &DotParams) -> Result<C64> {
    if dot.delta_laser == 0.0 {
        return Err(Error::ZeroDetuning("drive detuning Δ_j is zero"));
    }
    if dot.delta_cavity == 0.0 {
        return Err(Error::ZeroDetuning("cavity detuning Δ_j^C is zero"));
    }
    Ok(dot.omega.conj() * dot.g / 4.0 * (1.0 / dot.delta_laser + 1.0 / dot.delta_cavity))
}

/// Thresholds for [`validate_regime`].
#[derive(Debug, Clone, Copy)]
pub struct RegimeTolerances {
    /// Relative tolerance for |Ω| = |Ω'| and Δ = Δ'.
    pub relative_equality: f64,
    /// Absolute tolerance (meV) for equal detuning differences.
    pub detuning_match: f64,
    /// Minimum ratio for the two "much greater than" conditions.
    pub ratio_threshold: f64,
}

impl Default for RegimeTolerances {
    fn default() -> Self {
        Self {
            relative_equality: 1e-9,
            detuning_match: DETUNING_MATCH_TOLERANCE,
            ratio_threshold: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub index: u8,
    pub description: &'static str,
    pub passed: bool,
    /// Worst measured value (a ratio or a mismatch, depending on the condition).
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, index: u8) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.index == index)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Checks the five conditions under which the effective displacement
/// Hamiltonian is valid. Purely advisory: nothing here is fatal.
pub fn validate_regime(sys: &SystemParams, tol: &RegimeTolerances) -> ValidationReport {
    let dots = sys.dots();
    let worst = |f: &dyn Fn(&DotParams) -> f64| dots.iter().map(|d| f(d)).fold(0.0, f64::max);
    let least = |f: &dyn Fn(&DotParams) -> f64| {
        dots.iter().map(|d| f(d)).fold(f64::INFINITY, f64::min)
    };

    let rabi_mismatch = worst(&|d| rel_diff(d.omega.norm(), d.omega_prime.norm()));
    let detuning_mismatch = worst(&|d| rel_diff(d.delta_laser, d.delta_laser_prime));
    let large_detuning = least(&|d| {
        let strongest = d.g.abs().max(d.omega.norm()).max(d.omega_prime.norm());
        d.delta_laser.abs().min(d.delta_laser_prime.abs()) / strongest
    });
    let delta_split =
        (sys.dot_a.detuning_difference() - sys.dot_b.detuning_difference()).abs();
    let strong_drive = least(&|d| d.omega.norm() / d.g.abs());

    ValidationReport {
        conditions: vec![
            ConditionCheck {
                index: 1,
                description: "|Ω_j| = |Ω'_j|",
                passed: rabi_mismatch <= tol.relative_equality,
                measured: rabi_mismatch,
            },
            ConditionCheck {
                index: 2,
                description: "Δ_j = Δ'_j",
                passed: detuning_mismatch <= tol.relative_equality,
                measured: detuning_mismatch,
            },
            ConditionCheck {
                index: 3,
                description: "|Δ_j|, |Δ'_j| >> |g_j|, |Ω_j|, |Ω'_j|",
                passed: large_detuning >= tol.ratio_threshold,
                measured: large_detuning,
            },
            ConditionCheck {
                index: 4,
                description: "Δ_A^C − Δ_A = Δ_B^C − Δ_B",
                passed: delta_split <= tol.detuning_match,
                measured: delta_split,
            },
            ConditionCheck {
                index: 5,
                description: "|Ω_j| >> |g_j|",
                passed: strong_drive >= tol.ratio_threshold,
                measured: strong_drive,
            },
        ],
    }
}

/// Loop count, gate time and achieved phase for a target conditional phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub loops: u64,
    /// T = 2πl/|δ| in meV⁻¹.
    pub gate_time: f64,
    pub gate_time_ps: f64,
    /// Φ = 2πl|ε|²/δ².
    pub phi: f64,
    pub target_phi: f64,
    pub relative_phase_error: f64,
}

/// Picks the loop count l = round(Φ_target δ² / (2π|ε|²)) and reports the
/// phase that l closed loops actually produce.
pub fn gate_schedule(epsilon: C64, delta: f64, target_phi: f64) -> Result<Schedule> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning("δ = Δ^C − Δ is zero"));
    }
    if epsilon.norm() == 0.0 {
        return Err(Error::ScheduleInfeasible("ε is zero".into()));
    }
    if !(target_phi > 0.0) {
        return Err(Error::ScheduleInfeasible(format!(
            "target phase must be positive, got {target_phi}"
        )));
    }
    let per_loop = 2.0 * PI * epsilon.norm_sqr() / (delta * delta);
    let loops = (target_phi / per_loop).round();
    if loops < 1.0 {
        return Err(Error::ScheduleInfeasible(format!(
            "one loop already gives Φ = {per_loop:.6} rad > target {target_phi:.6} rad; ε too large relative to δ"
        )));
    }
    let gate_time = 2.0 * PI * loops / delta.abs();
    let phi = loops * per_loop;
    Ok(Schedule {
        loops: loops as u64,
        gate_time,
        gate_time_ps: to_ps(gate_time),
        phi,
        target_phi,
        relative_phase_error: (phi - target_phi).abs() / target_phi,
    })
}

/// ε and δ of the effective displacement Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub lambda_a: C64,
    pub lambda_b: C64,
    pub epsilon: C64,
    pub delta: f64,
}

impl EffectiveParams {
    /// Derives λ_A, λ_B and δ; ε is their mean. With `lambda_tolerance` set,
    /// mismatched couplings are an error.
    pub fn from_system(sys: &SystemParams, lambda_tolerance: Option<f64>) -> Result<Self> {
        let lambda_a = derive_lambda(&sys.dot_a)?;
        let lambda_b = derive_lambda(&sys.dot_b)?;
        let delta_a = sys.dot_a.detuning_difference();
        let delta_b = sys.dot_b.detuning_difference();
        if (delta_a - delta_b).abs() > DETUNING_MATCH_TOLERANCE {
            return Err(Error::DetuningMismatch { delta_a, delta_b });
        }
        let delta = 0.5 * (delta_a + delta_b);
        if delta == 0.0 {
            return Err(Error::ZeroDetuning("δ = Δ^C − Δ is zero"));
        }
        if let Some(tolerance) = lambda_tolerance {
            let difference = (lambda_a - lambda_b).norm();
            if difference > tolerance {
                return Err(Error::LambdaMismatch {
                    difference,
                    tolerance,
                });
            }
        }
        Ok(Self {
            lambda_a,
            lambda_b,
            epsilon: 0.5 * (lambda_a + lambda_b),
            delta,
        })
    }

    pub fn new(epsilon: C64, delta: f64) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::ZeroDetuning("δ is zero"));
        }
        Ok(Self {
            lambda_a: epsilon,
            lambda_b: epsilon,
            epsilon,
            delta,
        })
    }
}

/// Effective-model quantities plus the gate schedule for a target phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub effective: EffectiveParams,
    pub schedule: Schedule,
}

impl DerivedParams {
    pub fn derive(sys: &SystemParams, target_phi: f64, lambda_tolerance: f64) -> Result<Self> {
        let effective = EffectiveParams::from_system(sys, Some(lambda_tolerance))?;
        Self::from_effective(effective, target_phi)
    }

    pub fn from_effective(effective: EffectiveParams, target_phi: f64) -> Result<Self> {
        let schedule = gate_schedule(effective.epsilon, effective.delta, target_phi)?;
        Ok(Self {
            effective,
            schedule,
        })
    }

    pub fn epsilon(&self) -> C64 {
        self.effective.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.effective.delta
    }

    pub fn loops(&self) -> u64 {
        self.schedule.loops
    }

    pub fn gate_time(&self) -> f64 {
        self.schedule.gate_time
    }

    pub fn phi(&self) -> f64 {
        self.schedule.phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fock() -> FockConfig {
        FockConfig::new(12).unwrap()
    }

    // Reference values from a 30-digit evaluation of Ω g/4 (1/Δ + 1/Δ^C).
    const LAMBDA_A_PAPER: f64 = 2.499_843_769_528_809e-3;
    const LAMBDA_B_PAPER: f64 = 2.499_857_970_685_149e-3;

    #[test]
    fn lambda_dot_a() {
        let dot = DotParams::symmetric(0.10, 10.0, 200.0, 0.025);
        let lambda = derive_lambda(&dot).unwrap();
        assert!((lambda.re - LAMBDA_A_PAPER).abs() < 1e-15);
        assert_eq!(lambda.im, 0.0);
    }

    #[test]
    fn lambda_dot_b_matches_dot_a() {
        let a = derive_lambda(&DotParams::symmetric(0.10, 10.0, 200.0, 0.025)).unwrap();
        let b = derive_lambda(&DotParams::symmetric(0.08, 13.75, 220.0, 0.025)).unwrap();
        assert!((b.re - LAMBDA_B_PAPER).abs() < 1e-15);
        assert!((a - b).norm() < 5e-7);
    }

    #[test]
    fn lambda_without_coupling() {
        let dot = DotParams::symmetric(0.0, 10.0, 200.0, 0.025);
        assert_eq!(derive_lambda(&dot).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn lambda_zero_detuning() {
        let mut dot = DotParams::symmetric(0.1, 10.0, 200.0, 0.025);
        dot.delta_laser = 0.0;
        assert!(matches!(derive_lambda(&dot), Err(Error::ZeroDetuning(_))));
    }

    #[test]
    fn paper_parameters_pass_regime() {
        let report = validate_regime(&SystemParams::paper(0.025, 0.0, fock()), &Default::default());
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.conditions.len(), 5);
    }

    #[test]
    fn unequal_rabi_frequencies_fail_condition_one() {
        let mut sys = SystemParams::paper(0.025, 0.0, fock());
        sys.dot_a.omega_prime = sys.dot_a.omega * 1.1;
        let report = validate_regime(&sys, &Default::default());
        assert!(!report.condition(1).unwrap().passed);
        assert!(report.condition(2).unwrap().passed);
    }

    #[test]
    fn unequal_detuning_differences_fail_condition_four() {
        let mut sys = SystemParams::paper(0.025, 0.0, fock());
        sys.dot_b.delta_cavity = sys.dot_b.delta_laser + 0.030;
        let report = validate_regime(&sys, &Default::default());
        assert!(!report.condition(4).unwrap().passed);
        assert!(report.condition(1).unwrap().passed);
    }

    #[test]
    fn reduced_regime_is_at_threshold() {
        let report =
            validate_regime(&SystemParams::reduced(0.05, 0.0, fock()), &Default::default());
        assert!(report.all_passed(), "{report:?}");
        assert!((report.condition(3).unwrap().measured - 16.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_quarter_coupling_detuning() {
        let s = gate_schedule(C64::new(0.0025, 0.0), 0.025, PI / 2.0).unwrap();
        assert_eq!(s.loops, 25);
        assert!((s.gate_time - 2000.0 * PI).abs() < 1e-9);
        assert!((s.gate_time_ps - 4135.6677).abs() < 1e-3);
        assert!((s.phi - PI / 2.0).abs() < 1e-14);
        assert!(s.relative_phase_error < 1e-14);
    }

    #[test]
    fn schedule_double_coupling_detuning() {
        let s = gate_schedule(C64::new(0.0025, 0.0), 0.2, PI / 2.0).unwrap();
        assert_eq!(s.loops, 1600);
        assert!((s.gate_time - 16000.0 * PI).abs() < 1e-8);
        assert!((s.gate_time_ps - 33085.34).abs() < 0.01);
    }

    #[test]
    fn schedule_single_loop() {
        let eps = C64::new(0.003, 0.001);
        let delta = 0.04;
        let target = 2.0 * PI * eps.norm_sqr() / (delta * delta);
        let s = gate_schedule(eps, delta, target).unwrap();
        assert_eq!(s.loops, 1);
        assert!(s.relative_phase_error < 1e-15);
    }

    /// Numerical quadrature of −(|ε|²/δ)(1 − cos δt) over [0, T] as an
    /// independent check on the achieved phase.
    #[test]
    fn schedule_phase_matches_quadrature() {
        let eps = 0.0025f64;
        let delta = 0.025;
        let s = gate_schedule(C64::new(eps, 0.0), delta, PI / 2.0).unwrap();
        let n = 200_000;
        let h = s.gate_time / n as f64;
        let f = |t: f64| -(eps * eps / delta) * (1.0 - (delta * t).cos());
        let mut sum = f(0.0) + f(s.gate_time);
        for k in 1..n {
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        let quad = sum * h / 3.0;
        assert!((quad + s.phi).abs() < 1e-10);
    }

    #[test]
    fn schedule_infeasible() {
        let err = gate_schedule(C64::new(0.1, 0.0), 0.025, 0.01).unwrap_err();
        assert!(matches!(err, Error::ScheduleInfeasible(_)));
        assert!(matches!(
            gate_schedule(C64::new(0.1, 0.0), 0.0, 1.0),
            Err(Error::ZeroDetuning(_))
        ));
    }

    #[test]
    fn derived_paper_parameters() {
        let d = DerivedParams::derive(
            &SystemParams::paper(0.025, 0.0, fock()),
            PI / 2.0,
            DEFAULT_LAMBDA_TOLERANCE,
        )
        .unwrap();
        assert_eq!(d.loops(), 25);
        assert!((d.delta() - 0.025).abs() < 1e-12);
        let turns = d.gate_time() * d.delta() / (2.0 * PI);
        assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn lambda_mismatch_rejected() {
        let mut sys = SystemParams::paper(0.025, 0.0, fock());
        sys.dot_b.omega *= 1.01;
        sys.dot_b.omega_prime *= 1.01;
        let err = DerivedParams::derive(&sys, PI / 2.0, DEFAULT_LAMBDA_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::LambdaMismatch { .. }));
    }

    proptest! {
        #[test]
        fn lambda_antilinear_in_omega(
            g in 0.01f64..1.0, om_re in -20.0f64..20.0, om_im in -20.0f64..20.0,
            c_re in -3.0f64..3.0, c_im in -3.0f64..3.0, d in 50.0f64..300.0
        ) {
            let mut dot = DotParams::symmetric(g, 1.0, d, 0.03);
            dot.omega = C64::new(om_re, om_im);
            let base = derive_lambda(&dot).unwrap();
            let c = C64::new(c_re, c_im);
            dot.omega *= c;
            let scaled = derive_lambda(&dot).unwrap();
            prop_assert!((scaled - c.conj() * base).norm() <= 1e-12 * (1.0 + scaled.norm()));
        }

        #[test]
        fn lambda_linear_in_g(g in 0.01f64..1.0, k in 0.1f64..5.0, d in 50.0f64..300.0) {
            let dot = DotParams::symmetric(g, 7.0, d, 0.03);
            let scaled = DotParams { g: g * k, ..dot };
            let lhs = derive_lambda(&scaled).unwrap();
            let rhs = derive_lambda(&dot).unwrap() * k;
            prop_assert!((lhs - rhs).norm() <= 1e-15);
        }

        #[test]
        fn schedule_turns_are_integral(
            eps in 0.001f64..0.01, delta in 0.01f64..0.5, target in 0.5f64..4.0
        ) {
            if let Ok(s) = gate_schedule(C64::new(eps, 0.0), delta, target) {
                let turns = s.gate_time * delta / (2.0 * PI);
                prop_assert!((turns - s.loops as f64).abs() <= 1e-9 * s.loops as f64);
                let expected = 2.0 * PI * s.loops as f64 * eps * eps / (delta * delta);
                prop_assert!((s.phi - expected).abs() <= 1e-15 * expected.max(1.0));
            }
        }
    }
}

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{gamma0_mev, DerivedParams, EffectiveParams, SystemParams};
use crate::report::full_precision;

use super::fidelity::{run_gate_fidelity_with, GateOptions};
use super::states::InitialStateSet;

pub const SWEEP_CSV_HEADER: &str = "swept_value,mean_fidelity,std_error,min_fidelity,n_states";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub min_fidelity: f64,
    pub n_states: usize,
}

/// One curve: rows in grid order plus `key = value` metadata written as
/// `#` comment lines ahead of the header.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                full_precision(r.swept_value),
                full_precision(r.mean_fidelity),
                full_precision(r.std_error),
                full_precision(r.min_fidelity),
                r.n_states
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_fidelity).collect()
    }
}

/// Parameter values as metadata lines, full precision.
pub fn parameter_snapshot(sys: &SystemParams, derived: &DerivedParams) -> Vec<(String, String)> {
    let mut m = Vec::new();
    for (name, dot) in [("dot_a", &sys.dot_a), ("dot_b", &sys.dot_b)] {
        m.push((format!("{name}.g"), full_precision(dot.g)));
        m.push((format!("{name}.omega"), complex(dot.omega)));
        m.push((format!("{name}.omega_prime"), complex(dot.omega_prime)));
        m.push((format!("{name}.delta_laser"), full_precision(dot.delta_laser)));
        m.push((format!("{name}.delta_laser_prime"), full_precision(dot.delta_laser_prime)));
        m.push((format!("{name}.delta_cavity"), full_precision(dot.delta_cavity)));
    }
    m.push(("cavity.fock_cutoff".into(), sys.fock.cutoff().to_string()));
    m.push(("epsilon".into(), complex(derived.epsilon())));
    m.push(("delta".into(), full_precision(derived.delta())));
    m.push(("loops".into(), derived.loops().to_string()));
    m.push(("gate_time_inv_mev".into(), full_precision(derived.gate_time())));
    m.push(("phi".into(), full_precision(derived.phi())));
    m
}

fn complex(z: crate::qcore::C64) -> String {
    format!("{}{:+.16e}i", full_precision(z.re), z.im)
}

fn header(
    kind: &str,
    sys: &SystemParams,
    derived: &DerivedParams,
    states: &InitialStateSet,
    opts: &GateOptions,
) -> Vec<(String, String)> {
    let mut m = vec![
        ("sweep".to_string(), kind.to_string()),
        ("mode".into(), opts.mode.to_string()),
        ("strategy".into(), opts.effective_strategy().to_string()),
        ("seed".into(), states.seed.to_string()),
        ("states".into(), states.len().to_string()),
        ("complex_states".into(), states.is_complex().to_string()),
        ("substeps".into(), opts.substeps.to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    m.extend(parameter_snapshot(sys, derived));
    m
}

/// Fidelity against cavity decay. `gamma_factors` are multiples of the
/// 5 ns decay rate; rows come out sorted by decay rate.
pub fn sweep_decay(
    sys: &SystemParams,
    derived: &DerivedParams,
    gamma_factors: &[f64],
    states: &InitialStateSet,
    opts: &GateOptions,
) -> Result<SweepTable> {
    if gamma_factors.is_empty() {
        return Err(Error::InvalidParameter("decay grid is empty".into()));
    }
    if let Some(bad) = gamma_factors.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay multiples must be finite and ≥ 0, got {bad}"
        )));
    }
    let mut grid = gamma_factors.to_vec();
    grid.sort_by(f64::total_cmp);
    let gamma0 = gamma0_mev();
    let mut rows = Vec::with_capacity(grid.len());
    for factor in grid {
        let r = run_gate_fidelity_with(
            sys,
            &derived.effective,
            &derived.schedule,
            factor * gamma0,
            states,
            opts,
        )?;
        rows.push(SweepRow {
            swept_value: factor,
            mean_fidelity: r.mean,
            std_error: r.std_error,
            min_fidelity: r.min,
            n_states: states.len(),
        });
    }
    let mut metadata = header("decay", sys, derived, states, opts);
    metadata.push(("swept".into(), "gamma / gamma0".into()));
    metadata.push(("gamma0_mev".into(), full_precision(gamma0)));
    Ok(SweepTable { rows, metadata })
}

/// Which physical parameter a fluctuation acts on (both dots alike).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluctuationParameter {
    /// Cavity couplings g_j.
    G,
    /// Both drive Rabi frequencies Ω_j, Ω'_j.
    Omega,
    /// Drive detunings Δ_j, Δ'_j; cavity detunings follow so δ is unchanged.
    DeltaLaser,
    /// Cavity detunings Δ_j^C; drive detunings follow so δ is unchanged.
    DeltaCavity,
    /// The effective coupling ε itself.
    Epsilon,
}

impl FluctuationParameter {
    pub const ALL: [FluctuationParameter; 5] = [
        Self::G,
        Self::Omega,
        Self::DeltaLaser,
        Self::DeltaCavity,
        Self::Epsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::G => "g",
            Self::Omega => "omega",
            Self::DeltaLaser => "delta_laser",
            Self::DeltaCavity => "delta_cavity",
            Self::Epsilon => "epsilon",
        }
    }
}

impl FromStr for FluctuationParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown fluctuation parameter `{s}` (expected g, omega, delta_laser, delta_cavity or epsilon)"
                ))
            })
    }
}

impl fmt::Display for FluctuationParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSpec {
    /// Relative error Δk/k.
    pub zeta: f64,
    pub parameter: FluctuationParameter,
}

impl FluctuationSpec {
    pub fn new(zeta: f64, parameter: FluctuationParameter) -> Result<Self> {
        if !(0.0..1.0).contains(&zeta) {
            return Err(Error::InvalidParameter(format!(
                "fluctuation ζ must lie in [0, 1), got {zeta}"
            )));
        }
        Ok(Self { zeta, parameter })
    }

    /// The perturbed physical system and the effective coupling it implies.
    pub fn apply(
        &self,
        sys: &SystemParams,
        nominal: &EffectiveParams,
    ) -> Result<(SystemParams, EffectiveParams)> {
        let k = 1.0 + self.zeta;
        let mut p = *sys;
        for dot in [&mut p.dot_a, &mut p.dot_b] {
            let delta = dot.detuning_difference();
            match self.parameter {
                FluctuationParameter::G => dot.g *= k,
                FluctuationParameter::Omega => {
                    dot.omega *= k;
                    dot.omega_prime *= k;
                }
                FluctuationParameter::DeltaLaser => {
                    dot.delta_laser *= k;
                    dot.delta_laser_prime *= k;
                    dot.delta_cavity = dot.delta_laser + delta;
                }
                FluctuationParameter::DeltaCavity => {
                    dot.delta_cavity *= k;
                    let shift = dot.delta_cavity - delta - dot.delta_laser;
                    dot.delta_laser += shift;
                    dot.delta_laser_prime += shift;
                }
                FluctuationParameter::Epsilon => {}
            }
        }
        let effective = match self.parameter {
            FluctuationParameter::Epsilon => EffectiveParams {
                lambda_a: nominal.lambda_a * k,
                lambda_b: nominal.lambda_b * k,
                epsilon: nominal.epsilon * k,
                delta: nominal.delta,
            },
            _ => EffectiveParams::from_system(&p, None)?,
        };
        Ok((p, effective))
    }
}

/// Fidelity against a common relative error ζ in one parameter class, with
/// the gate schedule frozen at its nominal value.
pub fn sweep_fluctuation(
    sys: &SystemParams,
    derived: &DerivedParams,
    gamma: f64,
    parameter: FluctuationParameter,
    zetas: &[f64],
    states: &InitialStateSet,
    opts: &GateOptions,
) -> Result<SweepTable> {
    if zetas.is_empty() {
        return Err(Error::InvalidParameter("fluctuation grid is empty".into()));
    }
    let specs = zetas
        .iter()
        .map(|&z| FluctuationSpec::new(z, parameter))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let (perturbed, effective) = spec.apply(sys, &derived.effective)?;
        let r = run_gate_fidelity_with(&perturbed, &effective, &derived.schedule, gamma, states, opts)?;
        rows.push(SweepRow {
            swept_value: spec.zeta,
            mean_fidelity: r.mean,
            std_error: r.std_error,
            min_fidelity: r.min,
            n_states: states.len(),
        });
    }
    let mut metadata = header("fluctuation", sys, derived, states, opts);
    metadata.push(("swept".into(), "zeta".into()));
    metadata.push(("parameter".into(), parameter.to_string()));
    metadata.push(("gamma_mev".into(), full_precision(gamma)));
    Ok(SweepTable { rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::FockConfig;
    use std::f64::consts::PI;

    fn setup() -> (SystemParams, DerivedParams) {
        let sys = SystemParams::paper(0.025, 0.0, FockConfig::new(12).unwrap());
        let d = DerivedParams::derive(&sys, PI / 2.0, 1e-6).unwrap();
        (sys, d)
    }

    #[test]
    fn decay_rows_sorted_and_monotone() {
        let (sys, d) = setup();
        let states = InitialStateSet::generate(3, 40).unwrap();
        let t = sweep_decay(&sys, &d, &[2.0, 0.0, 1.0], &states, &GateOptions::default()).unwrap();
        let x: Vec<f64> = t.rows.iter().map(|r| r.swept_value).collect();
        assert_eq!(x, vec![0.0, 1.0, 2.0]);
        let m = t.means();
        assert!(m[0] >= m[1] && m[1] >= m[2]);
        assert!(sweep_decay(&sys, &d, &[], &states, &GateOptions::default()).is_err());
        assert!(sweep_decay(&sys, &d, &[-1.0], &states, &GateOptions::default()).is_err());
    }

    #[test]
    fn zero_fluctuation_matches_decay_point() {
        let (sys, d) = setup();
        let states = InitialStateSet::generate(3, 20).unwrap();
        let opts = GateOptions::default();
        let decay = sweep_decay(&sys, &d, &[1.0], &states, &opts).unwrap();
        for p in FluctuationParameter::ALL {
            let f = sweep_fluctuation(&sys, &d, gamma0_mev(), p, &[0.0], &states, &opts).unwrap();
            assert_eq!(f.rows[0].mean_fidelity, decay.rows[0].mean_fidelity, "{p}");
        }
    }

    #[test]
    fn detuning_fluctuations_keep_delta() {
        let (sys, d) = setup();
        for p in [FluctuationParameter::DeltaLaser, FluctuationParameter::DeltaCavity] {
            let (q, e) = FluctuationSpec::new(0.03, p).unwrap().apply(&sys, &d.effective).unwrap();
            assert!((e.delta - d.delta()).abs() < 1e-9);
            assert!((q.dot_a.detuning_difference() - 0.025).abs() < 1e-9);
        }
        let (q, _) = FluctuationSpec::new(0.03, FluctuationParameter::DeltaCavity)
            .unwrap()
            .apply(&sys, &d.effective)
            .unwrap();
        assert!((q.dot_a.delta_cavity - 200.025 * 1.03).abs() < 1e-9);
    }

    #[test]
    fn coupling_fluctuation_scales_epsilon() {
        let (sys, d) = setup();
        for p in [FluctuationParameter::G, FluctuationParameter::Omega, FluctuationParameter::Epsilon] {
            let (_, e) = FluctuationSpec::new(0.02, p).unwrap().apply(&sys, &d.effective).unwrap();
            assert!((e.epsilon / d.epsilon() - 1.02).norm() < 1e-12, "{p}");
        }
    }

    #[test]
    fn zeta_range_enforced() {
        assert!(FluctuationSpec::new(1.0, FluctuationParameter::G).is_err());
        assert!(FluctuationSpec::new(-0.1, FluctuationParameter::G).is_err());
        assert!("nonsense".parse::<FluctuationParameter>().is_err());
    }

    #[test]
    fn csv_layout() {
        let t = SweepTable {
            rows: vec![SweepRow {
                swept_value: 0.5,
                mean_fidelity: 0.99,
                std_error: 1e-4,
                min_fidelity: 0.98,
                n_states: 3,
            }],
            metadata: vec![("mode".into(), "effective".into())],
        };
        let s = t.to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# mode = effective");
        assert_eq!(lines[1], SWEEP_CSV_HEADER);
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,9.8999999999999999e-1,1.0000000000000000e-4,9.7999999999999998e-1,3"
        );
    }
}

//! Conditional displacement paths and the phases they enclose.
//!
//! Under the effective Hamiltonian each qubit sector drives the cavity along
//! a circle in phase space, `dα = i w ε* e^{−iδt} dt` with weight `w` = 0, 1,
//! 1, 2 for ff, fg, gf, gg. Closed-form paths and phases are given here,
//! together with a polyline evaluator that composes short displacements one
//! by one and accumulates `Im Σ Δα_m Σ_{k<m} Δα_k*`.
//!
//! Phases are accumulated as real numbers and never wrapped, so the
//! contribution of every loop stays visible.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::to_ps;
use crate::qcore::{Matrix, C64, I, ZERO};
use crate::report::full_precision;

/// Phase-space amplitudes of the three driven sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorAmplitudes {
    pub fg: C64,
    pub gf: C64,
    pub gg: C64,
}

/// Accumulated phases in radians (unwrapped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPhases {
    pub fg: f64,
    pub gf: f64,
    pub theta_gg: f64,
    pub gg: f64,
}

fn require_detuning(delta: f64) -> Result<()> {
    if delta == 0.0 {
        Err(Error::ZeroDetuning("δ is zero"))
    } else {
        Ok(())
    }
}

/// `α_fg(t) = −(ε*/δ)(e^{−iδt} − 1)`, `α_gf = α_fg`, `α_gg = 2α_fg`.
pub fn alpha_closed_form(epsilon: C64, delta: f64, t: f64) -> Result<SectorAmplitudes> {
    require_detuning(delta)?;
    let rotation = C64::from_polar(1.0, -delta * t) - 1.0;
    let fg = -epsilon.conj() / delta * rotation;
    Ok(SectorAmplitudes {
        fg,
        gf: fg,
        gg: fg + fg,
    })
}

/// `t − sin(δt)/δ`, evaluated by series near t = 0 where the two terms cancel.
fn loop_excess(delta: f64, t: f64) -> f64 {
    let x = delta * t;
    if x.abs() < 1e-2 {
        // x³/6 − x⁵/120 + x⁷/5040 − x⁹/362880, divided by δ
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0))) / delta
    } else {
        t - x.sin() / delta
    }
}

/// `φ_fg = φ_gf = −(|ε|²/δ)(t − sin(δt)/δ)`, `θ_gg = 2φ_fg`,
/// `φ_gg = φ_fg + φ_gf + θ_gg`.
pub fn phases_closed_form(epsilon: C64, delta: f64, t: f64) -> Result<SectorPhases> {
    require_detuning(delta)?;
    let fg = -epsilon.norm_sqr() / delta * loop_excess(delta, t);
    let theta_gg = -2.0 * epsilon.norm_sqr() / delta * loop_excess(delta, t);
    Ok(SectorPhases {
        fg,
        gf: fg,
        theta_gg,
        gg: fg + fg + theta_gg,
    })
}

/// Phase and net displacement of a product of straight displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylinePhase {
    pub total_phase: f64,
    pub net_displacement: C64,
}

/// Composes `D(Δα_N)…D(Δα_1)` for the segments of `path` and returns the
/// accumulated phase `Im Σ_{m≥2} Δα_m Σ_{k<m} Δα_k*` with the net
/// displacement `Σ Δα_m`. For a closed path the phase is `Im ∮ α* dα`, twice
/// the signed enclosed area.
pub fn total_phase_polyline(path: &[C64]) -> Result<PolylinePhase> {
    if path.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a polyline needs at least 2 points, got {}",
            path.len()
        )));
    }
    let mut running = ZERO; // Σ_{k<m} Δα_k
    let mut phase = 0.0;
    for w in path.windows(2) {
        let step = w[1] - w[0];
        phase += (step * running.conj()).im;
        running += step;
    }
    Ok(PolylinePhase {
        total_phase: phase,
        net_displacement: running,
    })
}

/// The sector-`fg` path sampled at `segments + 1` equally spaced times over
/// `loops` periods, for feeding to [`total_phase_polyline`].
pub fn discretized_loop(epsilon: C64, delta: f64, loops: f64, segments: usize) -> Result<Vec<C64>> {
    require_detuning(delta)?;
    let horizon = loops * 2.0 * PI / delta.abs();
    (0..=segments)
        .map(|k| {
            let t = horizon * k as f64 / segments as f64;
            alpha_closed_form(epsilon, delta, t).map(|a| a.fg)
        })
        .collect()
}

/// Diagonal two-qubit gate on the ordered basis {ff, fg, gf, gg}.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealGate {
    pub phi: f64,
    pub corrected: bool,
    pub unitary: Matrix,
}

impl IdealGate {
    pub fn diagonal(&self) -> [C64; 4] {
        [
            self.unitary[[0, 0]],
            self.unitary[[1, 1]],
            self.unitary[[2, 2]],
            self.unitary[[3, 3]],
        ]
    }
}

/// Phase factors acquired by each sector after closed loops with total phase
/// Φ per singly-driven sector: `(1, e^{−iΦ}, e^{−iΦ}, e^{−4iΦ})`. With the
/// single-qubit correction `|g⟩_j → e^{iΦ}|g⟩_j` this becomes
/// `(1, 1, 1, e^{−2iΦ})`.
pub fn ideal_gate(phi: f64, corrected: bool) -> IdealGate {
    let exponents = if corrected {
        [0.0, 0.0, 0.0, -2.0 * phi]
    } else {
        [0.0, -phi, -phi, -4.0 * phi]
    };
    let mut unitary = Array2::from_elem((4, 4), ZERO);
    for (k, e) in exponents.iter().enumerate() {
        // wrapped only here, at gate construction
        unitary[[k, k]] = (I * e.rem_euclid(2.0 * PI)).exp();
    }
    IdealGate {
        phi,
        corrected,
        unitary,
    }
}

/// Time series of the conditional amplitudes and phases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub alpha_fg: Vec<C64>,
    pub alpha_gf: Vec<C64>,
    pub alpha_gg: Vec<C64>,
    pub phi_fg: Vec<f64>,
    pub phi_gf: Vec<f64>,
    pub theta_gg: Vec<f64>,
    pub phi_gg: Vec<f64>,
}

pub const PATH_CSV_HEADER: &str = "t_inv_mev,t_ps,alpha_fg_re,alpha_fg_im,alpha_gf_re,alpha_gf_im,alpha_gg_re,alpha_gg_im,phi_fg,phi_gf,theta_gg,phi_gg";

impl PathRecord {
    pub fn sample(epsilon: C64, delta: f64, times: &[f64]) -> Result<Self> {
        require_detuning(delta)?;
        let mut rec = PathRecord::default();
        for &t in times {
            let a = alpha_closed_form(epsilon, delta, t)?;
            let p = phases_closed_form(epsilon, delta, t)?;
            rec.times.push(t);
            rec.alpha_fg.push(a.fg);
            rec.alpha_gf.push(a.gf);
            rec.alpha_gg.push(a.gg);
            rec.phi_fg.push(p.fg);
            rec.phi_gf.push(p.gf);
            rec.theta_gg.push(p.theta_gg);
            rec.phi_gg.push(p.gg);
        }
        Ok(rec)
    }

    /// `samples` equally spaced times covering `loops` periods, endpoints
    /// included. Zero loops yields an empty record.
    pub fn over_loops(epsilon: C64, delta: f64, loops: u64, samples: usize) -> Result<Self> {
        require_detuning(delta)?;
        if loops == 0 || samples == 0 {
            return Ok(Self::default());
        }
        let horizon = loops as f64 * 2.0 * PI / delta.abs();
        let times: Vec<f64> = if samples == 1 {
            vec![horizon]
        } else {
            (0..samples)
                .map(|k| horizon * k as f64 / (samples - 1) as f64)
                .collect()
        };
        Self::sample(epsilon, delta, &times)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{PATH_CSV_HEADER}")?;
        for k in 0..self.len() {
            let t = self.times[k];
            let cols = [
                t,
                to_ps(t),
                self.alpha_fg[k].re,
                self.alpha_fg[k].im,
                self.alpha_gf[k].re,
                self.alpha_gf[k].im,
                self.alpha_gg[k].re,
                self.alpha_gg[k].im,
                self.phi_fg[k],
                self.phi_gf[k],
                self.theta_gg[k],
                self.phi_gg[k],
            ];
            let line: Vec<String> = cols.iter().map(|&x| full_precision(x)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

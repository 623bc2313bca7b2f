//! Unit conversions at the I/O boundary.
//!
//! Internally ħ = 1: energies and rates are in meV, times in meV⁻¹.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// ħ in meV·ps (CODATA value rounded to eight significant digits).
pub const HBAR_MEV_PS: f64 = 0.65821195;

/// Cavity decay rate γ₀ = (5 ns)⁻¹ expressed as an energy in meV.
pub fn gamma0_mev() -> f64 {
    convert_units(0.2, UnitKind::RatePerNsToMev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    /// E (meV) → ω = E/ħ (rad/ps)
    EnergyMevToAngularPerPs,
    AngularPerPsToEnergyMev,
    /// t (meV⁻¹) → t·ħ (ps)
    TimeInverseMevToPs,
    PsToTimeInverseMev,
    /// rate (ns⁻¹) → ħ·rate (meV)
    RatePerNsToMev,
    MevToRatePerNs,
}

impl UnitKind {
    pub fn inverse(self) -> Self {
        use UnitKind::*;
        match self {
            EnergyMevToAngularPerPs => AngularPerPsToEnergyMev,
            AngularPerPsToEnergyMev => EnergyMevToAngularPerPs,
            TimeInverseMevToPs => PsToTimeInverseMev,
            PsToTimeInverseMev => TimeInverseMevToPs,
            RatePerNsToMev => MevToRatePerNs,
            MevToRatePerNs => RatePerNsToMev,
        }
    }

    const NAMES: [(&'static str, UnitKind); 6] = [
        ("energy_mev->angular_freq_per_ps", UnitKind::EnergyMevToAngularPerPs),
        ("angular_freq_per_ps->energy_mev", UnitKind::AngularPerPsToEnergyMev),
        ("time_inverse_mev->ps", UnitKind::TimeInverseMevToPs),
        ("ps->time_inverse_mev", UnitKind::PsToTimeInverseMev),
        ("rate_per_ns->mev", UnitKind::RatePerNsToMev),
        ("mev->rate_per_ns", UnitKind::MevToRatePerNs),
    ];
}

impl FromStr for UnitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::UnknownUnitKind(s.to_string()))
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = Self::NAMES.iter().find(|(_, k)| k == self).map(|(n, _)| *n);
        f.write_str(name.unwrap_or("?"))
    }
}

pub fn convert_units(value: f64, kind: UnitKind) -> f64 {
    use UnitKind::*;
    match kind {
        EnergyMevToAngularPerPs => value / HBAR_MEV_PS,
        AngularPerPsToEnergyMev => value * HBAR_MEV_PS,
        TimeInverseMevToPs => value * HBAR_MEV_PS,
        PsToTimeInverseMev => value / HBAR_MEV_PS,
        RatePerNsToMev => value * HBAR_MEV_PS * 1e-3,
        MevToRatePerNs => value / (HBAR_MEV_PS * 1e-3),
    }
}

/// Time in meV⁻¹ to picoseconds.
pub fn to_ps(t_inv_mev: f64) -> f64 {
    convert_units(t_inv_mev, UnitKind::TimeInverseMevToPs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma0_in_mev() {
        // ħ · 0.2 ns⁻¹ = 0.65821195 meV·ps · 2e-4 ps⁻¹
        assert!((gamma0_mev() - 1.3164239e-4).abs() < 1e-12);
    }

    #[test]
    fn gate_time_to_ps() {
        assert!((to_ps(6283.19) - 4135.67).abs() < 0.01);
    }

    #[test]
    fn round_trips() {
        for kind in UnitKind::NAMES.iter().map(|(_, k)| *k) {
            for x in [1e-6, 0.37, 123.0, 6.2e5] {
                let back = convert_units(convert_units(x, kind), kind.inverse());
                assert!(((back - x) / x).abs() < 1e-12, "{kind}");
            }
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            "rate_per_ns->mev".parse::<UnitKind>().unwrap(),
            UnitKind::RatePerNsToMev
        );
        assert!(matches!(
            "furlongs->mev".parse::<UnitKind>(),
            Err(Error::UnknownUnitKind(_))
        ));
    }
}

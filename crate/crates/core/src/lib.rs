//! Simulation of an unconventional geometric phase gate between two
//! three-level quantum dots sharing a lossy cavity mode.
//!
//! Each dot is driven by two detuned lasers. After adiabatic elimination of
//! the excited levels the cavity is displaced around a closed loop whose
//! size depends on how many dots are in |g⟩, and the enclosed area becomes a
//! conditional phase. The crate provides
//!
//! - [`qcore`]: operators on truncated Fock and dot spaces,
//! - [`model`]: parameters, effective couplings and the gate schedule,
//! - [`hamiltonians`]: the full and effective Hamiltonians,
//! - [`geometry`]: closed-form paths and phases,
//! - [`lindblad`]: master-equation integration with cavity decay,
//! - [`experiments`]: fidelity averages and parameter sweeps.
//!
//! ```
//! use qdgate::model::{DerivedParams, SystemParams};
//! use qdgate::qcore::FockConfig;
//!
//! let sys = SystemParams::paper(0.025, 0.0, FockConfig::new(12)?);
//! let derived = DerivedParams::derive(&sys, std::f64::consts::FRAC_PI_2, 1e-6)?;
//! assert_eq!(derived.loops(), 25);
//! # Ok::<(), qdgate::Error>(())
//! ```

pub mod checks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hamiltonians;
pub mod lindblad;
pub mod model;
pub mod qcore;
pub mod report;

pub use error::{Error, Result};

// Runs the guide's snippets as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/parameters.md")]
    pub struct Parameters;
    #[doc = include_str!("../../../book/src/phase-space.md")]
    pub struct PhaseSpace;
    #[doc = include_str!("../../../book/src/master-equation.md")]
    pub struct MasterEquation;
    #[doc = include_str!("../../../book/src/fidelity.md")]
    pub struct Fidelity;
    #[doc = include_str!("../../../book/src/effective-model.md")]
    pub struct EffectiveModel;
    #[doc = include_str!("../../../book/src/checks.md")]
    pub struct Checks;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../book/src/reference-values.md")]
    pub struct ReferenceValues;
}

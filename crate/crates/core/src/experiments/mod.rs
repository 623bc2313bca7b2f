//! Gate-level experiments built on the integrator: fidelity averaged over
//! random inputs, decay and fluctuation sweeps, and a check of the
//! effective Hamiltonian against the full one.
//!
//! Every run is deterministic for a given seed. Work is spread over a local
//! rayon pool, and results are always gathered in input order, so the worker
//! count never changes a single bit of output.

mod fidelity;
pub mod reference;
mod states;
mod sweep;
mod verify;

pub use fidelity::{
    run_gate_fidelity, run_gate_fidelity_with, summarize, FidelityStrategy, GateDiagnostics,
    GateFidelity, GateOptions, DEFAULT_STEP_BUDGET,
};
pub use states::{
    embed_sectors, target_amplitudes, target_state, InitialStateSet, DEFAULT_STATE_COUNT,
};
pub use sweep::{
    parameter_snapshot, sweep_decay, sweep_fluctuation, FluctuationParameter, FluctuationSpec,
    SweepRow, SweepTable, SWEEP_CSV_HEADER,
};
pub use verify::{
    scaled_system, verify_effective, ScalePoint, VerifyOptions, VerifyReport, LEAKAGE_MARGIN,
    VERIFY_CSV_HEADER,
};

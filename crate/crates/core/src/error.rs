use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "Fock cutoff {cutoff} too small for |alpha| = {abs_alpha:.6}: need at least {required:.2} levels"
    )]
    Truncation {
        cutoff: usize,
        abs_alpha: f64,
        required: f64,
    },

    #[error("Fock cutoff must be at least 2, got {0}")]
    FockCutoff(usize),

    #[error("zero detuning: {0}")]
    ZeroDetuning(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gate schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("unknown unit conversion kind `{0}`")]
    UnknownUnitKind(String),

    #[error(
        "detuning differences disagree between dots: {delta_a} meV vs {delta_b} meV (must be equal within 1e-9)"
    )]
    DetuningMismatch { delta_a: f64, delta_b: f64 },

    #[error(
        "effective couplings not matched: |lambda_a - lambda_b| = {difference:.3e} meV exceeds {tolerance:.3e} meV"
    )]
    LambdaMismatch { difference: f64, tolerance: f64 },

    #[error(
        "truncation unsafe: top Fock levels reached population {population:.3e} (limit {limit:.1e})"
    )]
    TruncationUnsafe { population: f64, limit: f64 },

    #[error("intractable configuration: estimated {estimated} integration steps exceeds budget {budget}")]
    Intractable { estimated: u64, budget: u64 },

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

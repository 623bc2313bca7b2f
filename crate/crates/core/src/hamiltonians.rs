//! Interaction-picture Hamiltonians on the composite space dotA ⊗ dotB ⊗ field.
//!
//! Each dot is a three-level system with ordered basis {|g⟩, |f⟩, |e⟩}; the
//! field is truncated to `N` Fock levels and is the fastest-varying index,
//! so basis state (a, b, n) sits at `(3a + b)·N + n`.
//!
//! Two generators are provided:
//!
//! * [`Mode::Full`]: the driven dots coupled to the cavity,
//!   `Σ_j [g_j a e^{iΔ_j^C t} + (Ω_j/2) e^{iΔ_j t} + (Ω'_j/2) e^{−iΔ'_j t}] σ_j^+ + h.c.`
//! * [`Mode::Effective`]: the displacement Hamiltonian that remains after the
//!   excited level is eliminated,
//!   `−Σ_j (ε a e^{iδt} + ε* a† e^{−iδt}) |g⟩_j⟨g|`.
//!
//! Both are stored as static sparse blocks times scalar phase factors.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{EffectiveParams, SystemParams};
use crate::qcore::{
    annihilation, identity, tensor, FockConfig, Matrix, PhaseCoefficient, SparseMatrix,
    TimeDependentOperator, C64, ONE, ZERO,
};

pub const DOT_DIM: usize = 3;
pub const G: usize = 0;
pub const F: usize = 1;
pub const E: usize = 2;

/// The four qubit sectors in the order used everywhere: ff, fg, gf, gg
/// (first letter dot A).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    FF,
    FG,
    GF,
    GG,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::FF, Sector::FG, Sector::GF, Sector::GG];

    /// Dot levels (A, B).
    pub fn levels(self) -> (usize, usize) {
        match self {
            Sector::FF => (F, F),
            Sector::FG => (F, G),
            Sector::GF => (G, F),
            Sector::GG => (G, G),
        }
    }

    /// Number of dots in |g⟩, i.e. how strongly this sector drives the cavity.
    pub fn weight(self) -> u8 {
        match self {
            Sector::FF => 0,
            Sector::FG | Sector::GF => 1,
            Sector::GG => 2,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Sector::FF => "ff",
            Sector::FG => "fg",
            Sector::GF => "gf",
            Sector::GG => "gg",
        }
    }
}

/// Composite index of |a⟩_A |b⟩_B |n⟩.
pub fn composite_index(dot_a: usize, dot_b: usize, n: usize, fock: FockConfig) -> usize {
    (dot_a * DOT_DIM + dot_b) * fock.cutoff() + n
}

pub fn composite_dim(fock: FockConfig) -> usize {
    DOT_DIM * DOT_DIM * fock.cutoff()
}

fn dot_operator(row: usize, col: usize) -> Matrix {
    let mut m = Array2::from_elem((DOT_DIM, DOT_DIM), ZERO);
    m[[row, col]] = ONE;
    m
}

/// `σ^+ = |e⟩⟨g|` on one dot.
pub fn sigma_plus() -> Matrix {
    dot_operator(E, G)
}

/// `|g⟩⟨g|` on one dot.
pub fn ground_projector() -> Matrix {
    dot_operator(G, G)
}

/// Which dot an embedded operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dot {
    A,
    B,
}

/// Embeds a dot operator and a field operator into the composite space.
pub fn embed(dot: Dot, dot_op: &Matrix, field_op: &Matrix) -> Matrix {
    let id = identity(DOT_DIM);
    let factors = match dot {
        Dot::A => [dot_op, &id, field_op],
        Dot::B => [&id, dot_op, field_op],
    };
    tensor(&factors).expect("square factors")
}

/// `I ⊗ I ⊗ a`.
pub fn field_annihilation(fock: FockConfig) -> SparseMatrix {
    let id = identity(DOT_DIM);
    SparseMatrix::from_dense(&tensor(&[&id, &id, &annihilation(fock)]).expect("square factors"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Effective,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "effective" => Ok(Mode::Effective),
            other => Err(Error::InvalidParameter(format!(
                "mode must be `full` or `effective`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Effective => "effective",
        })
    }
}

/// A Hamiltonian on the composite space, evaluated at arbitrary times.
#[derive(Debug, Clone)]
pub struct HamiltonianGenerator {
    mode: Mode,
    fock: FockConfig,
    operator: TimeDependentOperator,
}

impl HamiltonianGenerator {
    pub fn full(sys: &SystemParams) -> Self {
        let fock = sys.fock;
        let a = annihilation(fock);
        let id_field = identity(fock.cutoff());
        let sp = sigma_plus();
        let mut op = TimeDependentOperator::zero(composite_dim(fock));
        for (dot, params) in [(Dot::A, &sys.dot_a), (Dot::B, &sys.dot_b)] {
            let cavity = SparseMatrix::from_dense(&embed(dot, &sp, &a));
            let drive = SparseMatrix::from_dense(&embed(dot, &sp, &id_field));
            op.push_with_adjoint(
                cavity,
                PhaseCoefficient {
                    amplitude: C64::new(params.g, 0.0),
                    frequency: params.delta_cavity,
                },
            );
            op.push_with_adjoint(
                drive.clone(),
                PhaseCoefficient {
                    amplitude: params.omega / 2.0,
                    frequency: params.delta_laser,
                },
            );
            op.push_with_adjoint(
                drive,
                PhaseCoefficient {
                    amplitude: params.omega_prime / 2.0,
                    frequency: -params.delta_laser_prime,
                },
            );
        }
        Self {
            mode: Mode::Full,
            fock,
            operator: op,
        }
    }

    pub fn effective(params: &EffectiveParams, fock: FockConfig) -> Self {
        let a = annihilation(fock);
        let proj = ground_projector();
        let projected_a = embed(Dot::A, &proj, &a) + embed(Dot::B, &proj, &a);
        let mut op = TimeDependentOperator::zero(composite_dim(fock));
        op.push_with_adjoint(
            SparseMatrix::from_dense(&projected_a),
            PhaseCoefficient {
                amplitude: -params.epsilon,
                frequency: params.delta,
            },
        );
        Self {
            mode: Mode::Effective,
            fock,
            operator: op,
        }
    }

    pub fn build(mode: Mode, sys: &SystemParams, effective: &EffectiveParams) -> Self {
        match mode {
            Mode::Full => Self::full(sys),
            Mode::Effective => Self::effective(effective, sys.fock),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn fock(&self) -> FockConfig {
        self.fock
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn operator(&self) -> &TimeDependentOperator {
        &self.operator
    }

    pub fn evaluate(&self, t: f64) -> Matrix {
        self.operator.evaluate(t)
    }

    /// Fastest phase rotation among the terms (δ or the largest detuning).
    pub fn fastest_frequency(&self) -> f64 {
        self.operator.max_frequency()
    }
}

/// `h(t) = −(ε a e^{iδt} + ε* a† e^{−iδt})` on the field alone, scaled by the
/// sector weight. This is the field-space block of the effective Hamiltonian
/// in a sector that has `weight` dots in |g⟩.
pub fn sector_field_hamiltonian(
    params: &EffectiveParams,
    weight: u8,
    fock: FockConfig,
) -> TimeDependentOperator {
    let mut op = TimeDependentOperator::zero(fock.cutoff());
    op.push_with_adjoint(
        SparseMatrix::from_dense(&annihilation(fock)),
        PhaseCoefficient {
            amplitude: -params.epsilon * weight as f64,
            frequency: params.delta,
        },
    );
    op
}

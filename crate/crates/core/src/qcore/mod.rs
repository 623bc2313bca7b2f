//! Dense complex linear algebra over truncated Fock and dot spaces.
//!
//! Operators are plain `ndarray` matrices of [`C64`]. Time-dependent
//! operators are stored as a list of static sparse blocks, each multiplied by
//! a scalar phase factor, so evaluating them at a new time never re-tensors.

mod expm;
mod fock;
mod matrix;
mod sparse;

pub use expm::expm;
pub use fock::{
    annihilation, coherent_state, creation, displacement_matrix, number, required_cutoff,
    CoherentState, FockConfig,
};
pub use matrix::{
    adjoint, basis_ket, commutator, identity, inner, is_hermitian, kron, max_abs, max_abs_diff,
    normalize, tensor, trace,
};
pub use sparse::{PhaseCoefficient, SparseMatrix, TimeDependentOperator, Term};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Matrix = Array2<C64>;
pub type Ket = Array1<C64>;

/// Complex zero and one, spelled out once.
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

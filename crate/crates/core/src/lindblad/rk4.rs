//! Fixed-step classical Runge–Kutta for `Ẋ = −i(H_L X − X H_R) + D[X]`.
//!
//! With `H_L = H_R = H` this is the Lindblad equation for a density matrix;
//! with different left and right generators it propagates an off-diagonal
//! block between two sectors; with a single column and a zero right
//! generator it is the Schrödinger equation.

use ndarray::Array2;

use crate::error::Result;
use crate::qcore::{Matrix, SparseMatrix, TimeDependentOperator, C64, I, ONE, ZERO};

/// A single collapse operator `L` with its cached products.
#[derive(Debug, Clone)]
pub struct Collapse {
    l: SparseMatrix,
    l_dag: SparseMatrix,
    l_dag_l: SparseMatrix,
}

impl Collapse {
    /// `L = sqrt(rate) · op`.
    pub fn new(op: &SparseMatrix, rate: f64) -> Self {
        let l = op.scaled(C64::new(rate.sqrt(), 0.0));
        let l_dag = l.adjoint();
        let l_dag_l = l_dag.matmul(&l);
        Self { l, l_dag, l_dag_l }
    }
}

pub(crate) struct TwoSided<'a> {
    pub left: &'a TimeDependentOperator,
    pub right: &'a TimeDependentOperator,
    pub collapse: Option<&'a Collapse>,
}

impl TwoSided<'_> {
    fn rhs(&self, t: f64, x: &Matrix, out: &mut Matrix, scratch: &mut Matrix) {
        out.fill(ZERO);
        let mut out_view = out.view_mut();
        self.left.add_mul_left(t, -I, x.view(), &mut out_view);
        self.right.add_mul_right(t, I, x.view(), &mut out_view);
        if let Some(c) = self.collapse {
            scratch.fill(ZERO);
            c.l.add_mul_left(ONE, x.view(), &mut scratch.view_mut());
            c.l_dag.add_mul_right(ONE, scratch.view(), &mut out_view);
            let half = C64::new(-0.5, 0.0);
            c.l_dag_l.add_mul_left(half, x.view(), &mut out_view);
            c.l_dag_l.add_mul_right(half, x.view(), &mut out_view);
        }
    }
}

/// Advances `x` by `steps` steps of size `dt` from `t0`. The observer sees
/// the state after every step and may abort by returning an error.
pub(crate) fn integrate<F>(
    eq: &TwoSided<'_>,
    mut x: Matrix,
    t0: f64,
    dt: f64,
    steps: u64,
    mut observer: F,
) -> Result<Matrix>
where
    F: FnMut(u64, f64, &mut Matrix) -> Result<()>,
{
    let shape = x.dim();
    let zeros = || Array2::from_elem(shape, ZERO);
    let (mut k1, mut k2, mut k3, mut k4) = (zeros(), zeros(), zeros(), zeros());
    let mut tmp = zeros();
    let mut scratch = zeros();
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let third = C64::new(dt / 3.0, 0.0);

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        eq.rhs(t, &x, &mut k1, &mut scratch);
        tmp.assign(&x);
        tmp.scaled_add(half, &k1);
        eq.rhs(t + 0.5 * dt, &tmp, &mut k2, &mut scratch);
        tmp.assign(&x);
        tmp.scaled_add(half, &k2);
        eq.rhs(t + 0.5 * dt, &tmp, &mut k3, &mut scratch);
        tmp.assign(&x);
        tmp.scaled_add(full, &k3);
        eq.rhs(t + dt, &tmp, &mut k4, &mut scratch);

        x.scaled_add(sixth, &k1);
        x.scaled_add(third, &k2);
        x.scaled_add(third, &k3);
        x.scaled_add(sixth, &k4);

        observer(step + 1, t0 + (step + 1) as f64 * dt, &mut x)?;
    }
    Ok(x)
}

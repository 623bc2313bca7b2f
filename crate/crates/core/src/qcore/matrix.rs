use ndarray::{Array1, Array2};

use super::{Ket, Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

pub fn identity(n: usize) -> Matrix {
    Array2::from_diag_elem(n, ONE)
}

/// Conjugate transpose.
pub fn adjoint(m: &Matrix) -> Matrix {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &Matrix) -> C64 {
    m.diag().iter().sum()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a.dot(b) - b.dot(a)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max|M - M†| <= rel_tol * max|M|`.
pub fn is_hermitian(m: &Matrix, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[[i, j]] - m[[j, i]].conj()).norm() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &x| *o = s * x);
        }
    }
    out
}

/// Kronecker product of square factors in the given order (leftmost factor is
/// the most significant index).
pub fn tensor(ops: &[&Matrix]) -> Result<Matrix> {
    let mut acc = identity(1);
    for (k, op) in ops.iter().enumerate() {
        if op.nrows() != op.ncols() {
            return Err(Error::Dimension(format!(
                "tensor factor {k} is {}x{}, expected square",
                op.nrows(),
                op.ncols()
            )));
        }
        acc = kron(&acc, op);
    }
    Ok(acc)
}

pub fn basis_ket(dim: usize, index: usize) -> Ket {
    let mut v = Array1::from_elem(dim, ZERO);
    v[index] = ONE;
    v
}

/// `<a|b>`, conjugating the left argument.
pub fn inner(a: &Ket, b: &Ket) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Scales `v` to unit norm and returns the norm it had.
pub fn normalize(v: &mut Ket) -> f64 {
    let norm = inner(v, v).re.sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|z| z / norm);
    }
    norm
}

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::{Ket, Matrix, C64, ZERO};

/// Coordinate-list operator used for the static blocks of a Hamiltonian.
///
/// Products with dense matrices cost O(nnz · dim) instead of O(dim³).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn from_dense(m: &Matrix) -> Self {
        let mut entries = Vec::new();
        for ((i, j), &v) in m.indexed_iter() {
            if v != ZERO {
                entries.push((i, j, v));
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Array2::from_elem((self.rows, self.cols), ZERO);
        for &(i, j, v) in &self.entries {
            m[[i, j]] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (j, i, v.conj()))
                .collect(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, s * v)).collect(),
        }
    }

    /// Sparse product `self · other`, both sparse.
    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        let dense = self.to_dense().dot(&other.to_dense());
        Self::from_dense(&dense)
    }

    /// `out += coef · S · x`
    pub fn add_mul_left(&self, coef: C64, x: ArrayView2<C64>, out: &mut ArrayViewMut2<C64>) {
        for &(i, j, v) in &self.entries {
            let c = coef * v;
            let src = x.row(j);
            let mut dst = out.row_mut(i);
            dst.zip_mut_with(&src, |o, &s| *o += c * s);
        }
    }

    /// `out += coef · x · S`
    pub fn add_mul_right(&self, coef: C64, x: ArrayView2<C64>, out: &mut ArrayViewMut2<C64>) {
        for &(i, j, v) in &self.entries {
            let c = coef * v;
            let src = x.column(i);
            let mut dst = out.column_mut(j);
            dst.zip_mut_with(&src, |o, &s| *o += c * s);
        }
    }

    /// `out += coef · S · v`
    pub fn add_apply(&self, coef: C64, v: &Ket, out: &mut Ket) {
        for &(i, j, s) in &self.entries {
            out[i] += coef * s * v[j];
        }
    }
}

/// `amplitude · exp(i · frequency · t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoefficient {
    pub amplitude: C64,
    pub frequency: f64,
}

impl PhaseCoefficient {
    pub fn constant(amplitude: C64) -> Self {
        Self {
            amplitude,
            frequency: 0.0,
        }
    }

    pub fn at(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.amplitude
        } else {
            self.amplitude * C64::from_polar(1.0, self.frequency * t)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub op: SparseMatrix,
    pub coefficient: PhaseCoefficient,
}

/// `H(t) = Σ_k c_k(t) S_k` with static sparse blocks `S_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentOperator {
    dim: usize,
    terms: Vec<Term>,
}

impl TimeDependentOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, op: SparseMatrix, coefficient: PhaseCoefficient) {
        assert_eq!(op.dim(), (self.dim, self.dim), "term dimension mismatch");
        if op.nnz() > 0 && coefficient.amplitude != ZERO {
            self.terms.push(Term { op, coefficient });
        }
    }

    /// Adds `c(t)·S` together with its Hermitian conjugate `c(t)*·S†`.
    pub fn push_with_adjoint(&mut self, op: SparseMatrix, coefficient: PhaseCoefficient) {
        let adj = PhaseCoefficient {
            amplitude: coefficient.amplitude.conj(),
            frequency: -coefficient.frequency,
        };
        let op_dag = op.adjoint();
        self.push(op, coefficient);
        self.push(op_dag, adj);
    }

    /// Every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    op: t.op.clone(),
                    coefficient: PhaseCoefficient {
                        amplitude: t.coefficient.amplitude * s,
                        frequency: t.coefficient.frequency,
                    },
                })
                .filter(|t| t.coefficient.amplitude != ZERO)
                .collect(),
        }
    }

    /// Largest |frequency| among the terms; zero for a static operator.
    pub fn max_frequency(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.frequency.abs())
            .fold(0.0, f64::max)
    }

    pub fn evaluate(&self, t: f64) -> Matrix {
        let mut m = Array2::from_elem((self.dim, self.dim), ZERO);
        for term in &self.terms {
            let c = term.coefficient.at(t);
            for &(i, j, v) in term.op.entries() {
                m[[i, j]] += c * v;
            }
        }
        m
    }

    /// `out += scale · H(t) · x`
    pub fn add_mul_left(&self, t: f64, scale: C64, x: ArrayView2<C64>, out: &mut ArrayViewMut2<C64>) {
        for term in &self.terms {
            term.op.add_mul_left(scale * term.coefficient.at(t), x, out);
        }
    }

    /// `out += scale · x · H(t)`
    pub fn add_mul_right(&self, t: f64, scale: C64, x: ArrayView2<C64>, out: &mut ArrayViewMut2<C64>) {
        for term in &self.terms {
            term.op.add_mul_right(scale * term.coefficient.at(t), x, out);
        }
    }

    /// `out += scale · H(t) · v`
    pub fn add_apply(&self, t: f64, scale: C64, v: &Ket, out: &mut Ket) {
        for term in &self.terms {
            term.op.add_apply(scale * term.coefficient.at(t), v, out);
        }
    }
}

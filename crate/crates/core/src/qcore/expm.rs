use super::{identity, Matrix};

const THETA: f64 = 0.5;
const MAX_TERMS: usize = 60;

fn one_norm(m: &Matrix) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 0.5; the
/// Taylor series is then summed until the next term is below machine
/// precision relative to the partial sum (truncation error below 1e-16 for
/// that norm), and the result squared `s` times.
pub fn expm(m: &Matrix) -> Matrix {
    assert_eq!(m.nrows(), m.ncols(), "expm of a non-square matrix");
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > THETA {
        (norm / THETA).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / 2f64.powi(squarings));

    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..=MAX_TERMS {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum += &term;
        if one_norm(&term) <= f64::EPSILON * 1e-2 * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

use ndarray::{Array1, Array2};

use super::{expm, normalize, Ket, Matrix, C64, ZERO};
use crate::error::{Error, Result};

/// Truncation of the cavity mode to Fock levels `0..cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    cutoff: usize,
}

impl FockConfig {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::FockCutoff(cutoff));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Errors if `|alpha|` is too large for this cutoff under [`required_cutoff`].
    pub fn check_adequate(&self, abs_alpha: f64) -> Result<()> {
        let required = required_cutoff(abs_alpha);
        if (self.cutoff as f64) < required {
            return Err(Error::Truncation {
                cutoff: self.cutoff,
                abs_alpha,
                required,
            });
        }
        Ok(())
    }
}

/// Smallest admissible cutoff for a coherent amplitude of modulus `abs_alpha`:
/// `|α|² + 6|α| + 10`.
pub fn required_cutoff(abs_alpha: f64) -> f64 {
    abs_alpha * abs_alpha + 6.0 * abs_alpha + 10.0
}

/// `a` with `a[n-1, n] = sqrt(n)`.
pub fn annihilation(cfg: FockConfig) -> Matrix {
    let n = cfg.cutoff();
    let mut a = Array2::from_elem((n, n), ZERO);
    for k in 1..n {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(cfg: FockConfig) -> Matrix {
    annihilation(cfg).t().to_owned()
}

pub fn number(cfg: FockConfig) -> Matrix {
    let n = cfg.cutoff();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// `D(α) = exp(α a† − α* a)` in the truncated space.
pub fn displacement_matrix(alpha: C64, cfg: FockConfig) -> Result<Matrix> {
    cfg.check_adequate(alpha.norm())?;
    let a = annihilation(cfg);
    let generator = a.t().mapv(|z| alpha * z) - a.mapv(|z| alpha.conj() * z);
    Ok(expm(&generator))
}

/// A truncated, renormalized coherent state.
#[derive(Debug, Clone)]
pub struct CoherentState {
    pub ket: Ket,
    /// Population of the two highest retained levels before renormalization.
    pub top_population: f64,
}

pub fn coherent_state(alpha: C64, cfg: FockConfig) -> Result<CoherentState> {
    cfg.check_adequate(alpha.norm())?;
    let n = cfg.cutoff();
    let prefactor = (-0.5 * alpha.norm_sqr()).exp();
    let mut ket = Array1::from_elem(n, ZERO);
    // αⁿ/√(n!) built recursively to avoid factorial overflow
    let mut amp = C64::new(prefactor, 0.0);
    ket[0] = amp;
    for k in 1..n {
        amp = amp * alpha / (k as f64).sqrt();
        ket[k] = amp;
    }
    let top_population = ket.iter().skip(n - 2).map(|z| z.norm_sqr()).sum();
    normalize(&mut ket);
    Ok(CoherentState {
        ket,
        top_population,
    })
}

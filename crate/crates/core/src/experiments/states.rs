use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::ideal_gate;
use crate::hamiltonians::{composite_dim, composite_index, Sector};
use crate::qcore::{FockConfig, Ket, C64, ZERO};

/// Default number of random input states per fidelity average.
pub const DEFAULT_STATE_COUNT: usize = 500;

/// Random two-qubit inputs `x|ff⟩ + y|gf⟩ + z|fg⟩ + w|gg⟩`.
///
/// Each tuple is four independent standard normals divided by their norm,
/// i.e. uniform on the unit 3-sphere. The generator is ChaCha20 seeded with
/// the 64-bit seed, so the sequence is the same on every platform.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialStateSet {
    pub seed: u64,
    /// `(x, y, z, w)` per state. With complex sampling the real parts are
    /// stored here and [`InitialStateSet::amplitudes`] carries the phases.
    pub coefficients: Vec<[f64; 4]>,
    complex: Option<Vec<[C64; 4]>>,
}

impl InitialStateSet {
    pub fn generate(seed: u64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("state count must be at least 1".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coefficients = (0..count)
            .map(|_| {
                let mut v = [0.0f64; 4];
                loop {
                    for x in v.iter_mut() {
                        *x = StandardNormal.sample(&mut rng);
                    }
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        v.iter_mut().for_each(|x| *x /= norm);
                        break v;
                    }
                }
            })
            .collect();
        Ok(Self {
            seed,
            coefficients,
            complex: None,
        })
    }

    /// Complex amplitudes, uniform on the unit sphere of C⁴.
    pub fn generate_complex(seed: u64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("state count must be at least 1".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut complex = Vec::with_capacity(count);
        for _ in 0..count {
            let mut v = [ZERO; 4];
            for z in v.iter_mut() {
                *z = C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            complex.push(v);
        }
        let coefficients = complex.iter().map(|v| v.map(|z| z.re)).collect();
        Ok(Self {
            seed,
            coefficients,
            complex: Some(complex),
        })
    }

    /// A set with explicitly given tuples, normalized here.
    pub fn from_tuples(tuples: &[[f64; 4]]) -> Result<Self> {
        let mut coefficients = Vec::with_capacity(tuples.len());
        for t in tuples {
            let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::InvalidParameter("zero input state".into()));
            }
            coefficients.push(t.map(|x| x / norm));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("state count must be at least 1".into()));
        }
        Ok(Self {
            seed: 0,
            coefficients,
            complex: None,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_complex(&self) -> bool {
        self.complex.is_some()
    }

    /// Amplitudes of state `k` in sector order ff, fg, gf, gg.
    pub fn amplitudes(&self, k: usize) -> [C64; 4] {
        let [ff, gf, fg, gg] = match &self.complex {
            Some(c) => c[k],
            None => self.coefficients[k].map(|x| C64::new(x, 0.0)),
        };
        [ff, fg, gf, gg]
    }
}

/// Ideal output amplitudes in sector order: the input with the gate
/// `diag(1, e^{−iΦ}, e^{−iΦ}, e^{−4iΦ})` applied.
pub fn target_amplitudes(input: &[C64; 4], phi: f64) -> [C64; 4] {
    let gate = ideal_gate(phi, false).diagonal();
    [0, 1, 2, 3].map(|k| gate[k] * input[k])
}

/// `|Ψ⟩ = Σ_s t_s |s⟩ ⊗ |0⟩` on the composite space.
pub fn target_state(input: &[C64; 4], phi: f64, fock: FockConfig) -> Ket {
    embed_sectors(&target_amplitudes(input, phi), fock)
}

/// `Σ_s c_s |s⟩ ⊗ |0⟩`.
pub fn embed_sectors(amplitudes: &[C64; 4], fock: FockConfig) -> Ket {
    let mut psi = Ket::from_elem(composite_dim(fock), ZERO);
    for s in Sector::ALL {
        let (a, b) = s.levels();
        psi[composite_index(a, b, 0, fock)] = amplitudes[s.index()];
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tuples_are_unit_norm() {
        let set = InitialStateSet::generate(7, 200).unwrap();
        for t in &set.coefficients {
            let n: f64 = t.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let single = InitialStateSet::generate(99, 1).unwrap();
        assert_eq!(single.len(), 1);
        assert!(InitialStateSet::generate(1, 0).is_err());
    }

    #[test]
    fn same_seed_same_states() {
        let a = InitialStateSet::generate(2024, 50).unwrap();
        let b = InitialStateSet::generate(2024, 50).unwrap();
        let c = InitialStateSet::generate(2025, 50).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sphere_second_moment() {
        let set = InitialStateSet::generate(11, 100_000).unwrap();
        let mean_x2: f64 =
            set.coefficients.iter().map(|t| t[0] * t[0]).sum::<f64>() / set.len() as f64;
        assert!((mean_x2 - 0.25).abs() < 0.005, "{mean_x2}");
    }

    #[test]
    fn complex_states_are_unit_norm() {
        let set = InitialStateSet::generate_complex(3, 20).unwrap();
        assert!(set.is_complex());
        for k in 0..set.len() {
            let n: f64 = set.amplitudes(k).iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_order_maps_to_sectors() {
        let set = InitialStateSet::from_tuples(&[[1.0, 2.0, 3.0, 4.0]]).unwrap();
        let a = set.amplitudes(0);
        let n = 30f64.sqrt();
        // x→ff, y→gf, z→fg, w→gg
        assert!((a[Sector::FF.index()].re - 1.0 / n).abs() < 1e-15);
        assert!((a[Sector::GF.index()].re - 2.0 / n).abs() < 1e-15);
        assert!((a[Sector::FG.index()].re - 3.0 / n).abs() < 1e-15);
        assert!((a[Sector::GG.index()].re - 4.0 / n).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_targets() {
        let phi = PI / 2.0;
        let one = |k: usize| {
            let mut v = [ZERO; 4];
            v[k] = C64::new(1.0, 0.0);
            v
        };
        let ff = target_amplitudes(&one(Sector::FF.index()), phi);
        assert!((ff[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let gf = target_amplitudes(&one(Sector::GF.index()), phi);
        assert!((gf[Sector::GF.index()] - C64::new(0.0, -1.0)).norm() < 1e-15);
        let gg = target_amplitudes(&one(Sector::GG.index()), phi);
        assert!((gg[Sector::GG.index()] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn target_lives_in_vacuum() {
        let fock = FockConfig::new(5).unwrap();
        let set = InitialStateSet::generate(1, 1).unwrap();
        let psi = target_state(&set.amplitudes(0), 0.3, fock);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        for (i, z) in psi.iter().enumerate() {
            if i % 5 != 0 {
                assert_eq!(*z, ZERO);
            }
        }
    }
}

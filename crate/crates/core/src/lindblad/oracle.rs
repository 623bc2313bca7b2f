//! Scalar field mean of one qubit sector under drive and decay.
//!
//! In a sector with `c` dots in |g⟩ the effective Hamiltonian drives the
//! cavity with amplitude `c ε`, and the mean field obeys
//! `dα/dt = i c ε* e^{−iδt} − (γ/2) α`. This module integrates that equation
//! with an adaptive Dormand–Prince 5(4) pair.

use crate::error::{Error, Result};
use crate::qcore::{C64, I, ZERO};

/// Result of [`branch_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOracle {
    pub alpha: C64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

/// `α(t)` for the branch equation, closed form. Used to test the adaptive
/// integrator, not by it.
pub fn branch_closed_form(c: u8, epsilon: C64, delta: f64, gamma: f64, t: f64) -> C64 {
    if c == 0 {
        return ZERO;
    }
    let k = C64::new(gamma / 2.0, -delta);
    let drive = I * c as f64 * epsilon.conj();
    if k.norm() == 0.0 {
        return drive * t;
    }
    drive * (C64::from_polar(1.0, -delta * t) - (-gamma * t / 2.0).exp()) / k
}

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-15;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the branch equation of weight `c` from `α(0) = 0` to `t`.
pub fn branch_oracle(c: u8, epsilon: C64, delta: f64, gamma: f64, t: f64) -> Result<BranchOracle> {
    if c > 2 {
        return Err(Error::InvalidParameter(format!(
            "sector weight must be 0, 1 or 2, got {c}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and ≥ 0, got {t}")));
    }
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!("decay rate must be ≥ 0, got {gamma}")));
    }
    let mut out = BranchOracle {
        alpha: ZERO,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if c == 0 || t == 0.0 {
        return Ok(out);
    }
    let drive = I * c as f64 * epsilon.conj();
    let f = |s: f64, a: C64| drive * C64::from_polar(1.0, -delta * s) - gamma / 2.0 * a;

    let rate = delta.abs().max(gamma).max(f64::MIN_POSITIVE);
    let mut h = (0.01 / rate).min(t);
    let mut s = 0.0;
    let mut y = ZERO;
    let mut k1 = f(s, y);
    while s < t {
        if s + h > t {
            h = t - s;
        }
        let k2 = f(s + C2 * h, y + h * (A21 * k1));
        let k3 = f(s + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(s + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(s + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(s + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(s + h, y_new);
        let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).norm();
        let scale = ATOL + RTOL * y.norm().max(y_new.norm()).max(drive.norm() / rate);
        let ratio = err / scale;
        if ratio <= 1.0 {
            s += h;
            y = y_new;
            k1 = k7;
            out.accepted_steps += 1;
        } else {
            out.rejected_steps += 1;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * t {
            return Err(Error::InvalidParameter("branch oracle step size underflow".into()));
        }
    }
    out.alpha = y;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::alpha_closed_form;
    use std::f64::consts::PI;

    const EPS: C64 = C64::new(0.0025, 0.0);
    const DELTA: f64 = 0.025;

    #[test]
    fn undriven_sector_stays_empty() {
        for t in [0.0, 10.0, 1e4] {
            assert_eq!(branch_oracle(0, EPS, DELTA, 1e-4, t).unwrap().alpha, ZERO);
        }
    }

    #[test]
    fn closed_loop_returns_to_origin() {
        let t = 2.0 * PI / DELTA;
        assert!(branch_oracle(1, EPS, DELTA, 0.0, t).unwrap().alpha.norm() < 1e-10);
    }

    #[test]
    fn doubly_driven_sector_is_twice_single() {
        for t in [13.0, 100.0, 377.0, 2000.0] {
            let one = branch_oracle(1, EPS, DELTA, 0.0, t).unwrap().alpha;
            let two = branch_oracle(2, EPS, DELTA, 0.0, t).unwrap().alpha;
            assert!((two - 2.0 * one).norm() < 1e-12);
        }
    }

    #[test]
    fn lossless_matches_displacement_path() {
        let eps = C64::new(0.002, 0.0013);
        for t in [50.0, 125.6, 600.0] {
            let a = alpha_closed_form(eps, DELTA, t).unwrap().fg;
            let b = branch_oracle(1, eps, DELTA, 0.0, t).unwrap().alpha;
            assert!((a - b).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn damped_matches_closed_form() {
        for gamma in [1.3e-4, 2.6e-4, 0.01] {
            for t in [100.0, 2513.0, 6283.0] {
                let exact = branch_closed_form(2, EPS, DELTA, gamma, t);
                let num = branch_oracle(2, EPS, DELTA, gamma, t).unwrap().alpha;
                assert!((exact - num).norm() < 1e-11, "γ = {gamma}, t = {t}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(branch_oracle(3, EPS, DELTA, 0.0, 1.0).is_err());
        assert!(branch_oracle(1, EPS, DELTA, 0.0, -1.0).is_err());
        assert!(branch_oracle(1, EPS, DELTA, -1.0, 1.0).is_err());
    }
}

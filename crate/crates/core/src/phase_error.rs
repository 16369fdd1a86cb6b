//! Quantum-coin bound on the phase-error rate.
//!
//! The basis dependence of the n-photon emission is measured by the fidelity
//! between the Z- and X-basis coin states.  That fidelity sets the coin
//! imbalance Δ, which turns the X-basis bit-error rate into a phase-error bound.

use crate::perturb::{EigGapBound, PerturbedStatistics};
use crate::states::{bures_from_fidelity, fidelity_from_bures};

/// Lower bound on the fidelity between a real coin state and its ideal version,
/// from the statistics interval `[p_lower, p_upper]` of one photon number and
/// the eigenvector loss `gamma`.
pub fn fidelity_lower_from(p_lower: f64, p_upper: f64, gamma: f64) -> f64 {
    if !(p_lower > 0.0) {
        return 0.0;
    }
    let q = p_lower / (p_lower + p_upper);
    let s = q.sqrt() + (1.0 - q).sqrt();
    ((1.0 - gamma.clamp(0.0, 1.0)) * s * s / 2.0).clamp(0.0, 1.0)
}

/// [`fidelity_lower_from`] applied to the n-photon entry of a perturbed distribution.
pub fn real_ideal_fidelity_lower(
    perturbed: &PerturbedStatistics,
    n: usize,
    gamma: &EigGapBound,
) -> f64 {
    fidelity_lower_from(perturbed.lower(n), perturbed.upper(n), gamma.gamma_n)
}

/// Fidelity lower bound along the path real Z → ideal Z → ideal X → real X.
pub fn bures_triangle_fidelity(f_real_ideal_z: f64, ideal_overlap: f64, f_real_ideal_x: f64) -> f64 {
    let c = ideal_overlap.clamp(0.0, 1.0);
    let d = bures_from_fidelity(f_real_ideal_z)
        + bures_from_fidelity(c * c)
        + bures_from_fidelity(f_real_ideal_x);
    fidelity_from_bures(d)
}

/// Coin imbalance Δ of the detected rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imbalance {
    /// Δ, set to ½ when vacuous.
    pub delta: f64,
    /// No useful bound: zero coin yield or Δ > ½.
    pub vacuous: bool,
}

pub fn coin_imbalance(f_lower: f64, y_z_lower: f64, y_x_lower: f64) -> Imbalance {
    let y = y_z_lower.min(y_x_lower);
    if !(y > 0.0) {
        return Imbalance { delta: 0.5, vacuous: true };
    }
    let delta = ((1.0 - f_lower.clamp(0.0, 1.0).sqrt()) / (2.0 * y)).max(0.0);
    if delta > 0.5 {
        Imbalance { delta: 0.5, vacuous: true }
    } else {
        Imbalance { delta, vacuous: false }
    }
}

/// Phase-error bound for bit-error rate `e_bx` and imbalance `delta`, at most ½.
pub fn phase_error_upper(e_bx: f64, delta: f64) -> f64 {
    let e = e_bx.clamp(0.0, 0.5);
    let d = delta.clamp(0.0, 0.5);
    if d == 0.0 {
        return e;
    }
    let v = e
        + 4.0 * d * (1.0 - d) * (1.0 - 2.0 * e)
        + 4.0 * (1.0 - 2.0 * d) * (d * (1.0 - d) * e * (1.0 - e)).sqrt();
    v.min(0.5)
}

/// All quantities of one quantum-coin evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinAssessment {
    pub n: usize,
    pub f_lower: f64,
    pub y_coin_lower: f64,
    pub delta: f64,
    pub vacuous: bool,
    pub e_ph_upper: f64,
}

pub fn assess_coin(n: usize, f_lower: f64, y_z_lower: f64, y_x_lower: f64, e_bx: f64) -> CoinAssessment {
    let imb = coin_imbalance(f_lower, y_z_lower, y_x_lower);
    let e_ph_upper = if imb.vacuous {
        0.5
    } else {
        phase_error_upper(e_bx, imb.delta)
    };
    CoinAssessment {
        n,
        f_lower,
        y_coin_lower: y_z_lower.min(y_x_lower),
        delta: imb.delta,
        vacuous: imb.vacuous,
        e_ph_upper,
    }
}

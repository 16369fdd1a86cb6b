//! Small state-space helpers shared by the source and side-channel models:
//! coherent-state overlaps, Fock amplitudes, the BB84 ancilla basis and
//! mixed-state fidelities from factorised density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// ⟨α|β⟩ for two single-mode coherent states.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    let exponent = -0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + alpha.conj() * beta;
    exponent.exp()
}

/// Fock amplitudes e^{-|α|²/2} αᵏ/√k! for k = 0..=cutoff.
pub fn coherent_fock_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for k in 1..=cutoff {
        amp = amp * alpha / (k as f64).sqrt();
        out.push(amp);
    }
    out
}

/// Upper tail Σ_{k>m} e^{-x} xᵏ/k! of a Poisson law, summed directly so that
/// tiny tails keep full relative precision.
pub fn poisson_tail(mean: f64, m: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    for k in 1..=m {
        term *= mean / k as f64;
    }
    let mut tail = 0.0;
    let mut k = m + 1;
    loop {
        term *= mean / k as f64;
        tail += term;
        if term <= tail * 1e-18 || term == 0.0 {
            break;
        }
        k += 1;
        if k > m + 10_000 {
            break;
        }
    }
    tail
}

/// ⟨j_Z|k_X⟩ on Alice's ancilla, with |0_X⟩ = (|0_Z⟩+|1_Z⟩)/√2 and
/// |1_X⟩ = (|0_Z⟩−|1_Z⟩)/√2.
pub fn ancilla_zx(j: usize, k: usize) -> f64 {
    if j == 1 && k == 1 {
        -FRAC_1_SQRT_2
    } else {
        FRAC_1_SQRT_2
    }
}

/// Largest modulus of the quantum-coin amplitude
/// `W00 + W01 e^{iφX} + W10 e^{-iφZ} + W11 e^{i(φX−φZ)}`
/// over the free relative phases of the Z- and X-basis coin states.
///
/// For fixed φZ the optimum over φX is `|W00 + W10 e^{-iφZ}| + |W01 + W11 e^{-iφZ}|`,
/// so only a one-dimensional search remains. Every evaluated phase is a valid
/// choice, hence the returned value never exceeds the true maximum.
pub fn max_coin_amplitude(w: [[Complex64; 2]; 2]) -> f64 {
    let f = |phi: f64| {
        let e = Complex64::from_polar(1.0, -phi);
        (w[0][0] + w[1][0] * e).norm() + (w[0][1] + w[1][1] * e).norm()
    };
    const GRID: usize = 720;
    let step = std::f64::consts::TAU / GRID as f64;
    let mut best_phi = 0.0;
    let mut best = f(0.0);
    for i in 1..GRID {
        let phi = i as f64 * step;
        let v = f(phi);
        if v > best {
            best = v;
            best_phi = phi;
        }
    }
    // Golden-section refinement inside the bracketing grid cell pair.
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// Fidelity `F(ρ, σ) = ‖X†Y‖₁²` for `ρ = XX†`, `σ = YY†` given the matrix of
/// cross inner products `X†Y`. Requires unit-trace factorisations.
pub fn fidelity_from_cross(cross: &DMatrix<Complex64>) -> Result<f64> {
    if cross.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite cross Gram entries".into()));
    }
    let svd = cross
        .clone()
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "singular value decomposition of a {}x{} cross Gram failed to converge",
                cross.nrows(),
                cross.ncols()
            ))
        })?;
    let nuclear: f64 = svd.singular_values.iter().sum();
    Ok(nuclear * nuclear)
}

/// Bures distance √(2 − 2√F) of a fidelity, with F clamped to [0, 1].
pub fn bures_from_fidelity(f: f64) -> f64 {
    let f = f.clamp(0.0, 1.0);
    (2.0 - 2.0 * f.sqrt()).max(0.0).sqrt()
}

/// Inverse of [`bures_from_fidelity`]: F = (1 − d²/2)², with d clamped to [0, √2].
pub fn fidelity_from_bures(d: f64) -> f64 {
    let d = d.clamp(0.0, std::f64::consts::SQRT_2);
    let s = 1.0 - 0.5 * d * d;
    (s * s).clamp(0.0, 1.0)
}

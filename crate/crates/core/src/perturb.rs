//! Perturbation bounds for leaky sources.
//!
//! A leakage parameter ε bounds the trace distance between the real and the
//! ideal emitted state by κ = √ε.  From that we get intervals on the
//! photon-number statistics, eigenvector fidelities through a Davis–Kahan
//! gap argument and fidelities of finite-dimensional projections.

use crate::error::{check_unit, domain, Result};
use crate::source::{PhaseDistribution, PhotonStatistics};

/// Photon-number statistics together with their ε-perturbed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedStatistics {
    pub base: PhotonStatistics,
    pub epsilon: f64,
    pub kappa: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PerturbedStatistics {
    pub fn lower(&self, n: usize) -> f64 {
        self.lower.get(n).copied().unwrap_or(0.0)
    }

    pub fn upper(&self, n: usize) -> f64 {
        self.upper.get(n).copied().unwrap_or(0.0)
    }

    /// Exact statistics presented as a degenerate interval.
    pub fn exact(base: PhotonStatistics) -> Self {
        Self {
            lower: base.probs.clone(),
            upper: base.probs.clone(),
            base,
            epsilon: 0.0,
            kappa: 0.0,
        }
    }
}

pub fn perturb_statistics(stats: &PhotonStatistics, epsilon: f64) -> Result<PerturbedStatistics> {
    check_unit("epsilon", epsilon)?;
    let kappa = epsilon.sqrt();
    let lower = stats.probs.iter().map(|p| (p - kappa).max(0.0)).collect();
    let upper = stats.probs.iter().map(|p| (p + kappa).min(1.0)).collect();
    Ok(PerturbedStatistics {
        base: stats.clone(),
        epsilon,
        kappa,
        lower,
        upper,
    })
}

/// Eigenvector-fidelity loss γ for one eigenvalue of a perturbed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigGapBound {
    pub n: usize,
    pub delta_n: f64,
    pub gamma_n: f64,
}

/// Davis–Kahan bound on the eigenvector rotation at position `n` of a
/// descending spectrum under a perturbation of operator size `kappa`.
pub fn dk_gamma(spectrum: &[f64], n: usize, kappa: f64) -> Result<EigGapBound> {
    if spectrum.is_empty() {
        return domain("empty spectrum");
    }
    if n >= spectrum.len() {
        return domain(format!("index {n} outside a spectrum of length {}", spectrum.len()));
    }
    if !(kappa >= 0.0) {
        return domain(format!("kappa must be nonnegative, got {kappa}"));
    }
    let mut gap = f64::INFINITY;
    if n > 0 {
        gap = gap.min((spectrum[n - 1] - spectrum[n]).abs());
    }
    if n + 1 < spectrum.len() {
        gap = gap.min((spectrum[n] - spectrum[n + 1]).abs());
    }
    let delta_n = gap - kappa;
    let gamma_n = if kappa == 0.0 {
        0.0
    } else if delta_n > 0.0 {
        (kappa * kappa / (delta_n * delta_n)).min(1.0)
    } else {
        1.0
    };
    Ok(EigGapBound { n, delta_n, gamma_n })
}

/// Retained mass Σ_{n≤M} λ_n, the fidelity between a state and its
/// normalized projection onto the span of its first M+1 eigenvectors.
pub fn truncation_fidelity(spectrum: &[f64], m: usize) -> f64 {
    spectrum.iter().take(m + 1).sum::<f64>().clamp(0.0, 1.0)
}

/// Trace-distance bound √(1 − F) from a fidelity lower bound.
pub fn fuchs_trace_bound(fidelity_lower: f64) -> f64 {
    (1.0 - fidelity_lower.clamp(0.0, 1.0)).sqrt()
}

/// Smallest Poisson term kept in the ideal spectrum of a fully randomized source.
const SPECTRUM_FLOOR: f64 = 1e-300;

/// Descending eigenvalues of the ideal phase-averaged emission.  The
/// orthogonal complement is infinite dimensional, so its zero eigenvalue is
/// listed twice to mark it as degenerate.
pub fn ideal_spectrum(beta: f64, dist: PhaseDistribution) -> Result<Vec<f64>> {
    let mut eigs = match dist {
        PhaseDistribution::DiscreteUniform { n } => crate::source::discrete_pmf(beta, n)?.probs,
        PhaseDistribution::UniformContinuous => {
            if !(beta >= 0.0) {
                return domain(format!("intensity must be nonnegative, got {beta}"));
            }
            let mut v = Vec::new();
            let mut term = (-beta).exp();
            let mut m = 0usize;
            while term >= SPECTRUM_FLOOR || (m as f64) < beta {
                v.push(term);
                m += 1;
                term *= beta / m as f64;
                if beta == 0.0 {
                    break;
                }
            }
            v
        }
    };
    eigs.extend([0.0, 0.0]);
    eigs.sort_by(|a, b| b.total_cmp(a));
    Ok(eigs)
}

/// Davis–Kahan γ of the n-photon eigenvector of the ideal state at intensity β.
pub fn photon_gamma(
    beta: f64,
    dist: PhaseDistribution,
    n: usize,
    kappa: f64,
) -> Result<EigGapBound> {
    let p_n = match dist {
        PhaseDistribution::DiscreteUniform { n: big_n } => {
            if n >= big_n {
                return domain(format!("photon class {n} outside 0..{big_n}"));
            }
            crate::source::discrete_pmf(beta, big_n)?.probs[n]
        }
        PhaseDistribution::UniformContinuous => crate::source::poisson_pmf(beta, n)?.probs[n],
    };
    let eigs = ideal_spectrum(beta, dist)?;
    let idx = eigs.iter().position(|&x| x == p_n).unwrap_or(eigs.len() - 1);
    let mut b = dk_gamma(&eigs, idx, kappa)?;
    b.n = n;
    Ok(b)
}

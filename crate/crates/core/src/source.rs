//! Transmitter model: phase distributions, photon-number statistics and the
//! overlaps of the ideal n-photon states across intensities and encodings.
//!
//! Encodings use the dual-mode convention: `|m_{0Z}⟩ = |m⟩|0⟩`,
//! `|m_{1Z}⟩ = |0⟩|m⟩` and `|m_{jX}⟩ ∝ (a† + (−1)ʲ b†)ᵐ|00⟩`.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Result};
use crate::states::{ancilla_zx, max_coin_amplitude, poisson_tail};

/// Relative size at which factorially decaying series are truncated.
pub const SERIES_REL_TOL: f64 = 1e-18;

/// Global-phase distribution of the emitted pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseDistribution {
    /// Phase drawn uniformly from [0, 2π).
    UniformContinuous,
    /// Phase drawn uniformly from {2πk/N : k = 0..N}.
    DiscreteUniform { n: usize },
}

impl PhaseDistribution {
    pub fn discrete(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("discrete phase randomization needs N >= 2, got {n}"));
        }
        Ok(Self::DiscreteUniform { n })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::UniformContinuous => Ok(()),
            Self::DiscreteUniform { n } => Self::discrete(n).map(|_| ()),
        }
    }

    /// Number of discrete phases, if any.
    pub fn phase_count(&self) -> Option<usize> {
        match *self {
            Self::UniformContinuous => None,
            Self::DiscreteUniform { n } => Some(n),
        }
    }
}

/// Intensity setting label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Intensity {
    Mu,
    Nu,
    Omega,
}

impl Intensity {
    pub const ALL: [Intensity; 3] = [Intensity::Mu, Intensity::Nu, Intensity::Omega];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Signal, decoy and vacuum-like intensities with their selection probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySet {
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
    pub p_beta: [f64; 3],
}

impl IntensitySet {
    pub fn new(mu: f64, nu: f64, omega: f64, p_beta: [f64; 3]) -> Result<Self> {
        if !(mu > nu && nu > omega && omega >= 0.0) || !mu.is_finite() {
            return domain(format!(
                "intensities must satisfy mu > nu > omega >= 0, got ({mu}, {nu}, {omega})"
            ));
        }
        if p_beta.iter().any(|p| !(0.0..=1.0).contains(p))
            || (p_beta.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return domain(format!("intensity probabilities {p_beta:?} must sum to 1"));
        }
        Ok(Self { mu, nu, omega, p_beta })
    }

    /// Intensities with the asymptotic choice p_μ = 1 (decoys infinitely rare).
    pub fn asymptotic(mu: f64, nu: f64, omega: f64) -> Result<Self> {
        Self::new(mu, nu, omega, [1.0, 0.0, 0.0])
    }

    pub fn value(&self, b: Intensity) -> f64 {
        match b {
            Intensity::Mu => self.mu,
            Intensity::Nu => self.nu,
            Intensity::Omega => self.omega,
        }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.mu, self.nu, self.omega]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// BB84 bit/basis setting. Both bits of a basis are chosen with equal probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    Z0,
    Z1,
    X0,
    X1,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [Encoding::Z0, Encoding::Z1, Encoding::X0, Encoding::X1];

    pub fn new(basis: Basis, bit: usize) -> Self {
        match (basis, bit) {
            (Basis::Z, 0) => Encoding::Z0,
            (Basis::Z, _) => Encoding::Z1,
            (Basis::X, 0) => Encoding::X0,
            (Basis::X, _) => Encoding::X1,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn basis(self) -> Basis {
        match self {
            Encoding::Z0 | Encoding::Z1 => Basis::Z,
            Encoding::X0 | Encoding::X1 => Basis::X,
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Encoding::Z0 | Encoding::X0 => 0,
            Encoding::Z1 | Encoding::X1 => 1,
        }
    }

    /// Amplitudes (u, v) of the single-photon state `u|1⟩|0⟩ + v|0⟩|1⟩`.
    pub fn mode_amplitudes(self) -> (f64, f64) {
        match self {
            Encoding::Z0 => (1.0, 0.0),
            Encoding::Z1 => (0.0, 1.0),
            Encoding::X0 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            Encoding::X1 => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        }
    }

    /// Phase imprinted by a single phase modulator realising this setting.
    pub fn modulator_phase(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Encoding::Z0 => 0.0,
            Encoding::Z1 => PI,
            Encoding::X0 => 0.5 * PI,
            Encoding::X1 => 1.5 * PI,
        }
    }
}

/// Photon-number probabilities p_{n|β} for n = 0..=n_cut and the remaining mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    pub beta: f64,
    pub dist: PhaseDistribution,
    pub n_cut: usize,
    pub probs: Vec<f64>,
    pub tail: f64,
}

impl PhotonStatistics {
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }
}

fn check_intensity(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return domain(format!("intensity must be a finite nonnegative number, got {beta}"));
    }
    Ok(())
}

/// Poisson statistics of a fully phase-randomized coherent state.
pub fn poisson_pmf(beta: f64, n_cut: usize) -> Result<PhotonStatistics> {
    check_intensity(beta)?;
    let mut probs = Vec::with_capacity(n_cut + 1);
    let mut term = (-beta).exp();
    probs.push(term);
    for n in 1..=n_cut {
        term *= beta / n as f64;
        probs.push(term);
    }
    Ok(PhotonStatistics {
        beta,
        dist: PhaseDistribution::UniformContinuous,
        n_cut,
        probs,
        tail: poisson_tail(beta, n_cut),
    })
}

/// Poisson probabilities e^{-β}βᵐ/m! for m = 0.. until the series is negligible.
fn poisson_series(beta: f64) -> Vec<f64> {
    if beta == 0.0 {
        return vec![1.0];
    }
    let ln_beta = beta.ln();
    let mut out = Vec::new();
    let mut ln_term = -beta;
    let mut m = 0usize;
    let mut total = 0.0;
    loop {
        let t = ln_term.exp();
        out.push(t);
        total += t;
        if m as f64 > beta && t <= SERIES_REL_TOL * total {
            break;
        }
        m += 1;
        ln_term += ln_beta - (m as f64).ln();
    }
    out
}

/// Statistics of the N eigenstates of a coherent state randomized over N phases.
pub fn discrete_pmf(beta: f64, n: usize) -> Result<PhotonStatistics> {
    check_intensity(beta)?;
    PhaseDistribution::discrete(n)?;
    let mut probs = vec![0.0; n];
    for (m, t) in poisson_series(beta).into_iter().enumerate() {
        probs[m % n] += t;
    }
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    Ok(PhotonStatistics {
        beta,
        dist: PhaseDistribution::DiscreteUniform { n },
        n_cut: n - 1,
        probs,
        tail: 0.0,
    })
}

/// Statistics for a phase distribution; `n_cut` is ignored for discrete phases.
pub fn photon_statistics(
    beta: f64,
    dist: PhaseDistribution,
    n_cut: usize,
) -> Result<PhotonStatistics> {
    match dist {
        PhaseDistribution::UniformContinuous => poisson_pmf(beta, n_cut),
        PhaseDistribution::DiscreteUniform { n } => discrete_pmf(beta, n),
    }
}

/// Unnormalized Fock weights `β^{lN/2} √(n!/(lN+n)!)` of the n-th discrete
/// eigenstate, l = 0, 1, ….  The l = 0 entry is always 1.
pub(crate) fn discrete_class_weights(beta: f64, big_n: usize, n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    if beta == 0.0 {
        return out;
    }
    let half_ln = 0.5 * beta.ln();
    let mut ln_v = 0.0;
    let mut norm = 1.0;
    let mut l = 0usize;
    loop {
        let base = l * big_n + n;
        for k in 1..=big_n {
            ln_v += half_ln - 0.5 * ((base + k) as f64).ln();
        }
        let v = ln_v.exp();
        out.push(v);
        norm += v * v;
        l += 1;
        if (l * big_n) as f64 > beta && v * v <= SERIES_REL_TOL * norm {
            break;
        }
    }
    out
}

/// Normalized probabilities of the Fock components `lN + n` of a discrete class.
pub(crate) fn discrete_class_probs(beta: f64, big_n: usize, n: usize) -> Vec<f64> {
    let v = discrete_class_weights(beta, big_n, n);
    let norm: f64 = v.iter().map(|x| x * x).sum();
    v.iter().map(|x| x * x / norm).collect()
}

/// ⟨n_{γ}|n_{ζ}⟩ for ideal n-photon states of two intensities.
pub fn ideal_intensity_overlap(
    n: usize,
    zeta: f64,
    gamma: f64,
    dist: PhaseDistribution,
) -> Result<f64> {
    check_intensity(zeta)?;
    check_intensity(gamma)?;
    dist.validate()?;
    let big_n = match dist {
        PhaseDistribution::UniformContinuous => return Ok(1.0),
        PhaseDistribution::DiscreteUniform { n } => n,
    };
    if zeta == gamma {
        return Ok(1.0);
    }
    let a = discrete_class_weights(zeta, big_n, n);
    let b = discrete_class_weights(gamma, big_n, n);
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

/// ⟨m_a|m_{a2}⟩ for the m-photon dual-mode encoded states.
pub fn encoding_fock_overlap(a: Encoding, a2: Encoding, m: usize) -> f64 {
    let (ua, va) = a.mode_amplitudes();
    let (ub, vb) = a2.mode_amplitudes();
    let p = ua * ub;
    let q = va * vb;
    // Σ_k C(m,k) p^k q^{m−k}: the mode-by-mode Fock expansion.
    let mut binom = 1.0f64;
    let mut sum = 0.0;
    for k in 0..=m {
        if k > 0 {
            binom = binom * (m - k + 1) as f64 / k as f64;
        }
        sum += binom * p.powi(k as i32) * q.powi((m - k) as i32);
    }
    sum
}

/// Cross-basis Gram entries `⟨n_{jZ}|n_{kX}⟩` of the ideal n-photon states.
fn ideal_cross_products(n: usize, beta: f64, dist: PhaseDistribution) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    let comps: Vec<(usize, f64)> = match dist {
        PhaseDistribution::UniformContinuous => vec![(n, 1.0)],
        PhaseDistribution::DiscreteUniform { n: big_n } => discrete_class_probs(beta, big_n, n)
            .into_iter()
            .enumerate()
            .map(|(l, w)| (l * big_n + n, w))
            .collect(),
    };
    for (j, row) in out.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            let a = Encoding::new(Basis::Z, j);
            let b = Encoding::new(Basis::X, k);
            *cell = comps
                .iter()
                .map(|&(m, w)| w * encoding_fock_overlap(a, b, m))
                .sum();
        }
    }
    out
}

/// Overlap of the ideal Z- and X-basis quantum-coin states for n photons,
/// maximized over the free phases of the coin preparation.
pub fn ideal_coin_overlap(n: usize, beta: f64, dist: PhaseDistribution) -> Result<f64> {
    check_intensity(beta)?;
    dist.validate()?;
    let g = ideal_cross_products(n, beta, dist);
    let mut w = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            w[j][k] = Complex64::new(0.5 * ancilla_zx(j, k) * g[j][k], 0.0);
        }
    }
    Ok(max_coin_amplitude(w).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        let s = poisson_pmf(0.0, 5).unwrap();
        assert_eq!(s.probs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.tail, 0.0);
        let s = poisson_pmf(0.5, 2).unwrap();
        let expected = [0.6065306597126334, 0.3032653298563167, 0.07581633246407918];
        for (p, e) in s.probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
        assert!((s.tail - 0.014387677966970687).abs() < 1e-15);
        assert!((s.tail + s.probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(poisson_pmf(-0.1, 2).is_err());
    }

    #[test]
    fn discrete_examples() {
        let s = discrete_pmf(0.0, 8).unwrap();
        assert_eq!(s.probs[0], 1.0);
        assert!(s.probs[1..].iter().all(|&p| p == 0.0));
        assert_eq!(s.n_cut, 7);
        assert!(discrete_pmf(0.5, 1).is_err());
        let d = discrete_pmf(0.5, 64).unwrap();
        let p = poisson_pmf(0.5, 63).unwrap();
        for n in 0..64 {
            assert!((d.probs[n] - p.probs[n]).abs() < 1e-10);
        }
    }

    #[test]
    fn intensity_overlap_trivial() {
        let u = PhaseDistribution::UniformContinuous;
        assert_eq!(ideal_intensity_overlap(1, 0.5, 0.1, u).unwrap(), 1.0);
        let d = PhaseDistribution::discrete(8).unwrap();
        assert_eq!(ideal_intensity_overlap(3, 0.4, 0.4, d).unwrap(), 1.0);
        let v = ideal_intensity_overlap(1, 0.5, 0.1, d).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn encoding_overlap_examples() {
        for m in 1..12 {
            assert_eq!(encoding_fock_overlap(Encoding::Z0, Encoding::Z1, m), 0.0);
            assert!(encoding_fock_overlap(Encoding::X0, Encoding::X1, m).abs() < 1e-14);
            let v = encoding_fock_overlap(Encoding::Z0, Encoding::X0, m);
            assert!((v - 2f64.powf(-(m as f64) / 2.0)).abs() < 1e-15);
        }
        for a in Encoding::ALL {
            assert!((encoding_fock_overlap(a, a, 7) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn coin_overlap_examples() {
        let u = PhaseDistribution::UniformContinuous;
        assert!((ideal_coin_overlap(1, 0.5, u).unwrap() - 1.0).abs() < 1e-12);
        assert!((ideal_coin_overlap(0, 0.5, u).unwrap() - 1.0).abs() < 1e-12);
        assert!((ideal_coin_overlap(2, 0.5, u).unwrap() - 0.5).abs() < 1e-12);
        // The discrete vacuum class also holds |N⟩, |2N⟩, … components.
        let d = PhaseDistribution::discrete(8).unwrap();
        assert!((ideal_coin_overlap(0, 0.5, d).unwrap() - 1.0).abs() < 1e-6);
        assert!((ideal_coin_overlap(0, 0.0, d).unwrap() - 1.0).abs() < 1e-12);
        let v = ideal_coin_overlap(1, 0.5, d).unwrap();
        assert!(v > 0.0 && v <= 1.0);
    }

    #[test]
    fn intensity_set_validation() {
        assert!(IntensitySet::asymptotic(0.5, 0.1, 0.0).is_ok());
        assert!(IntensitySet::asymptotic(0.1, 0.5, 0.0).is_err());
        assert!(IntensitySet::new(0.5, 0.1, 0.0, [0.5, 0.5, 0.1]).is_err());
    }
}

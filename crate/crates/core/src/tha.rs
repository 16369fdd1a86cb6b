//! Characterized Trojan-horse leakage.
//!
//! Two models are covered.  In the first, the back-reflected light carries
//! the global phase and the encoding phase of each pulse, and the phase is
//! randomized over N discrete values.  In the second, the global phase is
//! perfectly random and hidden from Eve, but an extra phase modulator with
//! N settings randomizes what she sees, partially isolated with its own
//! reflection of intensity λ.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::source::{Encoding, PhaseDistribution, PhotonStatistics, SERIES_REL_TOL};
use crate::states::{
    ancilla_zx, bures_from_fidelity, coherent_fock_amplitudes, coherent_overlap,
    fidelity_from_bures, fidelity_from_cross, max_coin_amplitude, poisson_tail,
};

/// Leakage parameter ε of a back-reflection with mean photon number `i`.
pub fn epsilon_from_intensity(i: f64) -> f64 {
    -(-i).exp_m1()
}

fn check_leak(name: &str, i: f64) -> Result<()> {
    if !(i >= 0.0) || !i.is_finite() {
        return domain(format!("{name} must be a finite nonnegative intensity, got {i}"));
    }
    Ok(())
}

fn check_pair(mu: f64, beta: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("signal intensity must be positive, got {mu}"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return domain(format!("intensity must be a finite nonnegative number, got {beta}"));
    }
    Ok(())
}

/// Back-reflection with the global phase exposed, N discrete phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThaScenario {
    /// Largest back-reflected intensity I, reached at the signal intensity.
    pub leak: f64,
    /// Number of global phases N.
    pub phases: usize,
}

impl ThaScenario {
    pub fn new(leak: f64, phases: usize) -> Result<Self> {
        check_leak("leak intensity", leak)?;
        PhaseDistribution::discrete(phases)?;
        Ok(Self { leak, phases })
    }

    /// Ω_β = βI/μ.
    pub fn omega(&self, mu: f64, beta: f64) -> f64 {
        beta * self.leak / mu
    }

    /// Coherent amplitudes (B₁, B₂, E) of the l-th phase of setting (β, a).
    fn amplitudes(&self, mu: f64, beta: f64, a: Encoding, l: usize) -> [Complex64; 3] {
        let theta = std::f64::consts::TAU * l as f64 / self.phases as f64;
        let (u, v) = a.mode_amplitudes();
        let b = Complex64::from_polar(beta.sqrt(), theta);
        let e = Complex64::from_polar(self.omega(mu, beta).sqrt(), theta + a.modulator_phase());
        [b * u, b * v, e]
    }
}

/// Gram matrix of the product coherent states of the listed settings, N
/// phases per setting, ordered setting-major.
pub fn tha_gram(
    scenario: &ThaScenario,
    mu: f64,
    settings: &[(f64, Encoding)],
) -> Result<DMatrix<Complex64>> {
    for &(beta, _) in settings {
        check_pair(mu, beta)?;
    }
    let n = scenario.phases;
    let amps: Vec<[Complex64; 3]> = settings
        .iter()
        .flat_map(|&(beta, a)| (0..n).map(move |l| scenario.amplitudes(mu, beta, a, l)))
        .collect();
    let d = amps.len();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        (0..3).map(|m| coherent_overlap(amps[i][m], amps[j][m])).product()
    }))
}

/// Σ_k c^{kN+n}/(kN+n)!, the part of e^c in one residue class.
fn class_series(c: Complex64, big_n: usize, n: usize) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut m = 0usize;
    loop {
        if m % big_n == n {
            sum += term;
            if term.norm() <= SERIES_REL_TOL * sum.norm() && m as f64 > c.norm() {
                break;
            }
        }
        m += 1;
        term = term * c / m as f64;
        if term.norm() == 0.0 && m > n {
            break;
        }
        if m > 100_000 {
            break;
        }
    }
    sum
}

/// The exponent c in ⟨ψ_l|ψ′_{l′}⟩ = e^{−(t+t′)/2} exp(c e^{2πi(l′−l)/N}).
fn pair_exponent(s: &ThaScenario, mu: f64, x: (f64, Encoding), y: (f64, Encoding)) -> Complex64 {
    let (ux, vx) = x.1.mode_amplitudes();
    let (uy, vy) = y.1.mode_amplitudes();
    let b = (x.0 * y.0).sqrt() * (ux * uy + vx * vy);
    let e = (s.omega(mu, x.0) * s.omega(mu, y.0)).sqrt();
    Complex64::new(b, 0.0) + Complex64::from_polar(e, y.1.modulator_phase() - x.1.modulator_phase())
}

/// Unnormalized class inner product ⟨n̄_x|n̄_y⟩ divided by N² e^{−(t+t′)/2}.
fn class_product(s: &ThaScenario, mu: f64, x: (f64, Encoding), y: (f64, Encoding), n: usize) -> Complex64 {
    class_series(pair_exponent(s, mu, x, y), s.phases, n)
}

/// Exact photon-number class probabilities of setting (β, a), n < N.
pub fn tha_photon_statistics(
    scenario: &ThaScenario,
    mu: f64,
    beta: f64,
    a: Encoding,
) -> Result<PhotonStatistics> {
    check_pair(mu, beta)?;
    let big_n = scenario.phases;
    let w: Vec<f64> = (0..big_n)
        .map(|n| class_product(scenario, mu, (beta, a), (beta, a), n).re.max(0.0))
        .collect();
    let total: f64 = w.iter().sum();
    Ok(PhotonStatistics {
        beta,
        dist: PhaseDistribution::DiscreteUniform { n: big_n },
        n_cut: big_n - 1,
        probs: w.iter().map(|x| x / total).collect(),
        tail: 0.0,
    })
}

/// Normalized inner product ⟨n̂_x|n̂_y⟩ of two class states; zero if either vanishes.
pub fn tha_class_overlap(
    scenario: &ThaScenario,
    mu: f64,
    x: (f64, Encoding),
    y: (f64, Encoding),
    n: usize,
) -> Result<Complex64> {
    check_pair(mu, x.0)?;
    check_pair(mu, y.0)?;
    if n >= scenario.phases {
        return domain(format!("photon class {n} outside 0..{}", scenario.phases));
    }
    let nx = class_product(scenario, mu, x, x, n).re;
    let ny = class_product(scenario, mu, y, y, n).re;
    if !(nx > 0.0) || !(ny > 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(class_product(scenario, mu, x, y, n) / (nx * ny).sqrt())
}

/// |⟨n̂_ζ|n̂_γ⟩| for one encoding.
pub fn tha_overlaps(
    scenario: &ThaScenario,
    mu: f64,
    zeta: f64,
    gamma: f64,
    a: Encoding,
    n: usize,
) -> Result<f64> {
    Ok(tha_class_overlap(scenario, mu, (zeta, a), (gamma, a), n)?.norm().min(1.0))
}

/// Fidelity between the Z- and X-basis n-photon coin states at intensity β,
/// maximized over the free coin phases.
pub fn tha_coin_fidelity(scenario: &ThaScenario, mu: f64, beta: f64, n: usize) -> Result<f64> {
    let p: Vec<f64> = Encoding::ALL
        .iter()
        .map(|&a| tha_photon_statistics(scenario, mu, beta, a).map(|s| s.prob(n)))
        .collect::<Result<_>>()?;
    let q = |a: Encoding| {
        let (i0, i1) = match a.basis() {
            crate::source::Basis::Z => (0, 1),
            crate::source::Basis::X => (2, 3),
        };
        let s = p[i0] + p[i1];
        if s > 0.0 { p[a.index()] / s } else { 0.5 }
    };
    let mut w = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let az = Encoding::new(crate::source::Basis::Z, j);
            let ax = Encoding::new(crate::source::Basis::X, k);
            let o = tha_class_overlap(scenario, mu, (beta, az), (beta, ax), n)?;
            w[j][k] = o * ((q(az) * q(ax)).sqrt() * ancilla_zx(j, k));
        }
    }
    let amp = max_coin_amplitude(w).clamp(0.0, 1.0);
    Ok(amp * amp)
}

/// Retained mass below which a Fock projection is refined further.
pub const PM_TRUNCATION_TAIL: f64 = 1e-18;

/// Back-reflection with a hidden, uniformly random global phase and an
/// extra N-setting phase modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmScenario {
    /// Largest intensity I reflected through the encoder, at the signal intensity.
    pub leak: f64,
    /// Intensity λ reflected through the extra modulator only.
    pub leak_pm: f64,
    /// Number of extra-modulator phases N; N = 1 means no extra modulator.
    pub phases: usize,
    /// Fixed Fock cutoff M; chosen from the tail when absent.
    pub cutoff: Option<usize>,
}

impl PmScenario {
    pub fn new(leak: f64, leak_pm: f64, phases: usize) -> Result<Self> {
        check_leak("leak intensity", leak)?;
        check_leak("modulator leak intensity", leak_pm)?;
        if phases == 0 {
            return domain("the extra modulator needs at least one phase");
        }
        Ok(Self { leak, leak_pm, phases, cutoff: None })
    }

    pub fn omega(&self, mu: f64, beta: f64) -> f64 {
        beta * self.leak / mu
    }

    /// Mixture components (E₁, E₂) of the leak state of (β, a), shifted by δ.
    fn components(&self, mu: f64, beta: f64, a: Encoding, delta: f64) -> Vec<(Complex64, Complex64)> {
        let (r1, r2) = (self.omega(mu, beta).sqrt(), self.leak_pm.sqrt());
        (0..self.phases)
            .map(|j| {
                let phi = std::f64::consts::TAU * j as f64 / self.phases as f64 + delta;
                (
                    Complex64::from_polar(r1, phi + a.modulator_phase()),
                    Complex64::from_polar(r2, phi),
                )
            })
            .collect()
    }

    /// Smallest M whose Poisson tail at total mean `mean` is below the target.
    fn cutoff_for(&self, mean: f64) -> usize {
        if let Some(m) = self.cutoff {
            return m;
        }
        let mut m = 0;
        while poisson_tail(mean, m) > PM_TRUNCATION_TAIL && m < 400 {
            m += 1;
        }
        m
    }
}

/// Cross inner products (1/N)⟨ψ_j|φ_k⟩ of two leak mixtures after projection
/// onto at most `m` total photons, with the retained masses of both.
fn projected_cross(
    xs: &[(Complex64, Complex64)],
    ys: &[(Complex64, Complex64)],
    m: usize,
) -> (DMatrix<Complex64>, f64, f64) {
    let fock = |c: &(Complex64, Complex64)| {
        (coherent_fock_amplitudes(c.0, m), coherent_fock_amplitudes(c.1, m))
    };
    let fx: Vec<_> = xs.iter().map(fock).collect();
    let fy: Vec<_> = ys.iter().map(fock).collect();
    let inner = |a: &(Vec<Complex64>, Vec<Complex64>), b: &(Vec<Complex64>, Vec<Complex64>)| {
        let mut s = Complex64::new(0.0, 0.0);
        for k1 in 0..=m {
            let p = a.0[k1].conj() * b.0[k1];
            for k2 in 0..=(m - k1) {
                s += p * a.1[k2].conj() * b.1[k2];
            }
        }
        s
    };
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let tx = fx.iter().map(|a| inner(a, a).re).sum::<f64>() / nx;
    let ty = fy.iter().map(|b| inner(b, b).re).sum::<f64>() / ny;
    let cross = DMatrix::from_fn(xs.len(), ys.len(), |i, j| inner(&fx[i], &fy[j]) / (nx * ny).sqrt());
    (cross, tx, ty)
}

/// Lower bound on the fidelity of the leak states of (ζ, a) and (γ, a):
/// exact fidelity of the ≤M-photon projections, chained with the projection
/// losses through the Bures triangle inequality.
pub fn pm_leak_fidelity(scenario: &PmScenario, mu: f64, zeta: f64, gamma: f64, a: Encoding) -> Result<f64> {
    check_pair(mu, zeta)?;
    check_pair(mu, gamma)?;
    let s = scenario;
    if s.leak == 0.0 || zeta == gamma {
        // Identical leak states.
        return Ok(1.0);
    }
    let mean = s.omega(mu, zeta.max(gamma)) + s.leak_pm;
    let m = s.cutoff_for(mean);
    let xs = s.components(mu, zeta, a, 0.0);
    let ys = s.components(mu, gamma, a, 0.0);
    let (cross, tx, ty) = projected_cross(&xs, &ys, m);
    if !(tx > 0.0) || !(ty > 0.0) {
        return Err(Error::Numerical(format!(
            "Fock projection with M = {m} retains no weight (masses {tx:.3e}, {ty:.3e})"
        )));
    }
    let f_mid = fidelity_from_cross(&(cross / Complex64::new((tx * ty).sqrt(), 0.0)))
        .map_err(|e| Error::Numerical(format!("projected leak fidelity at M = {m}: {e}")))?;
    let d = bures_from_fidelity(tx) + bures_from_fidelity(f_mid) + bures_from_fidelity(ty);
    Ok(fidelity_from_bures(d))
}

/// ⟨L_a|L_a′⟩ of the purifications (1/√N) Σ_j |j⟩ ⊗ leak component j shifted by δ.
fn purified_product(s: &PmScenario, mu: f64, beta: f64, a: (Encoding, f64), b: (Encoding, f64)) -> Complex64 {
    let xs = s.components(mu, beta, a.0, a.1);
    let ys = s.components(mu, beta, b.0, b.1);
    let sum: Complex64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| coherent_overlap(x.0, y.0) * coherent_overlap(x.1, y.1))
        .sum();
    sum / s.phases as f64
}

/// Z/X coin fidelity for n photons, maximized over the purification offsets
/// δ_a ∈ {2πj/N} of the four encodings.
pub fn pm_coin_fidelity(scenario: &PmScenario, mu: f64, beta: f64, n: usize) -> Result<f64> {
    check_pair(mu, beta)?;
    let big_n = scenario.phases;
    let offsets: Vec<f64> = (0..big_n)
        .map(|j| std::f64::consts::TAU * j as f64 / big_n as f64)
        .collect();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pre = 1.0 / (2.0 * 2f64.powi(n as i32 + 1).sqrt());
    let mut best = 0.0f64;
    // The value only depends on offset differences, so δ(0Z) can stay at 0.
    for &d1z in &offsets {
        for &d0x in &offsets {
            for &d1x in &offsets {
                let z0 = (Encoding::Z0, 0.0);
                let z1 = (Encoding::Z1, d1z);
                let x0 = (Encoding::X0, d0x);
                let x1 = (Encoding::X1, d1x);
                let l = |x, z| purified_product(scenario, mu, beta, x, z);
                let amp = l(x0, z0) + l(x1, z0) + l(x0, z1) - l(x1, z1) * sign;
                best = best.max((amp * pre).norm());
            }
        }
    }
    let b = best.min(1.0);
    Ok(b * b)
}

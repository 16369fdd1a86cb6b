//! Trojan-horse models against brute-force constructions.
//!
//! The exposed-phase model is rebuilt in a truncated three-mode Fock space
//! (two signal modes and the back-reflection), with the photon-number classes
//! obtained by an explicit sum over the N global phases.  The modulator model
//! is checked against the exact fidelity of the finite mixtures computed from
//! their analytic Gram matrix, and against an exhaustive search over all
//! purification offsets.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use qkdleak_core::source::discrete_pmf;
use qkdleak_core::states::ancilla_zx;
use qkdleak_core::tha::{
    epsilon_from_intensity, pm_coin_fidelity, pm_leak_fidelity, tha_class_overlap, tha_gram,
    tha_overlaps, tha_photon_statistics, PmScenario, ThaScenario,
};
use qkdleak_core::Encoding;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Per-mode Fock cutoff of the brute-force vectors.
const K: usize = 24;

fn fock(alpha: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(K + 1);
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for k in 1..=K {
        amp = amp * alpha / (k as f64).sqrt();
        out.push(amp);
    }
    out
}

fn product3(a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for x in a {
        for y in b {
            for z in c {
                out.push(x * y * z);
            }
        }
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unnormalized class vectors (1/N) Σ_l e^{−iθ_l n} |ψ_l⟩ of setting (β, a), n = 0..N.
fn class_vectors(s: &ThaScenario, mu: f64, beta: f64, a: Encoding) -> Vec<Vec<Complex64>> {
    let big_n = s.phases;
    let (u, v) = a.mode_amplitudes();
    let om = s.omega(mu, beta);
    let states: Vec<Vec<Complex64>> = (0..big_n)
        .map(|l| {
            let th = TAU * l as f64 / big_n as f64;
            let b = Complex64::from_polar(beta.sqrt(), th);
            let e = Complex64::from_polar(om.sqrt(), th + a.modulator_phase());
            product3(&fock(b * u), &fock(b * v), &fock(e))
        })
        .collect();
    (0..big_n)
        .map(|n| {
            let mut acc = vec![Complex64::new(0.0, 0.0); states[0].len()];
            for (l, st) in states.iter().enumerate() {
                let w = Complex64::from_polar(1.0 / big_n as f64, -TAU * (l * n) as f64 / big_n as f64);
                for (x, y) in acc.iter_mut().zip(st) {
                    *x += w * y;
                }
            }
            acc
        })
        .collect()
}

struct Case {
    s: ThaScenario,
    mu: f64,
    zeta: f64,
    gamma: f64,
    a: Encoding,
}

fn random_cases(seed: u64, count: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let leak = 10f64.powf(rng.gen_range(-6.0..-2.0));
            let s = ThaScenario::new(leak, rng.gen_range(2..=8)).unwrap();
            let mu = rng.gen_range(0.3..0.9);
            Case {
                s,
                mu,
                zeta: mu,
                gamma: rng.gen_range(0.02..0.5) * mu,
                a: Encoding::ALL[rng.gen_range(0..4)],
            }
        })
        .collect()
}

#[test]
fn statistics_and_overlaps_match_fock_construction() {
    let mut cases = random_cases(21, 10);
    cases[0] = Case {
        s: ThaScenario::new(1e-3, 8).unwrap(),
        mu: 0.5,
        zeta: 0.5,
        gamma: 0.1,
        a: Encoding::Z0,
    };
    cases[1] = Case {
        s: ThaScenario::new(1e-4, 8).unwrap(),
        mu: 0.5,
        zeta: 0.5,
        gamma: 0.1,
        a: Encoding::X1,
    };
    for (i, c) in cases.iter().enumerate() {
        let vz = class_vectors(&c.s, c.mu, c.zeta, c.a);
        let vg = class_vectors(&c.s, c.mu, c.gamma, c.a);
        let nz: Vec<f64> = vz.iter().map(|v| dot(v, v).re).collect();
        let ng: Vec<f64> = vg.iter().map(|v| dot(v, v).re).collect();
        let (tz, tg) = (nz.iter().sum::<f64>(), ng.iter().sum::<f64>());
        let pz = tha_photon_statistics(&c.s, c.mu, c.zeta, c.a).unwrap();
        let pg = tha_photon_statistics(&c.s, c.mu, c.gamma, c.a).unwrap();
        for n in 0..c.s.phases {
            assert!((pz.probs[n] - nz[n] / tz).abs() < 1e-9, "case {i} n={n}");
            assert!((pg.probs[n] - ng[n] / tg).abs() < 1e-9, "case {i} n={n}");
            // Classes with vanishing weight are dominated by cancellation in the phase sum.
            if pz.probs[n] > 1e-6 && pg.probs[n] > 1e-6 {
                let oracle = dot(&vz[n], &vg[n]).norm() / (nz[n] * ng[n]).sqrt();
                let v = tha_overlaps(&c.s, c.mu, c.zeta, c.gamma, c.a, n).unwrap();
                assert!((v - oracle).abs() < 1e-9, "case {i} n={n}: {v} vs {oracle}");
            }
        }
    }
}

#[test]
fn cross_basis_products_match_fock_construction() {
    for (i, c) in random_cases(22, 6).iter().enumerate() {
        let beta = c.zeta;
        let vecs: Vec<_> = Encoding::ALL
            .iter()
            .map(|&a| class_vectors(&c.s, c.mu, beta, a))
            .collect();
        for n in 0..c.s.phases.min(3) {
            for j in 0..2 {
                for k in 0..2 {
                    let (x, y) = (&vecs[j][n], &vecs[2 + k][n]);
                    let (nx, ny) = (dot(x, x).re, dot(y, y).re);
                    if nx < 1e-6 || ny < 1e-6 {
                        continue;
                    }
                    let oracle = dot(x, y) / (nx * ny).sqrt();
                    let v = tha_class_overlap(&c.s, c.mu, (beta, Encoding::ALL[j]), (beta, Encoding::ALL[2 + k]), n)
                        .unwrap();
                    assert!((v - oracle).norm() < 1e-9, "case {i} n={n} ({j},{k}): {v} vs {oracle}");
                }
            }
        }
    }
    // Ancilla convention used by the coin amplitude.
    assert!(ancilla_zx(1, 1) < 0.0 && ancilla_zx(0, 1) > 0.0);
}

#[test]
fn gram_matrices_are_psd_hermitian_unit_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let s = ThaScenario::new(10f64.powf(rng.gen_range(-8.0..0.0)), rng.gen_range(2..=8)).unwrap();
        let mu = rng.gen_range(0.1..1.0);
        let settings: Vec<(f64, Encoding)> = Encoding::ALL
            .iter()
            .flat_map(|&a| [(mu, a), (mu * rng.gen_range(0.0..1.0), a)])
            .collect();
        let g = tha_gram(&s, mu, &settings).unwrap();
        assert_eq!(g.nrows(), 8 * s.phases);
        for i in 0..g.nrows() {
            assert!((g[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            for j in 0..g.ncols() {
                assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-14);
            }
        }
        let min = SymmetricEigen::new(g).eigenvalues.min();
        assert!(min >= -1e-12, "min eigenvalue {min}");
    }
    let no_leak = ThaScenario::new(0.0, 4).unwrap();
    let g = tha_gram(&no_leak, 0.5, &[(0.5, Encoding::Z0), (0.5, Encoding::X0)]).unwrap();
    // Rows run over settings and then global phases; without a back-reflection
    // the entry is the product of the two signal-mode coherent overlaps.
    let amps = |a: Encoding| {
        let (u, v) = a.mode_amplitudes();
        (Complex64::new(u * 0.5f64.sqrt(), 0.0), Complex64::new(v * 0.5f64.sqrt(), 0.0))
    };
    let (z, x) = (amps(Encoding::Z0), amps(Encoding::X0));
    let direct = coherent(z.0, x.0) * coherent(z.1, x.1);
    assert!((g[(0, 4)] - direct).norm() < 1e-14);
}

#[test]
fn statistics_continuous_at_zero_leak() {
    for big_n in [2, 4, 8] {
        let s = ThaScenario::new(1e-12, big_n).unwrap();
        for beta in [0.05, 0.5, 0.9] {
            let d = discrete_pmf(beta, big_n).unwrap();
            for a in Encoding::ALL {
                let p = tha_photon_statistics(&s, 0.9, beta, a).unwrap();
                for n in 0..big_n {
                    assert!((p.probs[n] - d.probs[n]).abs() < 1e-9);
                }
                assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn overlaps_trivial_cases() {
    let s = ThaScenario::new(1e-4, 8).unwrap();
    for n in 0..8 {
        assert!((tha_overlaps(&s, 0.5, 0.3, 0.3, Encoding::X0, n).unwrap() - 1.0).abs() < 1e-12);
    }
    assert_eq!(epsilon_from_intensity(0.0), 0.0);
    let mut prev = 0.0;
    for i in [1e-10, 1e-8, 1e-6, 1e-3, 1.0] {
        let e = epsilon_from_intensity(i);
        assert!(e > prev && (e - (1.0 - (-i).exp())).abs() < 1e-15);
        prev = e;
    }
}

fn coherent(a: Complex64, b: Complex64) -> Complex64 {
    (-0.5 * (a.norm_sqr() + b.norm_sqr()) + a.conj() * b).exp()
}

/// Components (E₁, E₂) of the modulator-model leak state of (β, a).
fn pm_components(s: &PmScenario, mu: f64, beta: f64, a: Encoding, delta: f64) -> Vec<(Complex64, Complex64)> {
    let r1 = (beta * s.leak / mu).sqrt();
    let r2 = s.leak_pm.sqrt();
    (0..s.phases)
        .map(|j| {
            let ph = TAU * j as f64 / s.phases as f64 + delta;
            (Complex64::from_polar(r1, ph + a.modulator_phase()), Complex64::from_polar(r2, ph))
        })
        .collect()
}

/// F = ‖(1/N) G‖₁² with G the cross Gram matrix of the two equal-weight mixtures.
fn gram_span_fidelity(s: &PmScenario, mu: f64, zeta: f64, gamma: f64, a: Encoding) -> f64 {
    let xs = pm_components(s, mu, zeta, a, 0.0);
    let ys = pm_components(s, mu, gamma, a, 0.0);
    let n = s.phases as f64;
    let g = DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        coherent(xs[i].0, ys[j].0) * coherent(xs[i].1, ys[j].1) / n
    });
    let nuclear: f64 = g.svd(false, false).singular_values.iter().sum();
    nuclear * nuclear
}

#[test]
fn leak_fidelity_matches_gram_span_from_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut cases = vec![(PmScenario::new(1e-6, 1e-6, 4).unwrap(), 0.5, 0.5, 0.1, Encoding::Z0)];
    while cases.len() < 10 {
        let leak = 10f64.powf(rng.gen_range(-8.0..-3.0));
        let pm = leak * rng.gen_range(0.0..1.0);
        let s = PmScenario::new(leak, pm, rng.gen_range(1..=8)).unwrap();
        let mu = rng.gen_range(0.3..1.0);
        cases.push((s, mu, mu, mu * rng.gen_range(0.0..0.6), Encoding::ALL[rng.gen_range(0..4)]));
    }
    for (i, (s, mu, zeta, gamma, a)) in cases.into_iter().enumerate() {
        let v = pm_leak_fidelity(&s, mu, zeta, gamma, a).unwrap();
        let oracle = gram_span_fidelity(&s, mu, zeta, gamma, a).min(1.0);
        assert!(v <= oracle + 1e-13, "case {i}: {v} above {oracle}");
        assert!(oracle - v < 1e-8, "case {i}: {v} vs {oracle}");
    }
}

#[test]
fn leak_fidelity_trivial_and_monotone() {
    let s = PmScenario::new(0.0, 0.0, 4).unwrap();
    assert_eq!(pm_leak_fidelity(&s, 0.5, 0.5, 0.1, Encoding::X1).unwrap(), 1.0);
    let s = PmScenario::new(1e-4, 1e-5, 4).unwrap();
    assert!(pm_leak_fidelity(&s, 0.5, 0.3, 0.3, Encoding::Z0).unwrap() >= 1.0 - 1e-12);
    for a in Encoding::ALL {
        let mut prev = 1.0;
        for gamma in [0.5, 0.4, 0.3, 0.2, 0.1, 0.0] {
            let f = pm_leak_fidelity(&s, 0.5, 0.5, gamma, a).unwrap();
            assert!(f <= prev + 1e-12, "{a:?} γ={gamma}: {f} after {prev}");
            prev = f;
        }
    }
}

/// Coin fidelity by enumerating every offset assignment of the four encodings.
fn coin_brute_force(s: &PmScenario, mu: f64, beta: f64, n: u32) -> f64 {
    let big_n = s.phases;
    let off = |k: usize| TAU * k as f64 / big_n as f64;
    let product = |a: Encoding, da: f64, b: Encoding, db: f64| -> Complex64 {
        let xs = pm_components(s, mu, beta, a, da);
        let ys = pm_components(s, mu, beta, b, db);
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| coherent(x.0, y.0) * coherent(x.1, y.1))
            .sum::<Complex64>()
            / big_n as f64
    };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pre = 1.0 / (2.0 * 2f64.powi(n as i32 + 1).sqrt());
    let mut best = 0.0f64;
    for k0 in 0..big_n {
        for k1 in 0..big_n {
            for k2 in 0..big_n {
                for k3 in 0..big_n {
                    let (z0, z1, x0, x1) = (off(k0), off(k1), off(k2), off(k3));
                    let amp = product(Encoding::X0, x0, Encoding::Z0, z0)
                        + product(Encoding::X1, x1, Encoding::Z0, z0)
                        + product(Encoding::X0, x0, Encoding::Z1, z1)
                        - product(Encoding::X1, x1, Encoding::Z1, z1) * sign;
                    best = best.max((amp * pre).norm());
                }
            }
        }
    }
    best.min(1.0).powi(2)
}

#[test]
fn coin_fidelity_matches_exhaustive_search() {
    let cases = [
        (PmScenario::new(1e-5, 1e-6, 4).unwrap(), 0.5, 1),
        (PmScenario::new(1e-3, 1e-4, 3).unwrap(), 0.7, 1),
        (PmScenario::new(1e-4, 1e-4, 2).unwrap(), 0.4, 1),
        (PmScenario::new(1e-3, 0.0, 1).unwrap(), 0.5, 1),
        (PmScenario::new(1e-2, 1e-3, 4).unwrap(), 0.5, 1),
    ];
    for (i, (s, mu, n)) in cases.into_iter().enumerate() {
        let v = pm_coin_fidelity(&s, mu, mu, n as usize).unwrap();
        let oracle = coin_brute_force(&s, mu, mu, n);
        assert!((v - oracle).abs() < 1e-12, "case {i}: {v} vs {oracle}");
        assert!((0.0..=1.0).contains(&v));
    }
    let ideal = PmScenario::new(0.0, 0.0, 4).unwrap();
    assert!((pm_coin_fidelity(&ideal, 0.5, 0.5, 1).unwrap() - 1.0).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leak_fidelity_below_gram_span(
        leak in 1e-8f64..1e-3, ratio in 0.0f64..1.0, n in 1usize..6,
        mu in 0.2f64..1.0, g in 0.0f64..1.0, ai in 0usize..4,
    ) {
        let s = PmScenario::new(leak, leak * ratio, n).unwrap();
        let a = Encoding::ALL[ai];
        let v = pm_leak_fidelity(&s, mu, mu, mu * g, a).unwrap();
        let oracle = gram_span_fidelity(&s, mu, mu, mu * g, a).min(1.0);
        prop_assert!(v <= oracle + 1e-13);
        prop_assert!(oracle - v < 1e-8);
    }

    #[test]
    fn tha_statistics_normalized(leak in 0.0f64..0.1, n in 2usize..10, beta in 0.0f64..1.0, ai in 0usize..4) {
        let s = ThaScenario::new(leak, n).unwrap();
        let p = tha_photon_statistics(&s, 1.0, beta, Encoding::ALL[ai]).unwrap();
        prop_assert!(p.probs.iter().all(|&x| x >= 0.0));
        prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(p.n_cut, n - 1);
    }
}

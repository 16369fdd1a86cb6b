//! Randomized checks of the eigenvalue and eigenvector perturbation bounds on
//! explicit density matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use qkdleak_core::perturb::{dk_gamma, perturb_statistics, truncation_fidelity};
use qkdleak_core::source::poisson_pmf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
    let rho = &a * a.transpose();
    let t = rho.trace();
    rho / t
}

fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[j].partial_cmp(&e.eigenvalues[i]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

fn trace_norm(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().map(|v| v.abs()).sum()
}

#[test]
fn sorted_eigenvalues_move_by_at_most_kappa() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let d = rng.gen_range(2..=8);
        let rho = random_density(&mut rng, d);
        let tau = random_density(&mut rng, d);
        let t: f64 = rng.gen_range(0.0..0.2);
        let sigma = &rho * (1.0 - t) + &tau * t;
        let kappa = 0.5 * trace_norm(&(&rho - &sigma));
        assert!(kappa <= t + 1e-12);
        let (a, _) = sorted_eigen(&rho);
        let (b, _) = sorted_eigen(&sigma);
        for n in 0..d {
            assert!((a[n] - b[n]).abs() <= kappa + 1e-12, "trial {trial}, n = {n}");
        }
    }
}

#[test]
fn eigenvectors_rotate_within_davis_kahan_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut informative = 0;
    for trial in 0..1000 {
        let d = rng.gen_range(2..=8);
        let rho = random_density(&mut rng, d);
        let tau = random_density(&mut rng, d);
        let t: f64 = rng.gen_range(0.0..0.02);
        let sigma = &rho * (1.0 - t) + &tau * t;
        let kappa = 0.5 * trace_norm(&(&rho - &sigma));
        let (vals, vecs) = sorted_eigen(&rho);
        let (_, pert) = sorted_eigen(&sigma);
        for n in 0..d {
            let g = dk_gamma(&vals, n, kappa).unwrap();
            let overlap = vecs.column(n).dot(&pert.column(n));
            let fid = overlap * overlap;
            assert!(fid >= 1.0 - g.gamma_n - 1e-9, "trial {trial}, n = {n}: {fid} vs {g:?}");
            if g.gamma_n < 1.0 {
                informative += 1;
            }
        }
    }
    assert!(informative > 1000);
}

#[test]
fn perturbed_statistics_example() {
    let mut s = poisson_pmf(0.5, 1).unwrap();
    s.probs = vec![0.3, 0.001];
    let p = perturb_statistics(&s, 1e-4).unwrap();
    assert!((p.lower[0] - 0.29).abs() < 1e-15);
    assert!((p.upper[0] - 0.31).abs() < 1e-15);
    assert_eq!(p.lower[1], 0.0);
}

proptest! {
    #[test]
    fn perturbed_bounds_bracket(beta in 0.0f64..2.0, eps in 0.0f64..1.0, n_cut in 0usize..12) {
        let s = poisson_pmf(beta, n_cut).unwrap();
        let p = perturb_statistics(&s, eps).unwrap();
        for n in 0..=n_cut {
            prop_assert!(0.0 <= p.lower[n] && p.lower[n] <= s.probs[n]);
            prop_assert!(s.probs[n] <= p.upper[n] && p.upper[n] <= 1.0);
        }
    }

    #[test]
    fn dk_gamma_monotone_in_kappa(
        raw in prop::collection::vec(0.0f64..1.0, 1..8),
        k1 in 0.0f64..0.3,
        k2 in 0.0f64..0.3,
        idx in 0usize..8,
    ) {
        let mut eigs = raw.clone();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = idx % eigs.len();
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let a = dk_gamma(&eigs, n, lo).unwrap();
        let b = dk_gamma(&eigs, n, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.gamma_n));
        prop_assert!(a.gamma_n <= b.gamma_n);
        if a.delta_n <= 0.0 && lo > 0.0 {
            prop_assert_eq!(a.gamma_n, 1.0);
        }
    }

    #[test]
    fn truncation_fidelity_monotone(beta in 0.0f64..3.0, m in 0usize..20) {
        let s = poisson_pmf(beta, 30).unwrap();
        let a = truncation_fidelity(&s.probs, m);
        let b = truncation_fidelity(&s.probs, m + 1);
        prop_assert!(a <= b);
        let total: f64 = s.probs.iter().sum();
        prop_assert!((truncation_fidelity(&s.probs, 40) - total).abs() < 1e-15);
    }
}

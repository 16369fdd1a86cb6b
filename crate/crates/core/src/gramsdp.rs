//! Lower bound on the overlap of two leaky n-photon states through a 4×4
//! Gram-matrix semidefinite program.
//!
//! Each leaky state is written as `√(1−γ)|n⟩ + √γ|n⊥⟩` with `|n⊥⟩ ⊥ |n⟩`.
//! The four vectors `|n_γ⟩, |n⊥_γ⟩, |n_ζ⟩, |n⊥_ζ⟩` have a Gram matrix with
//! unit diagonal, `⟨n_γ|n⊥_γ⟩ = ⟨n_ζ|n⊥_ζ⟩ = 0` and `⟨n_γ|n_ζ⟩ = c₀` fixed by
//! the ideal states.  The overlap of the leaky states is linear in that
//! matrix and is minimized over all such PSD matrices.
//!
//! The program is solved in the basis `|n_γ⟩, |n⊥_γ⟩, |e⟩, |n⊥_ζ⟩` with
//! `|n_ζ⟩ = c₀|n_γ⟩ + s₀|e⟩`, `e ⊥ n_γ`.  The feasible sets are the same, but
//! this form keeps a strictly feasible point (the identity) even at `c₀ = 1`,
//! where the original form has none and interior-point iterates diverge.
//!
//! The reported value is a dual objective corrected by the smallest
//! eigenvalue of the dual slack, so it is a valid bound for any dual iterate.

use nalgebra::{Cholesky, Matrix4, SMatrix, SVector, SymmetricEigen, Vector4};

use crate::error::{check_unit, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramProblem {
    /// ⟨n_γ|n_ζ⟩ of the ideal states.
    pub ideal_overlap: f64,
    pub gamma_zeta: f64,
    pub gamma_gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedBound {
    /// Certified lower bound on Re⟨n^ε_γ|n^ε_ζ⟩, in [−1, 1].
    pub value: f64,
    /// Dual objective bᵀy of the reported iterate.
    pub dual_objective: f64,
    /// Dual infeasibility max(0, −λ_min(S)).
    pub residual: f64,
    /// Objective of an explicitly constructed feasible Gram matrix.
    pub primal_objective: f64,
}

impl CertifiedBound {
    /// Squared-overlap bound usable in the Cauchy–Schwarz constraints.
    pub fn z(&self) -> f64 {
        let v = self.value.max(0.0);
        v * v
    }
}

type M4 = Matrix4<f64>;
type V7 = SVector<f64, 7>;
type M7 = SMatrix<f64, 7, 7>;

fn sym(i: usize, j: usize) -> M4 {
    let mut m = M4::zeros();
    if i == j {
        m[(i, i)] = 1.0;
    } else {
        m[(i, j)] = 0.5;
        m[(j, i)] = 0.5;
    }
    m
}

struct Sdp {
    /// Objective constant a_γ a_ζ c₀.
    k: f64,
    c: M4,
    a: [M4; 7],
    b: V7,
}

impl Sdp {
    fn new(p: &GramProblem) -> Self {
        let (ag, bg) = ((1.0 - p.gamma_gamma).sqrt(), p.gamma_gamma.sqrt());
        let (az, bz) = ((1.0 - p.gamma_zeta).sqrt(), p.gamma_zeta.sqrt());
        let c0 = p.ideal_overlap;
        let s0 = (1.0 - c0 * c0).max(0.0).sqrt();
        let mut c = M4::zeros();
        for (i, j, w) in [(0, 3, ag * bz), (1, 2, bg * az * s0), (1, 3, bg * bz)] {
            c[(i, j)] = 0.5 * w;
            c[(j, i)] = 0.5 * w;
        }
        let a = [
            sym(0, 0),
            sym(1, 1),
            sym(2, 2),
            sym(3, 3),
            sym(0, 1),
            sym(0, 2),
            sym(0, 3) * c0 + sym(2, 3) * s0,
        ];
        let b = V7::from_column_slice(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        Self { k: ag * az * c0, c, a, b }
    }

    fn slack(&self, y: &V7) -> M4 {
        let mut s = self.c;
        for k in 0..7 {
            s -= self.a[k] * y[k];
        }
        s
    }

    /// Barrier objective −bᵀy − t·log det S, or None outside the cone.
    fn barrier(&self, y: &V7, t: f64) -> Option<f64> {
        let ch = Cholesky::new(self.slack(y))?;
        let logdet: f64 = 2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Some(-self.b.dot(y) - t * logdet)
    }

    fn certified(&self, y: &V7) -> (f64, f64) {
        let lmin = SymmetricEigen::new(self.slack(y)).eigenvalues.min();
        let residual = (-lmin).max(0.0);
        // Any feasible G has trace 4, so ⟨S, G⟩ ≥ 4·λ_min(S).
        let v = self.k + self.b.dot(y) - 4.0 * residual;
        (v, residual)
    }

    fn objective(&self, g: &M4) -> f64 {
        self.k + self.c.component_mul(g).sum()
    }
}

/// Unit vector along the part of `x` orthogonal to `against`, or any unit
/// vector orthogonal to them if that part vanishes.
fn orth_unit(x: Vector4<f64>, against: &[Vector4<f64>]) -> Vector4<f64> {
    let project = |mut v: Vector4<f64>| {
        for u in against {
            v -= *u * u.dot(&v);
        }
        v
    };
    let v = project(x);
    if v.norm() > 1e-8 {
        return v.normalize();
    }
    for k in 0..4 {
        let v = project(Vector4::ith(k, 1.0));
        if v.norm() > 1e-3 {
            return project(v.normalize()).normalize();
        }
    }
    unreachable!("fewer than four constraints in four dimensions")
}

/// Turns an approximate primal matrix into an exactly structured Gram matrix.
fn repair_primal(x: &M4, c0: f64) -> M4 {
    let eig = SymmetricEigen::new(*x);
    let mut f = M4::zeros();
    for k in 0..4 {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        f.set_column(k, &(eig.eigenvectors.column(k) * s));
    }
    // Column i of fᵀ is a vector whose Gram matrix is x.
    let ft = f.transpose();
    let col = |i: usize| ft.column(i).into_owned();
    let v0 = orth_unit(col(0), &[]);
    let v1 = orth_unit(col(1), &[v0]);
    let v2 = orth_unit(col(2), &[v0]);
    let n_zeta = v0 * c0 + v2 * (1.0 - c0 * c0).max(0.0).sqrt();
    let v3 = orth_unit(col(3), &[n_zeta.normalize()]);
    let vs = [v0, v1, v2, v3];
    M4::from_fn(|i, j| vs[i].dot(&vs[j]))
}

pub fn overlap_lower_bound(problem: &GramProblem, tol: f64) -> Result<CertifiedBound> {
    check_unit("ideal overlap", problem.ideal_overlap)?;
    check_unit("gamma_zeta", problem.gamma_zeta)?;
    check_unit("gamma_gamma", problem.gamma_gamma)?;
    let c0 = problem.ideal_overlap;
    if problem.gamma_zeta == 0.0 && problem.gamma_gamma == 0.0 {
        return Ok(CertifiedBound {
            value: c0,
            dual_objective: c0,
            residual: 0.0,
            primal_objective: c0,
        });
    }
    let sdp = Sdp::new(problem);
    let shift = 2.0 + sdp.c.abs().sum();
    let mut y = V7::zeros();
    for k in 0..4 {
        y[k] = -shift;
    }
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, y);
    let mut t = 1.0;
    let mut x_last = M4::identity();
    while t > 1e-13 {
        for _ in 0..100 {
            let s = sdp.slack(&y);
            let Some(p) = s.try_inverse() else { break };
            let pa: Vec<M4> = sdp.a.iter().map(|a| p * a).collect();
            let mut g = V7::zeros();
            let mut h = M7::zeros();
            for k in 0..7 {
                g[k] = -sdp.b[k] + t * pa[k].trace();
                for l in 0..=k {
                    let v = t * (pa[k] * pa[l]).trace();
                    h[(k, l)] = v;
                    h[(l, k)] = v;
                }
            }
            let Some(hc) = Cholesky::new(h) else { break };
            let step = -hc.solve(&g);
            let dec = -g.dot(&step);
            if !(dec > 1e-13) {
                break;
            }
            let f0 = sdp.barrier(&y, t).unwrap_or(f64::INFINITY);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-10 {
                let cand = y + step * alpha;
                if let Some(f1) = sdp.barrier(&cand, t) {
                    if f1 <= f0 - 0.25 * alpha * dec {
                        y = cand;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if let Some(p) = sdp.slack(&y).try_inverse() {
            x_last = p * t;
        }
        let (v, r) = sdp.certified(&y);
        if v.is_finite() && v > best.0 {
            best = (v, r, y);
        }
        t *= 0.2;
    }
    let (value, residual, y) = best;
    if !value.is_finite() {
        return Err(Error::Uncertified("no finite dual objective".into()));
    }
    if residual > tol {
        return Err(Error::Uncertified(format!(
            "dual residual {residual:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    let g = repair_primal(&x_last, c0);
    Ok(CertifiedBound {
        value: value.clamp(-1.0, 1.0),
        dual_objective: sdp.k + sdp.b.dot(&y),
        residual,
        primal_objective: sdp.objective(&g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound(c: f64, gz: f64, gg: f64) -> CertifiedBound {
        overlap_lower_bound(
            &GramProblem { ideal_overlap: c, gamma_zeta: gz, gamma_gamma: gg },
            DEFAULT_TOL,
        )
        .unwrap()
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(bound(1.0, 0.0, 0.0).value, 1.0);
        assert_eq!(bound(0.37, 0.0, 0.0).value, 0.37);
    }

    #[test]
    fn identical_ideal_states() {
        for g in [1e-6, 1e-3, 0.05, 0.3, 0.7] {
            let b = bound(1.0, g, g);
            assert!((b.value - (1.0 - 2.0 * g)).abs() < 1e-6, "γ = {g}: {b:?}");
            assert!(b.value <= 1.0 - 2.0 * g + 1e-12);
            assert!(b.dual_objective <= b.primal_objective + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = GramProblem { ideal_overlap: 1.2, gamma_zeta: 0.0, gamma_gamma: 0.1 };
        assert!(overlap_lower_bound(&p, DEFAULT_TOL).is_err());
    }

    #[test]
    fn z_floors_negative_bounds() {
        let b = bound(0.2, 0.9, 0.9);
        assert!(b.value < 0.0);
        assert_eq!(b.z(), 0.0);
    }
}

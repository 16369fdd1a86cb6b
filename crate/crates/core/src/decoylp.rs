//! Decoy-state linear programs.
//!
//! For one encoding, the unknowns are the yields `Yⁿ_β` (or error
//! probabilities `ξⁿ_β`) for n ≤ n_cut and the three intensities.  They are
//! tied together by the observed gains and by tangent-line relaxations of the
//! Cauchy–Schwarz envelopes between intensities.

use rand::Rng;

use crate::csbounds::tangent_lines;
use crate::error::{domain, Result};
use crate::lp::{solve, LinearProgram, Relation, Sense};
use crate::perturb::PerturbedStatistics;

/// How the observed gains constrain the LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    /// Two-sided bounds from the lower statistics only.
    General,
    /// Adds `Q ≤ Σ pᵁ Y`; valid when n_cut covers every photon-number class.
    DiscreteExact,
    /// Exact statistics and full coverage: the gains are equalities.
    ThaExact,
}

/// Everything the LPs of one encoding need.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoyInputs {
    pub n_cut: usize,
    pub mode: GainMode,
    /// Gains `Q_β` for μ, ν, ω.
    pub gains: [f64; 3],
    /// Error gains `E_β Q_β`.
    pub error_gains: [f64; 3],
    /// Photon-number statistics per intensity.
    pub stats: [PerturbedStatistics; 3],
    /// Squared-overlap bounds `z[n][ζ][γ]`, symmetric in (ζ, γ).
    pub z: Vec<[[f64; 3]; 3]>,
}

/// Which family of unknowns an LP is over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Yields, minimized.
    Yield,
    /// Error probabilities, maximized.
    Error,
}

/// Reference values for the tangent lines, indexed `[n][β]`.
pub type References = Vec<[f64; 3]>;

/// Result of one decoy LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    /// Certified bound clamped to [0, 1]: lower for yields, upper for errors.
    pub bound: f64,
    /// Optimal point in `[n][β]` layout, reusable as references.
    pub point: References,
}

/// Relative slack on data-derived right-hand sides, covering the rounding in
/// the simulated observables and statistics.
const DATA_SLACK: f64 = 1e-11;
/// Absolute slack on tangent intercepts, scaled by (1 + |slope|).
const TANGENT_SLACK: f64 = 1e-12;

fn var(n: usize, b: usize) -> usize {
    3 * n + b
}

impl DecoyInputs {
    pub fn validate(&self) -> Result<()> {
        if self.z.len() <= self.n_cut {
            return domain(format!(
                "overlap catalog has {} photon numbers, need {}",
                self.z.len(),
                self.n_cut + 1
            ));
        }
        for b in 0..3 {
            let (q, eq) = (self.gains[b], self.error_gains[b]);
            if !(0.0..=1.0).contains(&q) || !(0.0..=q).contains(&eq) {
                return domain(format!("observables Q = {q}, EQ = {eq} out of range"));
            }
        }
        for row in &self.z {
            if row.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return domain("squared overlaps must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// The LP for `quantity` with tangents taken at `refs`; the objective is left empty.
    pub fn build_lp(&self, quantity: Quantity, refs: &References) -> LinearProgram {
        let nv = 3 * (self.n_cut + 1);
        let mut lp = LinearProgram::unit_box(nv);
        for n in 0..=self.n_cut {
            for zeta in 0..3 {
                for gamma in 0..3 {
                    let z = self.z[n][zeta][gamma];
                    if zeta == gamma || z <= 0.0 {
                        continue;
                    }
                    let y_ref = refs.get(n).map_or(0.5, |r| r[zeta]).clamp(0.0, 1.0);
                    let Ok((lo, up)) = tangent_lines(y_ref, z) else { continue };
                    let (yg, yz) = (var(n, gamma), var(n, zeta));
                    if lo.slope != 0.0 || lo.intercept > 0.0 {
                        let m = TANGENT_SLACK * (1.0 + lo.slope.abs());
                        lp.add_sparse(&[(yg, 1.0), (yz, -lo.slope)], Relation::Ge, lo.intercept - m);
                    }
                    if up.slope != 0.0 || up.intercept < 1.0 {
                        let m = TANGENT_SLACK * (1.0 + up.slope.abs());
                        lp.add_sparse(&[(yg, 1.0), (yz, -up.slope)], Relation::Le, up.intercept + m);
                    }
                }
            }
        }
        let observed = match quantity {
            Quantity::Yield => &self.gains,
            Quantity::Error => &self.error_gains,
        };
        for b in 0..3 {
            let q = observed[b];
            let slack = DATA_SLACK * q.abs() + 1e-300;
            let st = &self.stats[b];
            let lower: Vec<(usize, f64)> =
                (0..=self.n_cut).map(|n| (var(n, b), st.lower(n))).collect();
            let upper: Vec<(usize, f64)> =
                (0..=self.n_cut).map(|n| (var(n, b), st.upper(n))).collect();
            match self.mode {
                GainMode::ThaExact => {
                    lp.add_sparse(&lower, Relation::Le, q + slack);
                    lp.add_sparse(&lower, Relation::Ge, q - slack);
                }
                GainMode::General | GainMode::DiscreteExact => {
                    let mass: f64 = lower.iter().map(|t| t.1).sum();
                    lp.add_sparse(&lower, Relation::Le, q + slack);
                    let rhs = q - (1.0 - mass).max(0.0) - slack;
                    if rhs > 0.0 {
                        lp.add_sparse(&lower, Relation::Ge, rhs);
                    }
                    if self.mode == GainMode::DiscreteExact {
                        lp.add_sparse(&upper, Relation::Ge, q - slack);
                    }
                }
            }
        }
        lp
    }

    fn solve_once(
        &self,
        quantity: Quantity,
        target: (usize, usize),
        refs: &References,
    ) -> Result<LpOutcome> {
        let (n, b) = target;
        if n > self.n_cut || b > 2 {
            return domain(format!("target ({n}, {b}) outside the LP"));
        }
        let mut lp = self.build_lp(quantity, refs);
        lp.objective[var(n, b)] = 1.0;
        let sense = match quantity {
            Quantity::Yield => Sense::Minimize,
            Quantity::Error => Sense::Maximize,
        };
        let sol = solve(&lp, sense)?;
        let point = (0..=self.n_cut)
            .map(|k| [0, 1, 2].map(|c| sol.x[var(k, c)].clamp(0.0, 1.0)))
            .collect();
        Ok(LpOutcome {
            bound: sol.bound.clamp(0.0, 1.0),
            point,
        })
    }
}

/// Lower bound on `Yⁿ_β` with tangents at `refs`.
pub fn solve_yield_lp(inputs: &DecoyInputs, target: (usize, usize), refs: &References) -> Result<LpOutcome> {
    inputs.validate()?;
    inputs.solve_once(Quantity::Yield, target, refs)
}

/// Upper bound on `ξⁿ_β` with tangents at `refs`.
pub fn solve_error_lp(inputs: &DecoyInputs, target: (usize, usize), refs: &References) -> Result<LpOutcome> {
    inputs.validate()?;
    inputs.solve_once(Quantity::Error, target, refs)
}

fn better(quantity: Quantity, a: f64, b: f64) -> bool {
    match quantity {
        Quantity::Yield => a > b,
        Quantity::Error => a < b,
    }
}

/// Solves with `refs`, then re-solves with each optimum as its own reference
/// for up to `rounds` more times, keeping the tightest bound.
pub fn solve_refined(
    inputs: &DecoyInputs,
    quantity: Quantity,
    target: (usize, usize),
    refs: &References,
    rounds: usize,
) -> Result<LpOutcome> {
    inputs.validate()?;
    let mut best = inputs.solve_once(quantity, target, refs)?;
    let mut current = best.clone();
    for _ in 0..rounds {
        let next = inputs.solve_once(quantity, target, &current.point)?;
        let improved = better(quantity, next.bound, best.bound);
        if improved {
            best = next.clone();
        }
        if (next.bound - current.bound).abs() <= 1e-12 {
            break;
        }
        current = next;
    }
    Ok(best)
}

/// Uniform random references in [0, 1].
pub fn random_references<R: Rng>(rng: &mut R, n_cut: usize) -> References {
    (0..=n_cut).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()
}

/// Tightest bound over `k` random reference draws.
pub fn monte_carlo_best<R: Rng>(
    inputs: &DecoyInputs,
    quantity: Quantity,
    target: (usize, usize),
    k: usize,
    rng: &mut R,
) -> Result<LpOutcome> {
    inputs.validate()?;
    let mut best: Option<LpOutcome> = None;
    for _ in 0..k.max(1) {
        let refs = random_references(rng, inputs.n_cut);
        let out = inputs.solve_once(quantity, target, &refs)?;
        if best.as_ref().map_or(true, |b| better(quantity, out.bound, b.bound)) {
            best = Some(out);
        }
    }
    Ok(best.expect("k >= 1"))
}

/// Basis-level bounds assembled from per-encoding LP results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    pub y_z_lower: f64,
    pub y_x_lower: f64,
    pub xi_x_upper: f64,
    pub e_bx_upper: f64,
    /// Set when the X-basis yield bound is zero.
    pub vacuous: bool,
}

/// Combines yield bounds of the four encodings (Z0, Z1, X0, X1) and error
/// bounds of the two X encodings.
pub fn combine_bounds(yields: [f64; 4], xi_x: [f64; 2]) -> BoundSet {
    let y_z = yields[0].min(yields[1]);
    let y_x = yields[2].min(yields[3]);
    let xi = xi_x[0].max(xi_x[1]);
    if !(y_x > 0.0) {
        return BoundSet {
            y_z_lower: y_z,
            y_x_lower: y_x,
            xi_x_upper: xi,
            e_bx_upper: 1.0,
            vacuous: true,
        };
    }
    BoundSet {
        y_z_lower: y_z,
        y_x_lower: y_x,
        xi_x_upper: xi,
        e_bx_upper: (xi / y_x).min(1.0),
        vacuous: false,
    }
}

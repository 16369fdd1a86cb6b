//! Dense two-phase simplex for small box-constrained linear programs.
//!
//! The simplex only proposes a basis.  The value handed back to callers is a
//! rigorous bound computed from the dual multipliers of that basis on the
//! original data, so it stays valid even if the pivoting loses accuracy.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// `opt cᵀx` subject to the rows and `0 ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    /// A program over `n` variables boxed in [0, 1] with zero objective.
    pub fn unit_box(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            upper: vec![1.0; n],
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars());
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Sparse convenience wrapper around [`LinearProgram::add_row`].
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], rel: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_row(coeffs, rel, rhs);
    }

    /// Largest violation of a row or box constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(-v).max(v - self.upper[j]);
        }
        for r in &self.rows {
            let ax: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match r.rel {
                Relation::Le => ax - r.rhs,
                Relation::Ge => r.rhs - ax,
                Relation::Eq => (ax - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Rigorous lower bound on `min cᵀx` from row multipliers `y`, using the
    /// Lagrangian `cᵀx − yᵀ(Ax − b)` minimized over the box.  Multipliers with
    /// the wrong sign for their row are dropped.
    pub fn lagrangian_bound(&self, c: &[f64], y: &[f64]) -> f64 {
        let n = self.n_vars();
        let mut y: Vec<f64> = y.to_vec();
        for (yi, r) in y.iter_mut().zip(&self.rows) {
            match r.rel {
                Relation::Ge => *yi = yi.max(0.0),
                Relation::Le => *yi = yi.min(0.0),
                Relation::Eq => {}
            }
            if !yi.is_finite() {
                *yi = 0.0;
            }
        }
        let mut r = c.to_vec();
        let mut scale = 0.0;
        let mut bound = 0.0;
        for (yi, row) in y.iter().zip(&self.rows) {
            if *yi == 0.0 {
                continue;
            }
            bound += yi * row.rhs;
            scale += yi.abs() * row.rhs.abs();
            for (j, a) in row.coeffs.iter().enumerate() {
                r[j] -= yi * a;
            }
        }
        for j in 0..n {
            let u = self.upper[j];
            let mut col = c[j].abs();
            for (yi, row) in y.iter().zip(&self.rows) {
                col += yi.abs() * row.coeffs[j].abs();
            }
            if r[j] < 0.0 {
                if u.is_infinite() {
                    return f64::NEG_INFINITY;
                }
                bound += r[j] * u;
            }
            if u.is_finite() {
                scale += col * u;
            }
        }
        // Accumulated rounding of the sums above, with a generous constant.
        let k = (self.rows.len() + n + 8) as f64;
        bound - 2.0 * k * f64::EPSILON * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Optimal point proposed by the simplex.
    pub x: Vec<f64>,
    /// `cᵀx` at that point.
    pub objective: f64,
    /// Certified bound: a lower bound on the minimum, or an upper bound on
    /// the maximum, of the exact program.
    pub bound: f64,
    /// Multipliers of the original rows for the minimization form.
    pub duals: Vec<f64>,
    /// Largest constraint violation of `x`.
    pub max_violation: f64,
}

/// Primal feasibility demanded of the returned point.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Tolerances {
    pivot: f64,
    optimality: f64,
    bland_after: usize,
}

const DEFAULT_TOL: Tolerances = Tolerances {
    pivot: 1e-11,
    optimality: 1e-10,
    bland_after: 40,
};

const TIGHT_TOL: Tolerances = Tolerances {
    pivot: 1e-13,
    optimality: 1e-12,
    bland_after: 0,
};

pub fn solve(lp: &LinearProgram, sense: Sense) -> Result<LpSolution> {
    let c: Vec<f64> = match sense {
        Sense::Minimize => lp.objective.clone(),
        Sense::Maximize => lp.objective.iter().map(|v| -v).collect(),
    };
    if lp.upper.len() != lp.n_vars() || lp.rows.iter().any(|r| r.coeffs.len() != lp.n_vars()) {
        return Err(Error::Domain("inconsistent linear program dimensions".into()));
    }
    if lp.upper.iter().any(|u| !(*u >= 0.0)) {
        return Err(Error::Domain("variable upper bounds must be nonnegative".into()));
    }
    let mut best = None;
    for tol in [DEFAULT_TOL, TIGHT_TOL] {
        let sol = Tableau::build(lp, &c).run(lp, &c, tol)?;
        let ok = sol.max_violation <= FEASIBILITY_TOL;
        best = Some(sol);
        if ok {
            break;
        }
    }
    let mut sol = best.expect("at least one attempt");
    if sense == Sense::Maximize {
        sol.bound = -sol.bound;
    }
    sol.objective = lp.objective.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
    Ok(sol)
}

/// Standard-form tableau `B⁻¹[A | slacks | artificials | b]`.
struct Tableau {
    m: usize,
    n: usize,
    /// Index of the first artificial column.
    art0: usize,
    cols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Original standard-form columns, for refactorization.
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// Sign applied to each original row to make its right-hand side nonnegative.
    row_sign: Vec<f64>,
    /// Positive factor each row was divided by to give it unit largest coefficient.
    row_scale: Vec<f64>,
    /// Number of rows taken from the program (the rest are box rows).
    n_prog_rows: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram, c: &[f64]) -> Self {
        let n = lp.n_vars();
        // Box rows only for variables that appear somewhere.
        let used: Vec<bool> = (0..n)
            .map(|j| c[j] != 0.0 || lp.rows.iter().any(|r| r.coeffs[j] != 0.0))
            .collect();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| (r.coeffs.clone(), r.rel, r.rhs))
            .collect();
        for j in 0..n {
            if used[j] && lp.upper[j].is_finite() {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                rows.push((e, Relation::Le, lp.upper[j]));
            }
        }
        let m = rows.len();
        let mut row_sign = vec![1.0; m];
        for (i, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
            if *rhs < 0.0 {
                row_sign[i] = -1.0;
                coeffs.iter_mut().for_each(|a| *a = -*a);
                *rhs = -*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let mut row_scale = vec![1.0; m];
        for (i, (coeffs, _, rhs)) in rows.iter_mut().enumerate() {
            let big = coeffs.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
            if big > 0.0 && big.is_finite() {
                row_scale[i] = big;
                coeffs.iter_mut().for_each(|a| *a /= big);
                *rhs /= big;
            }
        }
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let art0 = n + n_slack;
        let cols = art0 + n_art;
        let width = cols + 1;
        let mut t = vec![0.0; m * width];
        let mut a = DMatrix::zeros(m, cols);
        let mut b = DVector::zeros(m);
        let mut basis = vec![0; m];
        let (mut s, mut art) = (n, art0);
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            for (j, v) in coeffs.iter().enumerate() {
                a[(i, j)] = *v;
            }
            b[i] = *rhs;
            match rel {
                Relation::Le => {
                    a[(i, s)] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    a[(i, s)] = -1.0;
                    s += 1;
                    a[(i, art)] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    a[(i, art)] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
            for j in 0..cols {
                t[i * width + j] = a[(i, j)];
            }
            t[i * width + cols] = *rhs;
        }
        Self {
            m,
            n,
            art0,
            cols,
            t,
            basis,
            a,
            b,
            row_sign,
            row_scale,
            n_prog_rows: lp.rows.len(),
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let w = self.width();
        let p = self.t[r * w + q];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for (x, pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (x, pv) in d.iter_mut().zip(prow.iter()) {
                *x -= f * pv;
            }
            d[q] = 0.0;
        }
        self.basis[r] = q;
    }

    /// Reduced costs (and negated objective in the last slot) for costs `cost`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let w = self.width();
        let mut d = cost.to_vec();
        d.push(0.0);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    d[j] -= cb * self.t[i * w + j];
                }
            }
        }
        d
    }

    /// Rebuilds the tableau as B⁻¹[A | b] from the original data.  Returns
    /// false, leaving the tableau untouched, if the basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[(i, self.basis[k])]);
        let lu = bmat.lu();
        let mut rhs = DMatrix::zeros(m, self.cols + 1);
        rhs.view_mut((0, 0), (m, self.cols)).copy_from(&self.a);
        rhs.set_column(self.cols, &self.b);
        let Some(x) = lu.solve(&rhs) else { return false };
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let w = self.width();
        for i in 0..m {
            for j in 0..w {
                self.t[i * w + j] = x[(i, j)];
            }
            // Basic columns are exact unit vectors.
            for (k, &bj) in self.basis.iter().enumerate() {
                self.t[i * w + bj] = if i == k { 1.0 } else { 0.0 };
            }
        }
        true
    }

    /// Largest violation of A x = b by the current basic solution.
    fn primal_residual(&self) -> f64 {
        let w = self.width();
        let mut r = self.b.clone();
        for (k, &bj) in self.basis.iter().enumerate() {
            let x = self.t[k * w + self.cols];
            if x != 0.0 {
                r.axpy(-x, &self.a.column(bj), 1.0);
            }
        }
        r.amax()
    }

    /// Simplex iterations for costs `cost`; columns at or beyond `limit` never enter.
    fn iterate(&mut self, cost: &[f64], limit: usize, tol: Tolerances) -> Result<Vec<f64>> {
        const REFACTOR_EVERY: usize = 20;
        let w = self.width();
        let max_iter = 50 * (self.m + self.cols) + 1000;
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0usize;
        let mut fresh = 0usize;
        for it in 0..max_iter {
            if it > 0 && it % REFACTOR_EVERY == 0 && self.refactor() {
                d = self.reduced_costs(cost);
                fresh = it;
            }
            let bland = degenerate > tol.bland_after || tol.bland_after == 0;
            let mut q = None;
            let mut best = -tol.optimality;
            for j in 0..limit {
                if d[j] < best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = d[j];
                }
            }
            let Some(q) = q else {
                // Rebuild only if pivots since the last rebuild have drifted.
                let drifted = it > fresh && self.primal_residual() > 1e-13 * (1.0 + self.b.amax());
                if drifted && self.refactor() {
                    fresh = it;
                    d = self.reduced_costs(cost);
                    if (0..limit).any(|j| d[j] < -tol.optimality) {
                        continue;
                    }
                }
                return Ok(d);
            };
            // Harris ratio test: bound the step with a small feasibility
            // tolerance, then take the largest pivot among the rows within it.
            const HARRIS: f64 = 1e-12;
            let mut limit_ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.t[i * w + q];
                if a > tol.pivot {
                    let v = (self.t[i * w + self.cols].max(0.0) + HARRIS) / a;
                    limit_ratio = limit_ratio.min(v);
                }
            }
            let mut r: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.t[i * w + q];
                if a > tol.pivot {
                    let v = self.t[i * w + self.cols].max(0.0) / a;
                    if v <= limit_ratio {
                        let better = match r {
                            None => true,
                            Some(k) => {
                                let ak = self.t[k * w + q];
                                if bland {
                                    self.basis[i] < self.basis[k]
                                } else {
                                    a > ak
                                }
                            }
                        };
                        if better {
                            ratio = v;
                            r = Some(i);
                        }
                    }
                }
            }
            let Some(r) = r else {
                return Err(Error::Numerical("unbounded direction in a boxed program".into()));
            };
            if ratio <= 1e-15 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &mut d);
            // A step within the Harris tolerance may leave tiny negative values.
            for i in 0..self.m {
                let v = &mut self.t[i * w + self.cols];
                if *v < 0.0 && *v > -1e-9 {
                    *v = 0.0;
                }
            }
        }
        Err(Error::Numerical(format!(
            "simplex did not converge within {max_iter} iterations"
        )))
    }

    fn run(mut self, lp: &LinearProgram, c: &[f64], tol: Tolerances) -> Result<LpSolution> {
        let w = self.width();
        // Phase I: minimize the sum of artificials.
        let mut cost1 = vec![0.0; self.cols];
        cost1[self.art0..].iter_mut().for_each(|v| *v = 1.0);
        let mut d = self.iterate(&cost1, self.cols, tol)?;
        let infeas: f64 = (0..self.m)
            .filter(|&i| self.basis[i] >= self.art0)
            .map(|i| self.t[i * w + self.cols])
            .sum();
        let scale = 1.0 + self.b.amax();
        if infeas > 1e-9 * scale {
            return Err(Error::Infeasible(format!(
                "phase-one residual {infeas:.3e} exceeds tolerance"
            )));
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..self.m {
            if self.basis[i] >= self.art0 {
                let mut best = None;
                let mut mag = 1e-9;
                for j in 0..self.art0 {
                    let v = self.t[i * w + j].abs();
                    if v > mag {
                        mag = v;
                        best = Some(j);
                    }
                }
                if let Some(j) = best {
                    self.pivot(i, j, &mut d);
                }
            }
        }
        // Phase II.
        let mut cost2 = vec![0.0; self.cols];
        cost2[..self.n].copy_from_slice(c);
        self.iterate(&cost2, self.art0, tol)?;
        self.finish(lp, c, &cost2)
    }

    /// Refactorizes the final basis on the original data to get an accurate
    /// primal point and row multipliers.
    fn finish(&self, lp: &LinearProgram, c: &[f64], cost: &[f64]) -> Result<LpSolution> {
        let w = self.width();
        let m = self.m;
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[(i, self.basis[k])]);
        let lu = bmat.clone().lu();
        let xb = lu.solve(&self.b);
        let cb = DVector::from_fn(m, |k, _| cost[self.basis[k]]);
        let y = bmat.transpose().lu().solve(&cb);
        let mut x = vec![0.0; self.n];
        match &xb {
            Some(xb) => {
                for (k, &j) in self.basis.iter().enumerate() {
                    if j < self.n {
                        x[j] = xb[k];
                    }
                }
            }
            None => {
                for (i, &j) in self.basis.iter().enumerate() {
                    if j < self.n {
                        x[j] = self.t[i * w + self.cols];
                    }
                }
            }
        }
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(0.0, lp.upper[j]);
        }
        let duals: Vec<f64> = match y {
            Some(y) => (0..self.n_prog_rows)
                .map(|i| y[i] * self.row_sign[i] / self.row_scale[i])
                .collect(),
            None => vec![0.0; self.n_prog_rows],
        };
        let bound = lp.lagrangian_bound(c, &duals);
        if !bound.is_finite() && bound != f64::NEG_INFINITY {
            return Err(Error::Numerical("non-finite dual bound".into()));
        }
        Ok(LpSolution {
            max_violation: lp.max_violation(&x),
            objective: c.iter().zip(&x).map(|(a, b)| a * b).sum(),
            x,
            bound,
            duals,
        })
    }
}

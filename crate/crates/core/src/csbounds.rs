//! Cauchy–Schwarz envelopes relating the detection probability of two
//! states with squared overlap `z`, and their tangent-line relaxations.
//!
//! If one state is detected with probability `y`, the other is detected with
//! probability in `[G₋(y, z), G₊(y, z)]`.  `G₋` is convex and `G₊` concave in
//! `y`, so every tangent line is a valid one-sided bound.

use crate::error::{check_unit, Result};

/// Reference points closer than this to 0 or 1 are treated as endpoints, where
/// the envelope slope diverges.
pub const ENDPOINT_TOL: f64 = 1e-8;

fn check(y: f64, z: f64) -> Result<()> {
    check_unit("y", y)?;
    check_unit("z", z)
}

/// Unclamped envelopes `g± = y + (1−z)(1−2y) ± 2√(z(1−z)y(1−y))`.
pub fn g_plus_minus(y: f64, z: f64) -> Result<(f64, f64)> {
    check(y, z)?;
    let base = y + (1.0 - z) * (1.0 - 2.0 * y);
    let root = 2.0 * (z * (1.0 - z) * y * (1.0 - y)).max(0.0).sqrt();
    Ok((base - root, base + root))
}

/// Clamped envelopes `(G₋, G₊)`.
pub fn g_interval(y: f64, z: f64) -> Result<(f64, f64)> {
    let (gm, gp) = g_plus_minus(y, z)?;
    let lower = if y > 1.0 - z { gm.clamp(0.0, 1.0) } else { 0.0 };
    let upper = if y < z { gp.clamp(0.0, 1.0) } else { 1.0 };
    Ok((lower, upper.max(lower)))
}

/// Slopes `(G₋′, G₊′)`.  Zero on a clamped branch, one when `z = 1`, and
/// infinite where an active branch meets an endpoint `y ∈ {0, 1}`.
pub fn g_prime(y: f64, z: f64) -> Result<(f64, f64)> {
    check(y, z)?;
    if z >= 1.0 {
        return Ok((1.0, 1.0));
    }
    let lower_active = y > 1.0 - z;
    let upper_active = y < z;
    let at_end = y * (1.0 - y) < ENDPOINT_TOL;
    let ratio = if at_end {
        f64::INFINITY
    } else {
        (z * (1.0 - z) / (y * (1.0 - y))).sqrt()
    };
    let slope = |sign: f64| {
        if at_end {
            // (1 − 2y) is ±1 at the endpoints; the sign fixes the divergence.
            sign * (1.0 - 2.0 * y).signum() * f64::INFINITY
        } else {
            -1.0 + 2.0 * z + sign * (1.0 - 2.0 * y) * ratio
        }
    };
    let sm = if lower_active { slope(-1.0) } else { 0.0 };
    let sp = if upper_active { slope(1.0) } else { 0.0 };
    Ok((sm, sp))
}

/// Tangent line at `y_ref`, evaluated at `y`.  A diverging slope gives the
/// vacuous bound (0 below, 1 above) instead of a line.
pub fn linearized_interval(y_ref: f64, z: f64, y: f64) -> Result<(f64, f64)> {
    check_unit("y", y)?;
    let (l, u) = tangent_lines(y_ref, z)?;
    Ok((l.eval(y), u.eval(y)))
}

/// A line `intercept + slope · y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

impl Line {
    pub fn eval(&self, y: f64) -> f64 {
        self.intercept + self.slope * y
    }

    fn constant(c: f64) -> Self {
        Line { intercept: c, slope: 0.0 }
    }
}

/// Lower and upper tangent lines of the clamped envelopes at `y_ref`.
pub fn tangent_lines(y_ref: f64, z: f64) -> Result<(Line, Line)> {
    let (gl, gu) = g_interval(y_ref, z)?;
    let (sm, sp) = g_prime(y_ref, z)?;
    let lower = if sm.is_finite() {
        Line { intercept: gl - sm * y_ref, slope: sm }
    } else {
        Line::constant(0.0)
    };
    let upper = if sp.is_finite() {
        Line { intercept: gu - sp * y_ref, slope: sp }
    } else {
        Line::constant(1.0)
    };
    Ok((lower, upper))
}

//! CSV tables.

use crate::config::RunConfig;
use qkdleak_core::KeyRatePoint;
use std::fmt::Write;

pub const COLUMNS: [&str; 10] = [
    "distance_km",
    "mu",
    "nu",
    "Q_muZ",
    "E_muZ",
    "Y1_lower",
    "eph1_upper",
    "lambda_EC",
    "rate",
    "status",
];

/// Nine significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

/// Resolved configuration as `# key = value` comment lines.
pub fn header(cfg: &RunConfig) -> String {
    cfg.resolved().iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
}

pub fn rates_csv(cfg: &RunConfig, points: &[KeyRatePoint]) -> String {
    let mut s = header(cfg);
    s.push_str(&COLUMNS.join(","));
    s.push('\n');
    for p in points {
        let cols = [
            p.distance_km,
            p.mu,
            p.nu,
            p.q_mu_z,
            p.e_mu_z,
            p.y1_lower,
            p.eph1_upper,
            p.lambda_ec,
            p.rate,
        ];
        for c in cols {
            s.push_str(&num(c));
            s.push(',');
        }
        s.push_str(p.status.as_str());
        s.push('\n');
    }
    s
}

/// Rate of `a` over rate of `b`; equal rates (including both zero) give 1.
pub fn ratio(a: f64, b: f64) -> f64 {
    if a == b { 1.0 } else { a / b }
}

pub fn compare_csv(a: &RunConfig, b: &RunConfig, pa: &[KeyRatePoint], pb: &[KeyRatePoint]) -> String {
    let mut s = String::new();
    for (tag, cfg) in [("a", a), ("b", b)] {
        for (k, v) in cfg.resolved() {
            let _ = writeln!(s, "# {tag}.{k} = {v}");
        }
    }
    s.push_str("distance_km,rate_a,rate_b,ratio,status_a,status_b\n");
    for (x, y) in pa.iter().zip(pb) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(x.distance_km),
            num(x.rate),
            num(y.rate),
            num(ratio(x.rate, y.rate)),
            x.status.as_str(),
            y.status.as_str()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.1), "1.00000000e-1");
        assert_eq!(num(123456789.4), "1.23456789e8");
        assert_eq!(num(0.0), "0.00000000e0");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(2.0, 1.0), 2.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
    }
}

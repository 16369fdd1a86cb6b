//! Properties of the Cauchy–Schwarz envelopes and their tangent lines.

use proptest::prelude::*;
use qkdleak_core::csbounds::{g_interval, g_plus_minus, g_prime, linearized_interval};

#[test]
fn envelope_examples() {
    let (m, p) = g_plus_minus(0.5, 0.5).unwrap();
    assert!(m.abs() < 1e-15 && (p - 1.0).abs() < 1e-15);
    let (m, p) = g_plus_minus(0.4, 0.9).unwrap();
    assert!((m - 0.126061).abs() < 1e-6 && (p - 0.713939).abs() < 1e-6);
    let (m, p) = g_prime(0.4, 0.9).unwrap();
    assert!((m - 0.677526).abs() < 1e-6 && (p - 0.922474).abs() < 1e-6);
    assert_eq!(g_interval(0.3, 0.5).unwrap().0, 0.0);
    assert_eq!(g_interval(0.5, 0.5).unwrap().1, 1.0);
    assert!((g_interval(1.0, 0.3).unwrap().0 - 0.3).abs() < 1e-15);
    assert_eq!(g_prime(0.3, 0.5).unwrap().0, 0.0);
    assert_eq!(g_prime(0.3, 1.0).unwrap(), (1.0, 1.0));
    assert!(g_interval(1.2, 0.5).is_err());
}

#[test]
fn envelope_symmetry_on_grid() {
    // If Y_γ lies in the interval generated by Y_ζ, the converse holds too.
    let k = 41;
    for iz in 0..=20 {
        let z = iz as f64 / 20.0;
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (i as f64 / (k - 1) as f64, j as f64 / (k - 1) as f64);
                let (lo, hi) = g_interval(a, z).unwrap();
                if b >= lo + 1e-12 && b <= hi - 1e-12 {
                    let (lo2, hi2) = g_interval(b, z).unwrap();
                    assert!(a >= lo2 - 1e-9 && a <= hi2 + 1e-9, "z={z}, ({a}, {b})");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn tangents_are_sound(y_ref in 0.0f64..=1.0, z in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let (lo, hi) = linearized_interval(y_ref, z, y).unwrap();
        let (gl, gu) = g_interval(y, z).unwrap();
        prop_assert!(lo <= gl + 1e-12, "lower {lo} above G- {gl}");
        prop_assert!(hi >= gu - 1e-12, "upper {hi} below G+ {gu}");
    }

    #[test]
    fn tangent_touches_at_reference(y in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        let (lo, hi) = linearized_interval(y, z, y).unwrap();
        let (gl, gu) = g_interval(y, z).unwrap();
        // Away from the endpoints the tangent passes through the envelope.
        if y * (1.0 - y) > 1e-6 {
            prop_assert!((lo - gl).abs() < 1e-12 && (hi - gu).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_is_ordered(y in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        let (lo, hi) = g_interval(y, z).unwrap();
        prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        let (a, b) = linearized_interval(y, 1.0, y).unwrap();
        prop_assert!((a - y).abs() < 1e-15 && (b - y).abs() < 1e-15);
    }
}

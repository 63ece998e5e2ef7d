use ckn_core::params::{
    derive, f_curve, f_curve_spectral_form, felli_schneider, felli_schneider_star, h_curve, mu3_closed, ParamPoint,
};
use ckn_core::{Model, Region};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// A valid point `(a, a + s)` with `s` kept a little inside `(0, 1)`.
fn any_point() -> impl Strategy<Value = ParamPoint> {
    (-10.0..-0.01f64, 1e-3..0.999f64).prop_map(|(a, s)| ParamPoint::new(a, a + s).unwrap())
}

proptest! {
    #![proptest_config(cfg(1000))]

    #[test]
    fn curves_are_ordered_and_f_vanishes_on_the_lower_one(a in -10.0..-0.01f64) {
        let lo = felli_schneider(a).unwrap();
        let hi = felli_schneider_star(a).unwrap();
        prop_assert!(a < lo && lo < hi && hi < a + 1.0, "a={a} lo={lo} hi={hi}");
        prop_assert!(f_curve(a, lo).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn f_increases_and_h_decreases(a in -10.0..-0.01f64, s1 in 1e-3..0.999f64, s2 in 1e-3..0.999f64) {
        prop_assume!((s1 - s2).abs() > 1e-9);
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let (b1, b2) = (a + lo, a + hi);
        prop_assert!(f_curve(a, b1).unwrap() < f_curve(a, b2).unwrap());
        prop_assert!(h_curve(a, b1).unwrap() > h_curve(a, b2).unwrap());
    }

    #[test]
    fn extremal_amplitude_identity(p in any_point()) {
        let d = derive(p).unwrap();
        if !d.c_ab.is_normal() {
            // Out of floating-point range: the log of the closed form is far
            // outside [-708, 709], and no model can be built on it.
            let ln_c = (d.k - 2.0) / 4.0 * (d.k * (d.k - 2.0) / (d.tau * d.tau)).ln();
            prop_assert!(!(-708.0..709.0).contains(&ln_c), "ln C_ab = {ln_c}");
            prop_assert!(Model::new(p).is_err());
            return Ok(());
        }
        let lhs = d.tau * d.tau * (d.q - 1.0) * d.c_ab.powf(d.q - 2.0);
        let rhs = d.k * (d.k + 2.0);
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn both_forms_of_f_agree(p in any_point()) {
        let f1 = f_curve(p.a, p.b).unwrap();
        let f2 = f_curve_spectral_form(p.a, p.b).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-12 * f1.abs().max(1.0), "{f1} vs {f2}");
    }

    #[test]
    fn lower_curve_is_classified_on_it(a in -10.0..-0.01f64) {
        let b = felli_schneider(a).unwrap();
        let d = derive(ParamPoint::new(a, b).unwrap()).unwrap();
        prop_assert_eq!(d.region, Region::OnFS);
        // tau^2 - (K - 1) changes sign across the curve.
        let gap = |b: f64| {
            let d = derive(ParamPoint::new(a, b).unwrap()).unwrap();
            d.tau * d.tau - (d.k - 1.0)
        };
        let w = 1e-3 * (a + 1.0 - b).min(b - a);
        prop_assert!(gap(b - w) < 0.0 && gap(b + w) > 0.0);
    }

    #[test]
    fn third_eigenvalue_exceeds_q_minus_one(p in any_point()) {
        let d = derive(p).unwrap();
        match mu3_closed(p) {
            Ok(mu3) => {
                prop_assert!(matches!(d.region, Region::StrictInterior | Region::AtOrAboveFSStar));
                prop_assert!(mu3 > d.q - 1.0, "mu3={mu3} q-1={}", d.q - 1.0);
            }
            Err(_) => prop_assert!(matches!(d.region, Region::BelowFS | Region::OnFS)),
        }
    }
}

//! Worked examples of the projection, distance and quotient functionals.

use ckn_core::params::stability_upper_bound;
use ckn_core::profiles::grad_norm_sq;
use ckn_core::spectrum::{third_eigenfunction, GridConfig};
use ckn_core::stability::{
    default_fit_window, degenerate_direction, degenerate_sequence, deficit_report, dist_direct, dist_to_manifold,
    fit_expansion, m_of, pair_with_bubble, two_bubble, Quantity,
};
use ckn_core::{HarmonicFunction, Model, ParamPoint};

fn reference() -> Model {
    Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap()
}

fn on_curve() -> Model {
    Model::new(ParamPoint::new(-1.0, -0.2928932).unwrap()).unwrap()
}

#[test]
fn projection_sees_only_the_radial_part() {
    let m = on_curve();
    let z1 = degenerate_direction(&m).unwrap();
    let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
    let mixed = u.add_scaled(0.3, &z1).unwrap();
    for lambda in [0.1, 0.7, 1.0, 4.0] {
        assert_eq!(pair_with_bubble(&mixed, lambda).unwrap(), pair_with_bubble(&u, lambda).unwrap());
    }
    let (m0, arg) = m_of(&z1.scaled(0.1)).unwrap();
    assert_eq!(m0, 0.0);
    assert!(arg.is_none());
}

#[test]
fn members_of_the_manifold_have_zero_distance() {
    let m = reference();
    let f = HarmonicFunction::radial(&m, m.bubble_u(2.0).unwrap()).scaled(3.0);
    let g = grad_norm_sq(&f).unwrap();
    assert!(dist_to_manifold(&f).unwrap() <= 1e-6 * g.sqrt());
    assert!(deficit_report(&f).unwrap().e.is_none());
    let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
    assert!(dist_direct(&u).unwrap() <= 1e-6 * grad_norm_sq(&u).unwrap().sqrt());
}

#[test]
fn distance_along_the_degenerate_direction() {
    let m = on_curve();
    let z1 = degenerate_direction(&m).unwrap();
    let zn = grad_norm_sq(&z1).unwrap().sqrt();
    let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
    let f = u.add_scaled(0.1, &z1).unwrap();
    assert!((dist_to_manifold(&f).unwrap() / (0.1 * zn) - 1.0).abs() < 1e-6);
    let seq = degenerate_sequence(&m, &[0.2, 0.1, 0.05, 0.025]).unwrap();
    assert!(seq.windows(2).all(|w| w[1].1 < w[0].1));
    // Roughly quadratic decay in eps.
    let rate = (seq[2].1 / seq[3].1).log2();
    assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
}

#[test]
fn distance_along_the_third_eigenfunction() {
    let m = reference();
    let e3 = third_eigenfunction(&m, &GridConfig::default()).unwrap();
    let en = grad_norm_sq(&e3).unwrap().sqrt();
    let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
    let f = u.add_scaled(0.01, &e3).unwrap();
    assert!((dist_direct(&f).unwrap() / (0.01 * en) - 1.0).abs() < 1e-5);
    let r = deficit_report(&f).unwrap();
    let bound = stability_upper_bound(m.point()).unwrap();
    assert!((r.e.unwrap() - bound).abs() < 1e-4);
}

#[test]
fn two_bubble_energy_is_bilinear() {
    let m = reference();
    let s = m.best_constant().unwrap();
    let lambda = 1e-3;
    let u = two_bubble(&m, lambda).unwrap();
    let b = HarmonicFunction::radial(&m, m.normalized_bubble(1.0).unwrap());
    let bl = HarmonicFunction::radial(&m, m.normalized_bubble(lambda).unwrap());
    let cross = ckn_core::profiles::grad_inner(&b, &bl).unwrap();
    assert!((grad_norm_sq(&u).unwrap() / (2.0 * s + 2.0 * cross) - 1.0).abs() < 1e-12);
    assert!((dist_to_manifold(&u).unwrap() / dist_direct(&u).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn two_bubble_fits_share_one_overlap_constant() {
    let m = reference();
    let s = m.best_constant().unwrap();
    let window = default_fit_window();
    let grad = fit_expansion(&m, Quantity::GradSq, &window).unwrap();
    let star = fit_expansion(&m, Quantity::StarSq, &window).unwrap();
    assert!((grad.limit / (2.0 * s) - 1.0).abs() < 1e-3);
    let two_q = 2f64.powf(2.0 / m.q());
    assert!((star.limit / two_q - 1.0).abs() < 1e-3);
    // Both leading coefficients carry the same overlap constant.
    let ratio = star.coefficient / grad.coefficient;
    assert!((ratio / (two_q / s) - 1.0).abs() < 0.05, "ratio {ratio}");
    // The distance tends to S with no term at the leading rate.
    let r = deficit_report(&two_bubble(&m, 1e-9).unwrap()).unwrap();
    assert!((r.dist_sq / s - 1.0).abs() < 1e-3);
}

//! The demo operations as the page calls them, exercised natively.

use mfglab_demo::{anticoncentration_impl, divergence_curve_impl, eval_expression_impl};

#[test]
fn default_page_expression_evaluates() {
    let v = eval_expression_impl("min(1, max(0, 4 * mu(sR))) + 0.5 * mu(sL)", "sL, sR", "0.8, 0.2").unwrap();
    assert!((v - 1.2).abs() < 1e-12);
}

#[test]
fn anticoncentration_curve_stays_above_one_twentieth() {
    let v = anticoncentration_impl(200, 0.5).unwrap();
    assert_eq!(v.len(), 200);
    assert!(v.iter().all(|&p| (0.05..=1.0).contains(&p)));
    assert!(anticoncentration_impl(0, 0.5).is_err());
}

#[test]
fn divergence_curve_is_seeded_and_sized() {
    let a = divergence_curve_impl(500, 6, 20, 3).unwrap();
    let b = divergence_curve_impl(500, 6, 20, 3).unwrap();
    assert_eq!(a.means(), b.means());
    assert_eq!(a.means().len(), a.stderrs().len());
    assert!(a.exact_initial().is_finite());
    assert!(divergence_curve_impl(500, 0, 20, 3).is_err());
    assert!(divergence_curve_impl(500, 6, 0, 3).is_err());
}

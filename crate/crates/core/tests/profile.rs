use hbvp::profile::{build_g, solve_profile_w, CoefficientFamily, LowerBarrier, UpperBarrier};
use hbvp::quadrature::integrate;
use hbvp::sector::{ell, solve_sector};
use hbvp::{ConvexDomain, Point};
use proptest::prelude::*;

#[test]
fn chaplygin_g_has_closed_form() {
    let g = build_g(&CoefficientFamily::chaplygin(), 5.0, 2000).unwrap();
    for k in 0..=100 {
        let r = 0.05 * k as f64;
        assert!((g.eval(r).unwrap() - 0.25 * (1.0 + r * r).ln()).abs() <= 1e-10);
    }
}

#[test]
fn xbar_matches_independent_quadrature() {
    // w = 1 − s² removes the endpoint singularity.
    let est = integrate(
        |s: f64| {
            let w = 1.0 - s * s;
            2.0 * w * w / ((1.0 + w) * (1.0 + w * w)).sqrt()
        },
        0.0,
        1.0,
        1e-14,
        1e-13,
        200,
    );
    assert!(est.converged);
    let prof = solve_profile_w(&CoefficientFamily::chaplygin()).unwrap();
    assert!((prof.xbar() - est.value).abs() <= 1e-6, "{} vs {}", prof.xbar(), est.value);
    assert!((est.value - 0.59907).abs() <= 1e-5);
}

#[test]
fn profile_is_symmetric_and_positive() {
    let prof = solve_profile_w(&CoefficientFamily::minimal_surface_scaled(2.0)).unwrap();
    for k in 1..20 {
        let t = k as f64 / 20.0;
        assert!(prof.value(t) > 0.0);
        assert!((prof.value(t) - prof.value(1.0 - t)).abs() <= 1e-8);
    }
}

#[test]
fn barriers_bracket_on_the_square() {
    let c = CoefficientFamily::chaplygin();
    let prof = solve_profile_w(&c).unwrap();
    let sq = ConvexDomain::unit_square();
    let up = UpperBarrier::new(&sq, &prof, 64);
    let lo = LowerBarrier::new(&sq, &c);
    for k in 1..10 {
        let p = Point::new(0.1 * k as f64, 0.37);
        assert!(lo.eval(p).unwrap() <= up.eval(p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ell_is_increasing(a in -12.0..12.0f64, gap in 0.05..3.0f64) {
        let (c1, c2) = (10f64.powf(a / 2.0), 10f64.powf((a + gap) / 2.0));
        prop_assert!(ell(c1).unwrap() < ell(c2).unwrap());
    }
}

#[test]
fn sector_round_trip() {
    for alpha in [0.4, 1.0, std::f64::consts::FRAC_PI_2, 2.5] {
        let sol = solve_sector(alpha).unwrap();
        assert!((2.0 * sol.ell - alpha).abs() <= 1e-10);
        let again = solve_sector(2.0 * ell(sol.c).unwrap()).unwrap();
        assert!((again.c - sol.c).abs() <= 1e-8 * sol.c);
    }
}

#[test]
fn invalid_apertures_are_rejected() {
    assert!(solve_sector(0.0).is_err());
    assert!(solve_sector(std::f64::consts::PI).is_err());
}

use geoproj::expr::ScalarField;
use geoproj::integrals::{
    check_conservation, darboux_integral, energy, independence, liouville_integral, liouville_integral_variant,
    metric_from_integral, ConservationOptions, LiouvilleVariant, INDEPENDENCE_TOL,
};
use geoproj::zoo::{self, band_metric, liouville_metric, BandMetricSpec, ZooParams};
use proptest::prelude::*;

fn band_pair() -> (geoproj::metric::MetricChart, geoproj::metric::MetricChart) {
    let spec = BandMetricSpec::new(zoo::default_profile(), [f64::NEG_INFINITY, f64::INFINITY], 2.0, 0.3);
    (band_metric(&spec).unwrap(), band_metric(&spec.base()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn darboux_of_a_constant_multiple_is_a_multiple_of_energy(
        c in prop::sample::select(vec![8.0, 0.125, 27.0, -8.0]),
        px in -0.9f64..0.9, py in -0.9f64..0.9, vx in -1.0f64..1.0, vy in -1.0f64..1.0,
    ) {
        let g = zoo::punctured_plane_family(1.0, 0.5).unwrap().0;
        let d = darboux_integral(&g, &g.scaled(c)).unwrap();
        let want = c.cbrt().recip() * g.metric_eval([px + 1.5, py], [vx, vy], [vx, vy]).unwrap();
        let got = d.value([px + 1.5, py], [vx, vy]);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

#[test]
fn darboux_scaling_by_eight_halves_energy() {
    let g = zoo::sphere();
    let d = darboux_integral(&g, &g.scaled(8.0)).unwrap();
    let e = energy(&g);
    for p in g.sample_box().grid(4) {
        let v = [0.3, -0.7];
        assert!((d.value(p, v) - 0.5 * e.value(p, v)).abs() < 1e-14);
    }
}

#[test]
fn metric_from_darboux_integral_recovers_the_partner() {
    let (g, gbar) = band_pair();
    let d = darboux_integral(&g, &gbar).unwrap();
    let back = metric_from_integral(&g, &d, "recovered").unwrap();
    assert_eq!(back.signature(), gbar.signature());
    for p in g.sample_box().grid(6) {
        let (a, b) = (back.coeffs_unchecked(p), gbar.coeffs_unchecked(p));
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-10 * (1.0 + b[i].abs()), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn metric_from_integral_rejects_non_quadratic_input() {
    let (g, _) = band_pair();
    let c = geoproj::integrals::clairaut(&g, &[ScalarField::zero(), ScalarField::one()]).unwrap();
    assert!(metric_from_integral(&g, &c, "x").is_err());
}

#[test]
fn band_integrals_are_conserved_and_independent() {
    let e = zoo::entry("band", &ZooParams::default()).unwrap();
    let opts = ConservationOptions { n_samples: 10, seed: 3, ..Default::default() };
    for i in &e.integrals {
        let r = check_conservation(&e.chart, i, &opts).unwrap();
        assert!(r.pass, "{}: {:e}", i.name, r.max_drift);
    }
    let (en, dar) = (&e.integrals[0], &e.integrals[2]);
    let indep = e.chart.sample_box().grid(5).iter().map(|&p| independence(en, dar, p, [0.4, 0.9])).fold(0.0, f64::max);
    assert!(indep > INDEPENDENCE_TOL);
    assert!(independence(en, &en.scale(3.0), [0.1, 0.2], [0.4, 0.9]) < 1e-20);
}

#[test]
fn liouville_variants_separate() {
    let (h1, h2) = zoo::liouville_instance();
    for sign in [1.0, -1.0] {
        let m = liouville_metric(&h1, &h2, sign, Some(1.0)).unwrap();
        let opts = ConservationOptions { n_samples: 12, seed: 11, t_max: 3.0, ..Default::default() };
        let std = check_conservation(&m, &liouville_integral(&h1, &h2, sign), &opts).unwrap();
        assert!(std.pass, "sign {sign}: {:e}", std.max_drift);
        let sw = liouville_integral_variant(&h1, &h2, sign, LiouvilleVariant::SwappedArguments);
        let swapped = check_conservation(&m, &sw, &opts).unwrap();
        assert!(swapped.max_drift > 1e-3, "sign {sign}: {:e}", swapped.max_drift);
    }
}

#[test]
fn constant_profiles_still_give_a_second_integral() {
    let (h1, h2) = (ScalarField::constant(2.0), ScalarField::constant(3.0));
    let m = liouville_metric(&h1, &h2, 1.0, None).unwrap();
    let i = liouville_integral(&h1, &h2, 1.0);
    let e = energy(&m);
    for p in m.sample_box().grid(3) {
        assert!(independence(&e, &i, p, [0.6, 0.8]) > INDEPENDENCE_TOL);
    }
    assert!(liouville_metric(&h1, &h2, 0.5, None).is_err());
}

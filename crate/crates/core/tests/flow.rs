use std::f64::consts::PI;

use geoproj::flow::{
    detect_closure, find_conjugate_points, integrate_geodesic, integrate_jacobi, ClosureOptions, GeodesicOptions,
    GeodesicState, JacobiState, Termination,
};
use geoproj::sampling::normalize;
use geoproj::zoo;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn geodesics_retrace_when_reversed(
        name in prop::sample::select(vec!["sphere", "liouville", "band", "tannery-deformed"]),
        u in 0.1f64..0.9, w in 0.1f64..0.9, ang in 0.0f64..(2.0 * PI),
    ) {
        let e = zoo::entry(name, &Default::default()).unwrap();
        let sb = e.chart.sample_box();
        let p = [sb.x[0] + u * (sb.x[1] - sb.x[0]), sb.y[0] + w * (sb.y[1] - sb.y[0])];
        let s0 = GeodesicState::new(p, [ang.cos(), ang.sin()]);
        let opts = GeodesicOptions::default();
        let fwd = integrate_geodesic(&e.chart, s0, 1.5, &opts).unwrap();
        prop_assume!(fwd.termination == Termination::TimeLimit);
        let back = integrate_geodesic(&e.chart, fwd.end().reversed(), 1.5, &opts).unwrap();
        prop_assume!(back.termination == Termination::TimeLimit);
        let z = back.end();
        prop_assert!((z.x - p[0]).hypot(z.y - p[1]) < 1e-6);
        prop_assert!((z.vx + s0.vx).hypot(z.vy + s0.vy) < 1e-6);
    }

    /// The linearized flow against a central difference of nearby geodesics.
    #[test]
    fn jacobi_fields_match_geodesic_variations(
        wx in -1.0f64..1.0, wy in -1.0f64..1.0, ang in 0.0f64..(2.0 * PI),
    ) {
        let (m, _) = zoo::punctured_plane_family(1.0, 0.5).unwrap();
        let p = [1.1, 0.8];
        let v = [ang.cos(), ang.sin()];
        let t_max = 1.0;
        let opts = GeodesicOptions::default();
        let base = integrate_geodesic(&m, GeodesicState::new(p, v), t_max, &opts).unwrap();
        prop_assume!(base.termination == Termination::TimeLimit);
        let eps = 1e-5;
        let shot = |s: f64| integrate_geodesic(&m, GeodesicState::new(p, [v[0] + s * wx, v[1] + s * wy]), t_max, &opts).unwrap();
        let (plus, minus) = (shot(eps), shot(-eps));
        prop_assume!(plus.termination == Termination::TimeLimit && minus.termination == Termination::TimeLimit);
        let j0 = JacobiState { base: *base.start(), j: [0.0, 0.0], dj: [wx, wy] };
        let field = integrate_jacobi(&m, &base, j0, &opts).unwrap();
        let last = field.last().unwrap();
        let (a, b) = (plus.position_at(last.base.t), minus.position_at(last.base.t));
        let fd = [(a[0] - b[0]) / (2.0 * eps), (a[1] - b[1]) / (2.0 * eps)];
        let scale = 1.0 + fd[0].hypot(fd[1]);
        prop_assert!((last.j[0] - fd[0]).hypot(last.j[1] - fd[1]) < 1e-5 * scale, "{:?} vs {:?}", last.j, fd);
    }
}

#[test]
fn sphere_great_circles_close_with_period_two_pi() {
    let s = zoo::sphere();
    for (p, v) in [([PI / 2.0, 0.0], [0.0, 1.0]), ([1.0, 2.0], [0.3, -0.5])] {
        let v = normalize(&s, p, v).unwrap();
        let out = detect_closure(&s, GeodesicState::new(p, v), 10.0, &ClosureOptions::default()).unwrap();
        assert!((out.period().unwrap() - 2.0 * PI).abs() < 1e-6, "{out:?}");
    }
}

#[test]
fn sphere_conjugate_points_at_multiples_of_pi() {
    let s = zoo::sphere();
    let scan = find_conjugate_points(&s, GeodesicState::new([1.2, 0.0], normalize(&s, [1.2, 0.0], [1.0, 0.4]).unwrap()), 7.0, &Default::default()).unwrap();
    assert_eq!(scan.times.len(), 2);
    assert!((scan.times[0] - PI).abs() < 1e-6);
    assert!((scan.times[1] - 2.0 * PI).abs() < 1e-6);
}

#[test]
fn clifton_pohl_radial_null_line_is_incomplete() {
    let (m, _) = zoo::clifton_pohl();
    let t = integrate_geodesic(&m, GeodesicState::new([1.0, 0.0], [1.0, 0.0]), 100.0, &Default::default()).unwrap();
    assert_ne!(t.termination, Termination::TimeLimit);
    assert!(t.duration() < 100.0);
}

#[test]
fn deformed_tannery_spacelike_geodesics_stay_in_the_band() {
    let e = zoo::entry("tannery-deformed", &Default::default()).unwrap();
    let starts = geoproj::sampling::sample_states(&e.chart, 10, 5, geoproj::sampling::CausalFilter::Spacelike).unwrap();
    for s0 in starts {
        let t = integrate_geodesic(&e.chart, s0, 20.0, &Default::default()).unwrap();
        assert_eq!(t.termination, Termination::TimeLimit);
        assert!(t.samples.iter().all(|s| s.x > PI / 4.0 && s.x < 3.0 * PI / 4.0));
    }
}

#[test]
fn bad_starts_are_rejected() {
    let s = zoo::sphere();
    assert!(integrate_geodesic(&s, GeodesicState::new([-1.0, 0.0], [1.0, 0.0]), 1.0, &Default::default()).is_err());
    assert!(integrate_geodesic(&s, GeodesicState::new([1.0, 0.0], [1.0, 0.0]), -1.0, &Default::default()).is_err());
    assert!(find_conjugate_points(&s, GeodesicState::new([1.0, 0.0], [0.0, 0.0]), 1.0, &Default::default()).is_err());
}

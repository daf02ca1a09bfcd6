use geoproj::expr::ScalarField;
use geoproj::integrals::liouville_integral;
use geoproj::metric::{pullback, ChartMap};
use geoproj::projective::{
    check_affinity, check_isometry, check_projective_equivalence, hausdorff, liouville_isometry_search,
    preservation_defect, EquivalenceOptions, MapCheckOptions, Orientation, Verdict,
};
use geoproj::zoo::{self, band_metric, liouville_metric, shifted_metric, BandMetricSpec, ShiftedSpec};
use proptest::prelude::*;

fn band_pair(f: ScalarField) -> (geoproj::metric::MetricChart, geoproj::metric::MetricChart) {
    let spec = BandMetricSpec::new(f, [f64::NEG_INFINITY, f64::INFINITY], 2.0, 0.3);
    (band_metric(&spec).unwrap(), band_metric(&spec.base()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hausdorff_is_symmetric_and_translation_bounded(
        pts in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 1..20),
        dx in -0.5f64..0.5, dy in -0.5f64..0.5,
    ) {
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + dx, p[1] + dy]).collect();
        let (a, b) = (hausdorff(&pts, &moved), hausdorff(&moved, &pts));
        prop_assert_eq!(a, b);
        prop_assert!(a <= dx.hypot(dy) + 1e-15);
        prop_assert_eq!(hausdorff(&pts, &pts), 0.0);
    }
}

#[test]
fn band_verdict_is_symmetric() {
    let (g, gbar) = band_pair(zoo::default_profile());
    let opts = EquivalenceOptions { seed: 4, ..Default::default() };
    let ab = check_projective_equivalence(&g, &gbar, &opts).unwrap();
    let ba = check_projective_equivalence(&gbar, &g, &opts).unwrap();
    assert_eq!(ab.verdict, Verdict::Equivalent);
    assert_eq!(ba.verdict, Verdict::Equivalent);
}

#[test]
fn mismatched_profiles_are_not_equivalent() {
    let (g, _) = band_pair(zoo::default_profile());
    let (_, other) = band_pair((std::f64::consts::PI * ScalarField::x()).cos().square() + 0.5);
    let r = check_projective_equivalence(&g, &other, &EquivalenceOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::NotEquivalent);
}

#[test]
fn shifted_tau_is_projective_but_not_affine() {
    let s = shifted_metric(&ShiftedSpec::standard()).unwrap();
    let pb = pullback(&s.chart, &s.tau);
    let eq = check_projective_equivalence(&s.chart, &pb, &EquivalenceOptions { seed: 9, ..Default::default() }).unwrap();
    assert_eq!(eq.verdict, Verdict::Equivalent);
    let opts = MapCheckOptions::default();
    assert!(!check_isometry(&s.chart, &s.tau, &opts).unwrap().holds);
    let aff = check_affinity(&s.chart, &s.tau, &opts).unwrap();
    assert!(!aff.holds);
    assert_eq!(aff.proportional, Some(false));
}

#[test]
fn translations_are_isometries_of_flat_space() {
    let flat = zoo::flat();
    let opts = MapCheckOptions::default();
    let t = ChartMap::translation(0.3, -1.7);
    assert!(check_isometry(&flat, &t, &opts).unwrap().holds);
    let s = ChartMap::affine("stretch", [[2.0, 0.0], [0.0, 0.5]], [0.0, 0.0]);
    assert!(check_isometry(&flat, &s, &opts).unwrap().holds);
    let h = ChartMap::affine("scale", [[2.0, 0.0], [0.0, 2.0]], [0.0, 0.0]);
    let r = check_isometry(&flat, &h, &opts).unwrap();
    assert!(!r.holds);
    let a = check_affinity(&flat, &h, &opts).unwrap();
    assert!(a.holds);
    assert_eq!(a.proportional, Some(true));
}

#[test]
fn liouville_swap_is_found_and_flips_the_integral() {
    let (h1, h2) = zoo::liouville_instance();
    let res = liouville_isometry_search(&h1, &h2, 1.0, 400);
    assert!(res.found && !res.degenerate);
    assert_eq!(res.orientation, Orientation::Swap);
    assert!((res.k - 0.25).abs() < 1e-6, "{}", res.k);
    let m = liouville_metric(&h1, &h2, 1.0, Some(1.0)).unwrap();
    let phi = res.map();
    assert!(check_isometry(&m, &phi, &MapCheckOptions { tol: 1e-7, grid: 12 }).unwrap().holds);
    let i = liouville_integral(&h1, &h2, 1.0);
    assert!(preservation_defect(&i, &phi, &m, 8) > 1e-3);
}

#[test]
fn liouville_search_rejects_unrelated_profiles() {
    let h1 = 2.0 + (2.0 * std::f64::consts::PI * ScalarField::x()).sin();
    let h2 = 3.0 + 0.5 * (4.0 * std::f64::consts::PI * ScalarField::x()).cos();
    assert!(!liouville_isometry_search(&h1, &h2, 1.0, 200).found);
}

#[test]
fn liouville_search_marks_constant_profiles_degenerate() {
    let res = liouville_isometry_search(&ScalarField::constant(1.0), &ScalarField::constant(4.0), 1.0, 100);
    assert!(res.degenerate);
}

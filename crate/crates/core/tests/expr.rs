use geoproj::expr::{parse_infix, parse_prefix, ScalarField, Tape};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = ScalarField> {
    prop_oneof![
        Just(ScalarField::x()),
        Just(ScalarField::y()),
        (-2.0f64..2.0).prop_map(ScalarField::constant),
    ]
}

fn field() -> impl Strategy<Value = ScalarField> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| (0.3 * a).exp()),
            inner.prop_map(|a| a.square()),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn mixed_partials_commute(f in field(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let a = f.dx().dy().value(x, y);
        let b = f.dy().dx().value(x, y);
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn derivative_matches_central_difference(f in field(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let h = 1e-5;
        let fd_x = (f.value(x + h, y) - f.value(x - h, y)) / (2.0 * h);
        let fd_y = (f.value(x, y + h) - f.value(x, y - h)) / (2.0 * h);
        let scale = 1.0 + f.value(x, y).abs() + f.dx().dx().value(x, y).abs() + f.dy().dy().value(x, y).abs();
        prop_assert!((f.dx().value(x, y) - fd_x).abs() <= 1e-5 * scale);
        prop_assert!((f.dy().value(x, y) - fd_y).abs() <= 1e-5 * scale);
    }

    #[test]
    fn display_round_trips_through_prefix(f in field(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let g = parse_prefix(&f.to_string()).unwrap();
        prop_assert!(close(f.value(x, y), g.value(x, y), 1e-12));
    }

    #[test]
    fn tape_agrees_with_tree(f in field(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let d = f.dx();
        let out = Tape::new(&[f.clone(), d.clone()]).eval(x, y);
        prop_assert!(close(out[0], f.value(x, y), 1e-14));
        prop_assert!(close(out[1], d.value(x, y), 1e-14));
    }
}

#[test]
fn infix_and_prefix_agree() {
    let a = parse_infix("sin^2(pi x) + 2 x y / (1 + y^2)").unwrap();
    let b = parse_prefix("(+ (^ (sin (* pi x)) 2) (/ (* 2 x y) (+ 1 (^ y 2))))").unwrap();
    for (x, y) in [(0.1, 0.2), (-0.7, 1.3), (2.0, -0.4)] {
        assert!(close(a.value(x, y), b.value(x, y), 1e-15));
    }
}

#[test]
fn smooth_step_is_flat_at_the_ends() {
    let s = ScalarField::x().smooth_step();
    assert_eq!(s.value(-0.5, 0.0), 0.0);
    assert_eq!(s.value(1.5, 0.0), 1.0);
    assert!((s.value(0.5, 0.0) - 0.5).abs() < 1e-15);
    for d in [s.dx(), s.dx().dx()] {
        assert!(d.value(1e-3, 0.0).abs() < 1e-12);
        assert!(d.value(1.0 - 1e-3, 0.0).abs() < 1e-12);
    }
}

#[test]
fn parse_errors_carry_offsets() {
    assert!(parse_prefix("(+ x").is_err());
    assert!(parse_infix("sin(").is_err());
    assert!(ScalarField::parse("frob(x)").is_err());
}

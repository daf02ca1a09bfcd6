use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::metric::{MetricChart, Signature};

/// `(h1(x) + h2(y)) (dx² + s dy²)` with `s = ±1`; `h1` and `h2` are given
/// as functions of `x`. `period` is declared in both coordinates.
pub fn liouville_metric(h1: &ScalarField, h2: &ScalarField, sign: f64, period: Option<f64>) -> Result<MetricChart> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!("sign must be ±1, got {sign}")));
    }
    let conf = h1 + &h2.in_y();
    let side = period.unwrap_or(1.0);
    let sb = Rect::new([0.0, side], [0.0, side]);
    for p in sb.grid(40) {
        let c = conf.value(p[0], p[1]);
        let ok = if sign > 0.0 { c > 0.0 } else { c != 0.0 && c.is_finite() };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "conformal factor h1 + h2 = {c:.4e} at ({:.4}, {:.4})",
                p[0], p[1]
            )));
        }
    }
    let sig = if sign > 0.0 { Signature::Riemannian } else { Signature::Lorentzian };
    Ok(
        MetricChart::new("liouville", [conf.clone(), ScalarField::zero(), &conf * sign], sig)
            .with_sample_box(sb)
            .with_periods([period, period]),
    )
}

/// `h1 = 2 + sin(4πx)`, `h2 = 5 − sin(4πx)`.
pub fn liouville_instance() -> (ScalarField, ScalarField) {
    let s = (4.0 * std::f64::consts::PI * ScalarField::x()).sin();
    (2.0 + &s, 5.0 - &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profiles_are_flat() {
        let m = liouville_metric(&ScalarField::constant(1.0), &ScalarField::constant(2.0), 1.0, None).unwrap();
        assert!(m.gaussian_curvature([0.3, 0.4]).unwrap().abs() < 1e-15);
        assert!(liouville_metric(&ScalarField::constant(-1.0), &ScalarField::zero(), 1.0, None).is_err());
    }

    #[test]
    fn instance_is_riemannian_and_periodic() {
        let (h1, h2) = liouville_instance();
        let m = liouville_metric(&h1, &h2, 1.0, Some(1.0)).unwrap();
        assert!(m.check_signature(50).is_ok());
        let a = m.coeffs_at([0.2, 0.7]).unwrap();
        let b = m.coeffs_at([1.2, -0.3]).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
    }
}

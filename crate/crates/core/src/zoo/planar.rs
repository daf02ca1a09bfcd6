use crate::domain::{Domain, Rect};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::integrals::{clairaut, energy, metric_from_integral};
use crate::metric::{MetricChart, Signature};
use crate::VectorField;

/// Symmetric 2×2 matrix as `[m11, m12, m22]`.
pub type Mat = [f64; 3];

/// `a [[ℓ/(1+ℓz)², 1/(1+ℓz)], [1/(1+ℓz), z/(1+ℓz)]]`.
pub fn g_matrix(a: f64, l: f64, z: f64) -> Mat {
    let d = 1.0 + l * z;
    [a * l / (d * d), a / d, a * z / d]
}

/// `a²/(1+ℓz)² [[1, z], [z, z²]]`.
pub fn q_matrix(a: f64, l: f64, z: f64) -> Mat {
    let d = 1.0 + l * z;
    let s = a * a / (d * d);
    [s, s * z, s * z * z]
}

fn det(m: &Mat) -> f64 {
    m[0] * m[2] - m[1] * m[1]
}

/// Both sides of `β(G_{a,ℓ} + μ Q_{a,ℓ}) = (det G_{a,ℓ} / det G_{b,m})^{2/3} G_{b,m}`
/// with `b = aβ⁻³`, `m = ℓ + μa`.
pub fn matrix_identity_sides(a: f64, l: f64, z: f64, mu: f64, beta: f64) -> Result<(Mat, Mat)> {
    let m = l + mu * a;
    if a == 0.0 || beta == 0.0 {
        return Err(Error::Precondition("a and β must be nonzero".into()));
    }
    if 1.0 + l * z == 0.0 || 1.0 + m * z == 0.0 {
        return Err(Error::Precondition(format!("1+ℓz or 1+mz vanishes at z = {z}")));
    }
    let b = a / beta.powi(3);
    let g = g_matrix(a, l, z);
    let q = q_matrix(a, l, z);
    let lhs = [0, 1, 2].map(|i| beta * (g[i] + mu * q[i]));
    let gbm = g_matrix(b, m, z);
    let w = (det(&g) / det(&gbm)).cbrt().powi(2);
    let rhs = gbm.map(|e| w * e);
    Ok((lhs, rhs))
}

/// Largest entry difference of the two sides, relative to the largest entry.
pub fn matrix_identity_check(a: f64, l: f64, z: f64, mu: f64, beta: f64) -> Result<f64> {
    let (lhs, rhs) = matrix_identity_sides(a, l, z, mu, beta)?;
    let scale = lhs.iter().chain(&rhs).fold(0.0f64, |s, e| s.max(e.abs()));
    let diff = (0..3).fold(0.0f64, |s, i| s.max((lhs[i] - rhs[i]).abs()));
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Profile `f` on an interval and parameters of the family
/// `aℓ/(1+ℓf)² dx² + 2a/(1+ℓf) dxdy + af/(1+ℓf) dy²`.
#[derive(Clone, Debug)]
pub struct BandMetricSpec {
    pub f: ScalarField,
    pub interval: [f64; 2],
    pub a: f64,
    pub l: f64,
}

impl BandMetricSpec {
    pub fn new(f: ScalarField, interval: [f64; 2], a: f64, l: f64) -> Self {
        BandMetricSpec { f, interval, a, l }
    }

    /// The base member `2dxdy + f dy²`.
    pub fn base(&self) -> Self {
        BandMetricSpec {
            a: 1.0,
            l: 0.0,
            ..self.clone()
        }
    }

    fn sample_xs(&self) -> Vec<f64> {
        let [lo, hi] = self.interval;
        let (lo, hi) = (lo.max(-50.0), hi.min(50.0));
        (0..=2000).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / 2001.0).collect()
    }
}

/// The band chart on `I × ℝ`. Its signature follows the sign of `1 + ℓf`.
pub fn band_metric(spec: &BandMetricSpec) -> Result<MetricChart> {
    if spec.a == 0.0 || !spec.a.is_finite() {
        return Err(Error::InvalidParameter(format!("a must be nonzero, got {}", spec.a)));
    }
    let d = 1.0 + spec.l * &spec.f;
    let mut sign = 0.0;
    for x in spec.sample_xs() {
        let v = d.value(x, 0.0);
        if !(v.is_finite() && v != 0.0) || (sign != 0.0 && v.signum() != sign) {
            return Err(Error::InvalidParameter(format!(
                "1+ℓf must keep one sign on the interval, fails near x = {x:.4}"
            )));
        }
        sign = v.signum();
    }
    let a = spec.a;
    let coeffs = if spec.l == 0.0 {
        [ScalarField::zero(), ScalarField::constant(a), &spec.f * a]
    } else {
        [a * spec.l / d.square(), a / &d, a * &spec.f / &d]
    };
    let sig = if sign > 0.0 {
        Signature::Lorentzian
    } else {
        Signature::Riemannian
    };
    let [lo, hi] = spec.interval;
    let sb = if lo < 1.0 && hi > -1.0 {
        Rect::new([lo.max(-1.0), hi.min(1.0)], [0.0, 1.0])
    } else {
        Rect::new([lo, hi], [0.0, 1.0])
    };
    let name = if spec.a == 1.0 && spec.l == 0.0 {
        "band".to_string()
    } else {
        format!("band(a={},l={})", spec.a, spec.l)
    };
    Ok(MetricChart::new(name, coeffs, sig)
        .with_domain(Domain::rect(spec.interval, [f64::NEG_INFINITY, f64::INFINITY]))
        .with_sample_box(sb))
}

/// `2/(x²+y²) dxdy` on the plane minus a disk of radius `1e-6`, with the
/// radial Killing field.
pub fn clifton_pohl() -> (MetricChart, VectorField) {
    let x = ScalarField::x();
    let y = ScalarField::y();
    let r2 = x.square() + y.square();
    let chart = MetricChart::new(
        "clifton-pohl",
        [ScalarField::zero(), 1.0 / &r2, ScalarField::zero()],
        Signature::Lorentzian,
    )
    .with_domain(Domain::plane().with_constraint(r2 - 1e-12))
    .with_sample_box(Rect::new([0.5, 2.0], [0.5, 2.0]));
    (chart, [x, y])
}

/// The two-parameter family obtained from the Clifton–Pohl chart and its
/// radial Clairaut integral `C`: `J = a g + ℓ C²`, `g_{a,ℓ} = (det g/det J)² J`.
pub fn punctured_plane_family(a: f64, l: f64) -> Result<(MetricChart, VectorField)> {
    if a == 0.0 || !(l.abs() < a.abs()) {
        return Err(Error::InvalidParameter(format!(
            "need a ≠ 0 and -|a| < ℓ < |a|, got a = {a}, ℓ = {l}"
        )));
    }
    let (g, k) = clifton_pohl();
    if a == 1.0 && l == 0.0 {
        return Ok((g, k));
    }
    let c2 = clairaut(&g, &k)?.square_of_linear()?;
    let j = energy(&g).combine(a, &c2, l);
    let chart = metric_from_integral(&g, &j, &format!("punctured-family(a={a},l={l})"))?;
    Ok((chart, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_identity_trivial_and_instance() {
        let (lhs, rhs) = matrix_identity_sides(1.0, 0.0, 0.7, 0.0, 1.0).unwrap();
        assert_eq!(lhs, g_matrix(1.0, 0.0, 0.7));
        assert!((0..3).all(|i| (rhs[i] - lhs[i]).abs() < 1e-15));
        assert!(matrix_identity_check(1.0, 0.0, 2.0, 0.5, 2.0).unwrap() <= 1e-12);
        assert!(matrix_identity_check(1.0, -0.5, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn band_identity_member_and_determinant() {
        let f = (std::f64::consts::PI * ScalarField::x()).sin().square();
        let spec = BandMetricSpec::new(f.clone(), [f64::NEG_INFINITY, f64::INFINITY], 1.0, 0.0);
        let g = band_metric(&spec).unwrap();
        assert_eq!(g.coeffs_at([0.3, 0.0]).unwrap(), [0.0, 1.0, f.value(0.3, 0.0)]);
        let spec = BandMetricSpec { a: 2.0, l: 0.3, ..spec };
        let h = band_metric(&spec).unwrap();
        for x in [-0.7, 0.1, 0.45] {
            let d = 1.0 + 0.3 * f.value(x, 0.0);
            let want = -4.0 / d.powi(3);
            assert!((h.det_at([x, 2.0]).unwrap() - want).abs() < 1e-14);
        }
        let bad = BandMetricSpec { l: -2.0, ..spec };
        assert!(band_metric(&bad).is_err());
    }

    #[test]
    fn punctured_family_identity_and_range() {
        let (g, _) = punctured_plane_family(1.0, 0.0).unwrap();
        assert_eq!(g.coeffs_at([1.0, 1.0]).unwrap(), [0.0, 0.5, 0.0]);
        assert!(punctured_plane_family(1.0, 1.0).is_err());
        assert!(punctured_plane_family(0.0, 0.0).is_err());
        assert!(punctured_plane_family(-2.0, 1.0).is_ok());
    }
}

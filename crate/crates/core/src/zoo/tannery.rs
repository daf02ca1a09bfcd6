use std::f64::consts::PI;

use crate::domain::{Domain, Rect};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::integrals::{clairaut, energy, metric_from_integral};
use crate::metric::{MetricChart, Signature};
use crate::VectorField;

/// `(p/q + h(cos r))² dr² + sin²r dθ²` on `(0, π) × S¹`, and its deformation
/// with parameter `l`. `h` is an odd function written in the variable `x`.
#[derive(Clone, Debug)]
pub struct TannerySpec {
    pub p: u32,
    pub q: u32,
    pub h: ScalarField,
    pub l: f64,
}

impl TannerySpec {
    pub fn round() -> Self {
        TannerySpec {
            p: 1,
            q: 1,
            h: ScalarField::zero(),
            l: 0.0,
        }
    }

    pub fn with_l(self, l: f64) -> Self {
        TannerySpec { l, ..self }
    }

    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    fn validate(&self) -> Result<ScalarField> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::InvalidParameter("p/q must be a positive rational".into()));
        }
        for i in 0..=200 {
            let s = -1.0 + 2.0 * i as f64 / 200.0;
            let (a, b) = (self.h.value(s, 0.0), self.h.value(-s, 0.0));
            if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::InvalidParameter(format!("h is not odd: h({s}) = {a}, h(-{s}) = {b}")));
            }
            if !(self.ratio() + a > 0.0) {
                return Err(Error::InvalidParameter(format!("p/q + h(cos r) must be positive, fails at cos r = {s}")));
            }
        }
        let r = ScalarField::x();
        Ok(self.ratio() + self.h.compose(&r.cos(), &ScalarField::y()))
    }
}

fn theta_killing() -> VectorField {
    [ScalarField::zero(), ScalarField::one()]
}

pub fn tannery_riemannian(spec: &TannerySpec) -> Result<(MetricChart, VectorField)> {
    let w = spec.validate()?;
    let r = ScalarField::x();
    let chart = MetricChart::new(
        format!("tannery(p/q={}/{})", spec.p, spec.q),
        [w.square(), ScalarField::zero(), r.sin().square()],
        Signature::Riemannian,
    )
    .with_domain(Domain::rect([0.0, PI], [f64::NEG_INFINITY, f64::INFINITY]))
    .with_sample_box(Rect::new([0.2, PI - 0.2], [0.0, 2.0 * PI]))
    .with_periods([None, Some(2.0 * PI)]);
    Ok((chart, theta_killing()))
}

/// `−(1+ℓ sin²r)⁻² (w² dr² + sin²r (1+ℓ sin²r) dθ²)`. For `ℓ < −1` the
/// chart lives on the band where `1 + ℓ sin²r < 0` and is Lorentzian;
/// for `ℓ > −1` it is definite.
pub fn tannery_deformed(spec: &TannerySpec) -> Result<(MetricChart, VectorField)> {
    let w = spec.validate()?;
    let l = spec.l;
    if l == -1.0 || !l.is_finite() {
        return Err(Error::InvalidParameter(format!("ℓ = {l} leaves no open band")));
    }
    let r = ScalarField::x();
    let s2 = r.sin().square();
    let d = 1.0 + l * &s2;
    let coeffs = [-(w.square() / d.square()), ScalarField::zero(), -(&s2 / &d)];
    let (band, sig) = if l < -1.0 {
        let r0 = (1.0 / (-l).sqrt()).asin();
        ([r0, PI - r0], Signature::Lorentzian)
    } else {
        ([0.0, PI], Signature::Riemannian)
    };
    let margin = 0.05 * (band[1] - band[0]);
    let chart = MetricChart::new(format!("tannery-deformed(p/q={}/{},l={l})", spec.p, spec.q), coeffs, sig)
        .with_domain(Domain::rect(band, [f64::NEG_INFINITY, f64::INFINITY]))
        .with_sample_box(Rect::new([band[0] + margin, band[1] - margin], [0.0, 2.0 * PI]))
        .with_periods([None, Some(2.0 * PI)]);
    chart.check_signature(50)?;
    Ok((chart, theta_killing()))
}

/// The reparametrization with `sin²x/(1 − 2 sin²x) = −cosh²t`, valued in
/// `(π/4, 3π/4)` and increasing.
pub fn tannery_reparam_x(t: f64) -> f64 {
    let c2 = t.cosh().powi(2);
    let base = (-c2 / (1.0 - 2.0 * c2)).sqrt().asin();
    if t <= 0.0 {
        base
    } else {
        PI - base
    }
}

/// `ḡ = (det g/det J)² J` with `J = g − C²/ℓ²` on `U = {g(K, K) < ℓ²}`.
pub fn clairaut_truncation(m: &MetricChart, k: &VectorField, l: f64) -> Result<MetricChart> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("ℓ must be positive, got {l}")));
    }
    let c = clairaut(m, k)?;
    let j = energy(m).combine(1.0, &c.square_of_linear()?, -1.0 / (l * l));
    let [g11, g12, g22] = m.coeffs();
    let [k1, k2] = k;
    let norm = g11 * k1.square() + 2.0 * (g12 * k1 * k2) + g22 * k2.square();
    let u = m.domain().clone().with_constraint(l * l - norm);
    let base = m.restricted(&u);
    let mut inside = 0;
    let [a, b, cc] = &j.q;
    let det_j = a * cc - b.square();
    for p in base.sample_box().grid(50) {
        if !u.contains(p) {
            continue;
        }
        inside += 1;
        let d = det_j.value(p[0], p[1]);
        if !(d.is_finite() && d != 0.0) {
            return Err(Error::Degenerate {
                chart: format!("truncation of {}", m.name()),
                x: p[0],
                y: p[1],
            });
        }
    }
    if inside == 0 {
        return Err(Error::Precondition(format!("{{g(K,K) < {}}} misses the sample box", l * l)));
    }
    metric_from_integral(&base, &j, &format!("truncation({}, l={l})", m.name()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_tannery_is_the_unit_sphere() {
        let (m, _) = tannery_riemannian(&TannerySpec::round()).unwrap();
        for p in m.sample_box().grid(6) {
            assert!((m.gaussian_curvature(p).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn even_h_rejected() {
        let spec = TannerySpec {
            h: ScalarField::x().square(),
            ..TannerySpec::round()
        };
        assert!(tannery_riemannian(&spec).is_err());
    }

    #[test]
    fn deformed_band_and_signature() {
        let (m, _) = tannery_deformed(&TannerySpec::round().with_l(-2.0)).unwrap();
        assert_eq!(m.signature(), Signature::Lorentzian);
        assert!((m.domain().rect.x[0] - PI / 4.0).abs() < 1e-15);
        let (m0, _) = tannery_deformed(&TannerySpec::round()).unwrap();
        let (g0, _) = tannery_riemannian(&TannerySpec::round()).unwrap();
        let p = [1.0, 0.5];
        let (a, b) = (m0.coeffs_at(p).unwrap(), g0.coeffs_at(p).unwrap());
        assert!((0..3).all(|i| (a[i] + b[i]).abs() < 1e-15));
    }

    #[test]
    fn reparam_endpoints() {
        assert!((tannery_reparam_x(0.0) - PI / 2.0).abs() < 1e-15);
        assert!(tannery_reparam_x(-5.0) > PI / 4.0);
        assert!(tannery_reparam_x(5.0) < 3.0 * PI / 4.0);
    }
}

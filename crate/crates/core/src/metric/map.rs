use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::{Point, Vector};

use super::MetricChart;

/// A map `(x, y) -> (u, v)` between charts, with its Jacobian built by
/// symbolic differentiation.
#[derive(Clone, Debug)]
pub struct ChartMap {
    pub name: String,
    pub forward: [ScalarField; 2],
    /// `jacobian[a][i] = ∂ forward[a] / ∂ x^i`.
    pub jacobian: [[ScalarField; 2]; 2],
    pub inverse: Option<[ScalarField; 2]>,
}

impl ChartMap {
    pub fn new(name: impl Into<String>, u: ScalarField, v: ScalarField) -> Self {
        let jacobian = [[u.dx(), u.dy()], [v.dx(), v.dy()]];
        ChartMap {
            name: name.into(),
            forward: [u, v],
            jacobian,
            inverse: None,
        }
    }

    pub fn with_inverse(mut self, u: ScalarField, v: ScalarField) -> Self {
        self.inverse = Some([u, v]);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn identity() -> Self {
        ChartMap::new("identity", ScalarField::x(), ScalarField::y())
            .with_inverse(ScalarField::x(), ScalarField::y())
    }

    /// `(x, y) -> (x + dx, y + dy)`.
    pub fn translation(dx: f64, dy: f64) -> Self {
        let x = ScalarField::x();
        let y = ScalarField::y();
        ChartMap::new(format!("translate({dx},{dy})"), &x + dx, &y + dy).with_inverse(&x - dx, &y - dy)
    }

    /// Linear part plus translation: `(x, y) -> M (x, y) + c`.
    pub fn affine(name: &str, m: [[f64; 2]; 2], c: [f64; 2]) -> Self {
        let x = ScalarField::x();
        let y = ScalarField::y();
        let u = &x * m[0][0] + &y * m[0][1] + c[0];
        let v = &x * m[1][0] + &y * m[1][1] + c[1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let xs = &x - c[0];
        let ys = &y - c[1];
        let iu = &xs * inv[0][0] + &ys * inv[0][1];
        let iv = &xs * inv[1][0] + &ys * inv[1][1];
        ChartMap::new(name, u, v).with_inverse(iu, iv)
    }

    pub fn apply(&self, p: Point) -> Point {
        [self.forward[0].value(p[0], p[1]), self.forward[1].value(p[0], p[1])]
    }

    pub fn jacobian_at(&self, p: Point) -> [[f64; 2]; 2] {
        let j = &self.jacobian;
        [
            [j[0][0].value(p[0], p[1]), j[0][1].value(p[0], p[1])],
            [j[1][0].value(p[0], p[1]), j[1][1].value(p[0], p[1])],
        ]
    }

    /// Pushforward of a tangent vector at `p`.
    pub fn push(&self, p: Point, v: Vector) -> Vector {
        let j = self.jacobian_at(p);
        [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]]
    }

    pub fn jacobian_det(&self, p: Point) -> f64 {
        let j = self.jacobian_at(p);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &ChartMap) -> ChartMap {
        let [iu, iv] = &inner.forward;
        let u = self.forward[0].compose(iu, iv);
        let v = self.forward[1].compose(iu, iv);
        let mut out = ChartMap::new(format!("{}∘{}", self.name, inner.name), u, v);
        if let (Some(a), Some(b)) = (&self.inverse, &inner.inverse) {
            out.inverse = Some([b[0].compose(&a[0], &a[1]), b[1].compose(&a[0], &a[1])]);
        }
        out
    }

    /// Sampled invariants: nonzero Jacobian determinant, and
    /// `forward ∘ inverse = id` to `tol` when an inverse is present.
    pub fn check(&self, rect: &Rect, n: usize, tol: f64) -> Result<()> {
        for p in rect.grid(n) {
            let d = self.jacobian_det(p);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Precondition(format!(
                    "{}: singular Jacobian at ({:.4}, {:.4})",
                    self.name, p[0], p[1]
                )));
            }
            if let Some([iu, iv]) = &self.inverse {
                let q = [iu.value(p[0], p[1]), iv.value(p[0], p[1])];
                let back = self.apply(q);
                let err = (back[0] - p[0]).abs().max((back[1] - p[1]).abs());
                if err > tol * (1.0 + p[0].abs().max(p[1].abs())) {
                    return Err(Error::Precondition(format!(
                        "{}: forward∘inverse misses identity by {err:.3e}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `φ*g`: coefficient matrix `Jᵀ G(φ(p)) J`, built symbolically. The domain
/// is the preimage of the chart's domain; the sample box is inherited.
pub fn pullback(m: &MetricChart, phi: &ChartMap) -> MetricChart {
    let [u, v] = &phi.forward;
    let [e, f, g] = m.coeffs().clone().map(|c| c.compose(u, v));
    let gm = [[e, f.clone()], [f, g]];
    let j = &phi.jacobian;
    let entry = |a: usize, b: usize| -> ScalarField {
        let mut acc = ScalarField::zero();
        for k in 0..2 {
            for l in 0..2 {
                acc = acc + &j[k][a] * &gm[k][l] * &j[l][b];
            }
        }
        acc
    };
    MetricChart::new(
        format!("{}*{}", phi.name, m.name()),
        [entry(0, 0), entry(0, 1), entry(1, 1)],
        m.signature(),
    )
    .with_domain(m.domain().preimage(u, v))
    .with_sample_box(m.sample_box())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Signature;

    fn flat() -> MetricChart {
        MetricChart::new(
            "flat",
            [ScalarField::zero(), ScalarField::one(), ScalarField::zero()],
            Signature::Lorentzian,
        )
    }

    #[test]
    fn identity_pullback_is_trivial() {
        let x = ScalarField::x();
        let m = MetricChart::new("m", [x.sin() + 2.0, x.clone() * 0.1, x.cos() + 3.0], Signature::Riemannian);
        let pb = pullback(&m, &ChartMap::identity());
        for p in Rect::new([-1.0, 1.0], [-1.0, 1.0]).grid(5) {
            assert_eq!(pb.coeffs_at(p).unwrap(), m.coeffs_at(p).unwrap());
        }
    }

    #[test]
    fn rotation_pullback_of_flat_chart_by_chain_rule() {
        let rot = ChartMap::affine("rot", [[0.0, -1.0], [1.0, 0.0]], [0.0, 0.0]);
        let m = flat();
        let pb = pullback(&m, &rot);
        for p in Rect::new([-1.0, 1.0], [-1.0, 1.0]).grid(4) {
            for (v, w) in [([1.0, 0.0], [0.0, 1.0]), ([0.3, -0.7], [1.1, 0.2])] {
                let direct = m
                    .metric_eval(rot.apply(p), rot.push(p, v), rot.push(p, w))
                    .unwrap();
                assert!((pb.metric_eval(p, v, w).unwrap() - direct).abs() < 1e-14);
            }
        }
        // 2 dx dy pulled back by (x, y) -> (-y, x) is -2 dx dy
        assert_eq!(pb.coeffs_at([0.3, 0.2]).unwrap(), [0.0, -1.0, 0.0]);
    }

    #[test]
    fn inverse_check() {
        let t = ChartMap::translation(1.0, 0.0);
        assert!(t.check(&Rect::new([-2.0, 2.0], [-2.0, 2.0]), 5, 1e-10).is_ok());
        let bad = ChartMap::new("bad", ScalarField::x(), ScalarField::x());
        assert!(bad.check(&Rect::new([-2.0, 2.0], [-2.0, 2.0]), 5, 1e-10).is_err());
        let comp = t.after(&t);
        assert_eq!(comp.apply([0.0, 0.0]), [2.0, 0.0]);
        assert!(comp.check(&Rect::new([-2.0, 2.0], [-2.0, 2.0]), 5, 1e-10).is_ok());
    }
}

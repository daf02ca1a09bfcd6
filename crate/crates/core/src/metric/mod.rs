//! Metric charts on surfaces: evaluation, causal character, Levi-Civita
//! connection, Gaussian curvature and pullbacks.
//!
//! Coefficients are stored as `[g11, g12, g22]`. Index 0 is `x`, index 1 is
//! `y`. Signatures are classified by the sign of the determinant, so a
//! negative-definite chart is tagged [`Signature::Riemannian`] as well.

mod format;
mod map;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Rect};
use crate::error::{Error, Result};
use crate::expr::{ScalarField, Tape};
use crate::{Point, Vector};

pub use format::ChartDescription;
pub use map::{pullback, ChartMap};

/// Symmetric 2×2 matrix stored as `[m11, m12, m22]`.
pub type Sym = [f64; 3];

#[inline]
pub fn sym_at(s: &Sym, i: usize, j: usize) -> f64 {
    match (i, j) {
        (0, 0) => s[0],
        (1, 1) => s[2],
        _ => s[1],
    }
}

#[inline]
pub fn sym_det(s: &Sym) -> f64 {
    s[0] * s[2] - s[1] * s[1]
}

#[inline]
pub fn sym_quad(s: &Sym, v: Vector, w: Vector) -> f64 {
    s[0] * v[0] * w[0] + s[1] * (v[0] * w[1] + v[1] * w[0]) + s[2] * v[1] * w[1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn of_det(det: f64) -> Option<Signature> {
        if det > 0.0 {
            Some(Signature::Riemannian)
        } else if det < 0.0 {
            Some(Signature::Lorentzian)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalClass {
    Spacelike,
    Timelike,
    Lightlike,
}

/// Coefficients and first partials at a point: `dg[0]` is `∂x`, `dg[1]` is `∂y`.
#[derive(Clone, Copy, Debug)]
pub struct Jet1 {
    pub g: Sym,
    pub dg: [Sym; 2],
}

/// Adds second partials; `ddg[i][j]` is `∂i ∂j`.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub g: Sym,
    pub dg: [Sym; 2],
    pub ddg: [[Sym; 2]; 2],
}

/// `Γ[k][i][j] = Γ^k_{ij}`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

/// `dΓ[l][k][i][j] = ∂_l Γ^k_{ij}`.
pub type ChristoffelDerivative = [[[[f64; 2]; 2]; 2]; 2];

#[derive(Clone, Debug)]
pub struct MetricChart {
    name: String,
    coeffs: [ScalarField; 3],
    domain: Domain,
    signature: Signature,
    sample_box: Rect,
    periods: [Option<f64>; 2],
    jet1: OnceLock<Tape>,
    jet2: OnceLock<Tape>,
}

impl MetricChart {
    pub fn new(name: impl Into<String>, coeffs: [ScalarField; 3], signature: Signature) -> Self {
        MetricChart {
            name: name.into(),
            coeffs,
            domain: Domain::plane(),
            signature,
            sample_box: Rect::new([-1.0, 1.0], [-1.0, 1.0]),
            periods: [None, None],
            jet1: OnceLock::new(),
            jet2: OnceLock::new(),
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_sample_box(mut self, rect: Rect) -> Self {
        self.sample_box = rect;
        self
    }

    pub fn with_periods(mut self, periods: [Option<f64>; 2]) -> Self {
        self.periods = periods;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same coefficients on the intersection with `domain`.
    pub fn restricted(&self, domain: &Domain) -> Self {
        let mut out = self.clone();
        out.domain = self.domain.intersect(domain);
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn coeffs(&self) -> &[ScalarField; 3] {
        &self.coeffs
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn signature(&self) -> Signature {
        self.signature
    }
    pub fn sample_box(&self) -> Rect {
        self.sample_box
    }
    pub fn periods(&self) -> [Option<f64>; 2] {
        self.periods
    }

    /// Coefficient matrix as a 2×2 field.
    pub fn matrix(&self) -> [[ScalarField; 2]; 2] {
        let [e, f, g] = self.coeffs.clone();
        [[e, f.clone()], [f, g]]
    }

    pub fn det_field(&self) -> ScalarField {
        let [e, f, g] = &self.coeffs;
        e * g - f.square()
    }

    fn jet1_tape(&self) -> &Tape {
        self.jet1.get_or_init(|| {
            let mut roots: Vec<ScalarField> = self.coeffs.to_vec();
            roots.extend(self.coeffs.iter().map(|c| c.dx()));
            roots.extend(self.coeffs.iter().map(|c| c.dy()));
            Tape::new(&roots)
        })
    }

    fn jet2_tape(&self) -> &Tape {
        self.jet2.get_or_init(|| {
            let mut roots: Vec<ScalarField> = self.coeffs.to_vec();
            roots.extend(self.coeffs.iter().map(|c| c.dx()));
            roots.extend(self.coeffs.iter().map(|c| c.dy()));
            roots.extend(self.coeffs.iter().map(|c| c.dx().dx()));
            roots.extend(self.coeffs.iter().map(|c| c.dx().dy()));
            roots.extend(self.coeffs.iter().map(|c| c.dy().dy()));
            Tape::new(&roots)
        })
    }

    fn check_point(&self, p: Point) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                what: self.name.clone(),
                x: p[0],
                y: p[1],
            })
        }
    }

    fn finite(&self, vals: &[f64], p: Point) -> Result<()> {
        if vals.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: self.name.clone(),
                x: p[0],
                y: p[1],
            })
        }
    }

    /// Coefficients at `p`, without the domain check.
    pub fn coeffs_unchecked(&self, p: Point) -> Sym {
        let mut scratch = Vec::new();
        let mut out = [0.0; 9];
        self.jet1_tape().eval_with(p[0], p[1], &mut scratch, &mut out);
        [out[0], out[1], out[2]]
    }

    pub fn coeffs_at(&self, p: Point) -> Result<Sym> {
        self.check_point(p)?;
        let g = self.coeffs_unchecked(p);
        self.finite(&g, p)?;
        Ok(g)
    }

    /// Jet evaluation with a caller-owned register file, for hot loops.
    pub fn jet1_with(&self, p: Point, scratch: &mut Vec<f64>) -> Result<Jet1> {
        self.check_point(p)?;
        let mut out = [0.0; 9];
        self.jet1_tape().eval_with(p[0], p[1], scratch, &mut out);
        self.finite(&out, p)?;
        Ok(Jet1 {
            g: [out[0], out[1], out[2]],
            dg: [[out[3], out[4], out[5]], [out[6], out[7], out[8]]],
        })
    }

    pub fn jet1(&self, p: Point) -> Result<Jet1> {
        self.jet1_with(p, &mut Vec::new())
    }

    pub fn jet2_with(&self, p: Point, scratch: &mut Vec<f64>) -> Result<Jet2> {
        self.check_point(p)?;
        let mut o = [0.0; 18];
        self.jet2_tape().eval_with(p[0], p[1], scratch, &mut o);
        self.finite(&o, p)?;
        let s = |k: usize| [o[k], o[k + 1], o[k + 2]];
        Ok(Jet2 {
            g: s(0),
            dg: [s(3), s(6)],
            ddg: [[s(9), s(12)], [s(12), s(15)]],
        })
    }

    pub fn jet2(&self, p: Point) -> Result<Jet2> {
        self.jet2_with(p, &mut Vec::new())
    }

    /// `g_p(v, w)`.
    pub fn metric_eval(&self, p: Point, v: Vector, w: Vector) -> Result<f64> {
        Ok(sym_quad(&self.coeffs_at(p)?, v, w))
    }

    pub fn det_at(&self, p: Point) -> Result<f64> {
        Ok(sym_det(&self.coeffs_at(p)?))
    }

    pub fn christoffel(&self, p: Point) -> Result<Christoffel> {
        let jet = self.jet1(p)?;
        christoffel_from_jet(&jet).ok_or_else(|| self.degenerate(p))
    }

    fn degenerate(&self, p: Point) -> Error {
        Error::Degenerate {
            chart: self.name.clone(),
            x: p[0],
            y: p[1],
        }
    }

    /// Gaussian curvature by the Brioschi formula; valid for either signature.
    pub fn gaussian_curvature(&self, p: Point) -> Result<f64> {
        let jet = self.jet2(p)?;
        brioschi(&jet).ok_or_else(|| self.degenerate(p))
    }

    /// Curvature at `p` reached along `p + h·dir`, `h → 0`.
    ///
    /// Used where the formula may be indeterminate exactly at `p`. When the
    /// value at `p` itself is available and consistent with the approach it
    /// is returned directly; otherwise a Richardson-extrapolated limit of the
    /// sequence `h = 2^-k h0` is returned.
    pub fn gaussian_curvature_limit(&self, p: Point, dir: Vector) -> Result<f64> {
        let at = |h: f64| self.gaussian_curvature([p[0] + h * dir[0], p[1] + h * dir[1]]);
        if let Ok(k) = self.gaussian_curvature(p) {
            return Ok(k);
        }
        let h0 = 1e-3;
        let mut seq = Vec::new();
        for k in 0..6 {
            seq.push(at(h0 / 2f64.powi(k))?);
        }
        // repeated Richardson elimination assuming an expansion in powers of h
        let mut row = seq;
        let mut order = 1;
        while row.len() > 1 {
            let f = 2f64.powi(order);
            row = row.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
            order += 1;
        }
        Ok(row[0])
    }

    /// Default lightlike band: `1e-9` times the local coefficient magnitude.
    pub fn default_null_tolerance(&self, p: Point, v: Vector) -> Result<f64> {
        let g = self.coeffs_at(p)?;
        let scale = g.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Ok(1e-9 * scale * (v[0] * v[0] + v[1] * v[1]))
    }

    pub fn classify(&self, p: Point, v: Vector, tol: Option<f64>) -> Result<CausalClass> {
        if v == [0.0, 0.0] {
            return Err(Error::ZeroVector);
        }
        let q = self.metric_eval(p, v, v)?;
        let tol = match tol {
            Some(t) => t,
            None => self.default_null_tolerance(p, v)?,
        };
        Ok(if q > tol {
            CausalClass::Spacelike
        } else if q < -tol {
            CausalClass::Timelike
        } else {
            CausalClass::Lightlike
        })
    }

    /// Checks the determinant sign against the declared signature on an
    /// `n × n` grid of the sample box (points outside the domain skipped).
    pub fn check_signature(&self, n: usize) -> Result<usize> {
        let mut checked = 0;
        for p in self.sample_box.grid(n) {
            if !self.domain.contains(p) {
                continue;
            }
            let det = self.det_at(p)?;
            match Signature::of_det(det) {
                Some(s) if s == self.signature => checked += 1,
                Some(s) => {
                    return Err(Error::Signature {
                        chart: self.name.clone(),
                        message: format!("det = {det:.3e} at ({:.4}, {:.4}) indicates {s:?}", p[0], p[1]),
                    })
                }
                None => return Err(self.degenerate(p)),
            }
        }
        Ok(checked)
    }

    /// Metric multiplied by a constant.
    pub fn scaled(&self, c: f64) -> MetricChart {
        let coeffs = self.coeffs.clone().map(|f| f * c);
        let signature = self.signature;
        MetricChart::new(format!("{}*{c}", self.name), coeffs, signature)
            .with_domain(self.domain.clone())
            .with_sample_box(self.sample_box)
            .with_periods(self.periods)
    }
}

pub fn christoffel_from_jet(jet: &Jet1) -> Option<Christoffel> {
    let det = sym_det(&jet.g);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = [jet.g[2] / det, -jet.g[1] / det, jet.g[0] / det];
    // first kind: Γ_{m,ij} = ½(∂i g_mj + ∂j g_mi − ∂m g_ij)
    let mut first = [[[0.0; 2]; 2]; 2];
    for (m, fm) in first.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                fm[i][j] = 0.5
                    * (sym_at(&jet.dg[i], m, j) + sym_at(&jet.dg[j], m, i) - sym_at(&jet.dg[m], i, j));
            }
        }
    }
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                gk[i][j] = sym_at(&inv, k, 0) * first[0][i][j] + sym_at(&inv, k, 1) * first[1][i][j];
            }
        }
    }
    Some(gamma)
}

/// Connection and its partial derivatives from second-order data.
pub fn christoffel_with_derivative(jet: &Jet2) -> Option<(Christoffel, ChristoffelDerivative)> {
    let gamma = christoffel_from_jet(&Jet1 { g: jet.g, dg: jet.dg })?;
    let det = sym_det(&jet.g);
    let inv = [jet.g[2] / det, -jet.g[1] / det, jet.g[0] / det];
    let mut first = [[[0.0; 2]; 2]; 2];
    for (m, fm) in first.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                fm[i][j] = 0.5
                    * (sym_at(&jet.dg[i], m, j) + sym_at(&jet.dg[j], m, i) - sym_at(&jet.dg[m], i, j));
            }
        }
    }
    let mut d = [[[[0.0; 2]; 2]; 2]; 2];
    for (l, dl) in d.iter_mut().enumerate() {
        // ∂l g^{-1} = −g^{-1} (∂l g) g^{-1}
        let mut dinv = [[0.0; 2]; 2];
        for (a, row) in dinv.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for c in 0..2 {
                    for e in 0..2 {
                        s += sym_at(&inv, a, c) * sym_at(&jet.dg[l], c, e) * sym_at(&inv, e, b);
                    }
                }
                *entry = -s;
            }
        }
        for (k, dlk) in dl.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for m in 0..2 {
                        let d_first = 0.5
                            * (sym_at(&jet.ddg[l][i], m, j) + sym_at(&jet.ddg[l][j], m, i)
                                - sym_at(&jet.ddg[l][m], i, j));
                        s += dinv[k][m] * first[m][i][j] + sym_at(&inv, k, m) * d_first;
                    }
                    dlk[i][j] = s;
                }
            }
        }
    }
    Some((gamma, d))
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Brioschi formula in terms of `E, F, G` and their partials.
pub fn brioschi(jet: &Jet2) -> Option<f64> {
    let [e, f, g] = jet.g;
    let det = e * g - f * f;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let [eu, fu, gu] = jet.dg[0];
    let [ev, fv, gv] = jet.dg[1];
    let evv = jet.ddg[1][1][0];
    let fuv = jet.ddg[0][1][1];
    let guu = jet.ddg[0][0][2];
    let m1 = [
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, g],
    ];
    let m2 = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]];
    Some((det3(m1) - det3(m2)) / (det * det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat() -> MetricChart {
        MetricChart::new(
            "flat",
            [ScalarField::zero(), ScalarField::one(), ScalarField::zero()],
            Signature::Lorentzian,
        )
    }

    fn sphere() -> MetricChart {
        let r = ScalarField::x();
        MetricChart::new(
            "sphere",
            [ScalarField::one(), ScalarField::zero(), r.sin().square()],
            Signature::Riemannian,
        )
        .with_domain(Domain::rect([0.0, PI], [f64::NEG_INFINITY, f64::INFINITY]))
        .with_sample_box(Rect::new([0.3, PI - 0.3], [0.0, 2.0 * PI]))
    }

    fn clifton_pohl() -> MetricChart {
        let x = ScalarField::x();
        let y = ScalarField::y();
        MetricChart::new(
            "cp",
            [ScalarField::zero(), 1.0 / (x.square() + y.square()), ScalarField::zero()],
            Signature::Lorentzian,
        )
    }

    #[test]
    fn flat_null_direction() {
        let m = flat();
        assert_eq!(m.metric_eval([3.0, 1.0], [1.0, 0.0], [1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.classify([0.0, 0.0], [0.0, 1.0], None).unwrap(), CausalClass::Lightlike);
        let g = m.christoffel([0.2, 0.3]).unwrap();
        assert!(g.iter().flatten().flatten().all(|c| *c == 0.0));
    }

    #[test]
    fn clifton_pohl_read_off() {
        let m = clifton_pohl();
        assert_eq!(m.metric_eval([1.0, 1.0], [1.0, 0.0], [0.0, 1.0]).unwrap(), 0.5);
        assert!((m.gaussian_curvature([1.0, 1.0]).unwrap() + 2.0).abs() < 1e-12);
        assert!(m.gaussian_curvature([1.0, 0.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        let m = sphere();
        let r = PI / 3.0;
        let g = m.christoffel([r, 0.4]).unwrap();
        assert!((g[0][1][1] + 3f64.sqrt() / 4.0).abs() < 1e-14);
        assert!((g[1][0][1] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(g[1][0][1], g[1][1][0]);
        for p in m.sample_box().grid(7) {
            assert!((m.gaussian_curvature(p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn riemannian_vectors_are_spacelike() {
        let m = sphere();
        for v in [[1.0, 0.0], [0.0, 1.0], [-0.3, 2.0]] {
            assert_eq!(m.classify([1.0, 0.0], v, None).unwrap(), CausalClass::Spacelike);
        }
        assert!(matches!(m.classify([1.0, 0.0], [0.0, 0.0], None), Err(Error::ZeroVector)));
    }

    #[test]
    fn signature_check_detects_mismatch() {
        assert!(sphere().check_signature(10).is_ok());
        let wrong = MetricChart::new("bad", sphere().coeffs().clone(), Signature::Lorentzian)
            .with_sample_box(sphere().sample_box())
            .with_domain(sphere().domain().clone());
        assert!(matches!(wrong.check_signature(10), Err(Error::Signature { .. })));
    }

    #[test]
    fn domain_and_degeneracy_errors() {
        let m = sphere();
        assert!(matches!(m.christoffel([4.0, 0.0]), Err(Error::DomainViolation { .. })));
        let deg = MetricChart::new(
            "deg",
            [ScalarField::one(), ScalarField::one(), ScalarField::one()],
            Signature::Riemannian,
        );
        assert!(matches!(deg.christoffel([0.0, 0.0]), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn curvature_limit_matches_direct_value() {
        let m = clifton_pohl();
        let k = m.gaussian_curvature_limit([1.0, 0.0], [0.0, 1.0]).unwrap();
        assert!(k.abs() < 1e-12);
    }
}

//! A Lorentzian metric on the plane for which `τ(x, y) = (x + 1, y)` maps
//! geodesics to geodesics without being affine.
//!
//! With profiles `α: [0,1] → [1, a]` and `λ: [0,1] → [0, ε]` (plateaus at
//! both ends), on `[n, n+1]`:
//!
//! ```text
//! A(x + n) = α(x) aⁿ
//! Λ(x + n) = λ(x) + ε (1 − a³ⁿ)/(1 − a³) α³(x)
//! g = A³ (Λ/(1+Λf)² dx² + 2/(1+Λf) dxdy + f/(1+Λf) dy²)
//! ```

use serde::{Deserialize, Serialize};

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::metric::ChartMap;
use crate::metric::{MetricChart, Signature};
use crate::VectorField;

use super::planar::{g_matrix, q_matrix, Mat};

#[derive(Clone, Debug)]
pub struct ShiftedSpec {
    /// 1-periodic, nonnegative, nonconstant profile in `x`.
    pub f: ScalarField,
    pub a: f64,
    pub eps: f64,
    /// Width of the constant ends of `α` and `λ`.
    pub plateau: f64,
}

impl ShiftedSpec {
    pub fn new(f: ScalarField, a: f64, eps: f64) -> Self {
        ShiftedSpec {
            f,
            a,
            eps,
            plateau: 0.1,
        }
    }

    /// `sin²(πx)`, `a = 2`, `ε = 0.5`.
    pub fn standard() -> Self {
        Self::new((std::f64::consts::PI * ScalarField::x()).sin().square(), 2.0, 0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeamReport {
    pub seams: Vec<i32>,
    /// Largest jump of value, first or second derivative of `A` or `Λ`,
    /// relative to the value scale.
    pub max_jump: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Shifted {
    pub chart: MetricChart,
    pub tau: ChartMap,
    pub killing: VectorField,
    pub f: ScalarField,
    pub big_a: ScalarField,
    pub big_lambda: ScalarField,
    /// Sampled maximum of `f`.
    pub m: f64,
    pub a: f64,
    pub eps: f64,
    pub seams: SeamReport,
}

pub const SEAM_TOL: f64 = 1e-8;

fn step(t: &ScalarField, w: f64) -> ScalarField {
    ((t - w) / (1.0 - 2.0 * w)).smooth_step()
}

fn profile_max(f: &ScalarField) -> (f64, f64) {
    let vals: Vec<f64> = (0..=4000).map(|i| f.value(i as f64 / 4000.0, 0.0)).collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// One-sided jumps of value, first and second derivative at `x = n`.
fn seam_jump(fields: &[&ScalarField], n: i32) -> f64 {
    let d = 1e-9;
    let x = n as f64;
    let mut worst: f64 = 0.0;
    for f in fields {
        let scale = f.value(x + d, 0.0).abs().max(1.0);
        for g in [(*f).clone(), f.dx(), f.dx().dx()] {
            let (l, r) = (g.value(x - d, 0.0), g.value(x + d, 0.0));
            let jump = if l.is_finite() && r.is_finite() {
                (l - r).abs() / scale
            } else {
                f64::INFINITY
            };
            worst = worst.max(jump);
        }
    }
    worst
}

pub fn shifted_metric(spec: &ShiftedSpec) -> Result<Shifted> {
    let ShiftedSpec { f, a, eps, plateau } = spec.clone();
    if !(a > 1.0) {
        return Err(Error::InvalidParameter(format!("a must exceed 1, got {a}")));
    }
    if !(plateau > 0.0 && plateau < 0.5) {
        return Err(Error::InvalidParameter(format!("plateau must lie in (0, 1/2), got {plateau}")));
    }
    for i in 0..50 {
        let x = i as f64 / 50.0 + 0.013;
        let (u, v) = (f.value(x, 0.0), f.value(x + 1.0, 0.0));
        if (u - v).abs() > 1e-10 * (1.0 + u.abs()) {
            return Err(Error::InvalidParameter(format!("f is not 1-periodic near x = {x:.3}")));
        }
    }
    let (lo, m) = profile_max(&f);
    if lo < -1e-12 || m - lo < 1e-9 {
        return Err(Error::InvalidParameter(
            "f must be nonnegative and nonconstant".into(),
        ));
    }
    let bound = (a.powi(3) - 1.0) / (m * a.powi(3));
    if !(eps > 0.0 && eps < bound) {
        return Err(Error::InvalidParameter(format!(
            "ε must lie in (0, (a³−1)/(m a³)) = (0, {bound:.6}), got {eps}"
        )));
    }

    let x = ScalarField::x();
    let frac = x.wrap(1.0);
    let n = x.floor();
    let alpha = 1.0 + (a - 1.0) * step(&frac, plateau);
    let lambda = eps * step(&frac, plateau);
    let an = (&n * a.ln()).exp();
    let a3n = (&n * (3.0 * a.ln())).exp();
    let big_a = &alpha * &an;
    let big_lambda = &lambda + eps / (1.0 - a.powi(3)) * (1.0 - &a3n) * alpha.powi(3);

    let d = 1.0 + &big_lambda * &f;
    for i in 0..200 {
        let xi = -3.0 + 7.0 * (i as f64 + 0.5) / 200.0;
        let (dv, lv) = (d.value(xi, 0.0), big_lambda.value(xi, 0.0));
        if !(dv > 0.0 && lv > -1.0 / m) {
            return Err(Error::InvalidParameter(format!(
                "1+Λf = {dv:.4e}, Λ = {lv:.4e} at x = {xi:.4}: ε bound violated"
            )));
        }
    }
    let seams = [0, 1, 2, 3];
    let max_jump = seams
        .iter()
        .map(|&s| seam_jump(&[&big_a, &big_lambda], s))
        .fold(0.0, f64::max);
    if !(max_jump <= SEAM_TOL) {
        return Err(Error::Precondition(format!("A or Λ not smooth across integers: jump {max_jump:.3e}")));
    }

    let a3 = big_a.powi(3);
    let coeffs = [&a3 * &big_lambda / d.square(), &a3 / &d, &a3 * &f / &d];
    let chart = MetricChart::new("sec31", coeffs, Signature::Lorentzian)
        .with_sample_box(Rect::new([-0.5, 2.5], [0.0, 1.0]));
    chart.check_signature(50)?;
    Ok(Shifted {
        chart,
        tau: ChartMap::translation(1.0, 0.0).with_name("tau"),
        killing: [ScalarField::zero(), ScalarField::one()],
        f,
        big_a,
        big_lambda,
        m,
        a,
        eps,
        seams: SeamReport {
            seams: seams.to_vec(),
            max_jump,
            pass: true,
        },
    })
}

/// How `A` is taken to transform under `x ↦ x + n` when stating the
/// period relation; it fixes the scalar prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftReading {
    /// `A(x+n) = aⁿ A(x)`, prefactor `a⁻ⁿ`.
    Definition,
    /// `A(x+n) = a³ⁿ A(x)`, prefactor `a⁻³ⁿ`.
    Cubed,
}

impl Shifted {
    /// `G_x` as `G_{A³, Λ}(f)`.
    pub fn g_at(&self, x: f64) -> Mat {
        g_matrix(self.big_a.value(x, 0.0).powi(3), self.big_lambda.value(x, 0.0), self.f.value(x, 0.0))
    }

    /// Matrix of `C²` for the Clairaut integral of `∂y`.
    pub fn c2_at(&self, x: f64) -> Mat {
        q_matrix(self.big_a.value(x, 0.0).powi(3), self.big_lambda.value(x, 0.0), self.f.value(x, 0.0))
    }

    /// Relative residual of
    /// `β (G_x + μ C²(x)) = (det G_x / det G_{x+n})^{2/3} G_{x+n}`,
    /// `μ = ε (1 − a³ⁿ)/(1 − a³)`, with `β` fixed by the reading.
    pub fn relation_residual(&self, x: f64, n: i32, reading: ShiftReading) -> f64 {
        let a = self.a;
        let mu = self.eps * (1.0 - a.powi(3 * n)) / (1.0 - a.powi(3));
        let beta = match reading {
            ShiftReading::Definition => a.powi(-n),
            ShiftReading::Cubed => a.powi(-3 * n),
        };
        let g = self.g_at(x);
        let c2 = self.c2_at(x);
        let gn = self.g_at(x + n as f64);
        let det = |m: &Mat| m[0] * m[2] - m[1] * m[1];
        let w = (det(&g) / det(&gn)).cbrt().powi(2);
        let lhs = [0, 1, 2].map(|i| beta * (g[i] + mu * c2[i]));
        let rhs = gn.map(|e| w * e);
        let scale = lhs.iter().chain(&rhs).fold(0.0f64, |s, e| s.max(e.abs()));
        (0..3).fold(0.0f64, |s, i| s.max((lhs[i] - rhs[i]).abs())) / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lightlike_at_zero_not_at_one() {
        let s = shifted_metric(&ShiftedSpec::standard()).unwrap();
        let e = [1.0, 0.0];
        assert_eq!(s.chart.metric_eval([0.0, 0.3], e, e).unwrap(), 0.0);
        assert!(s.chart.metric_eval([1.0, 0.3], e, e).unwrap().abs() > 0.1);
    }

    #[test]
    fn epsilon_bound_enforced() {
        let spec = ShiftedSpec {
            eps: 0.9,
            ..ShiftedSpec::standard()
        };
        assert!(matches!(shifted_metric(&spec), Err(Error::InvalidParameter(_))));
        let spec = ShiftedSpec {
            a: 0.5,
            ..ShiftedSpec::standard()
        };
        assert!(shifted_metric(&spec).is_err());
    }

    #[test]
    fn profiles_hit_their_endpoints() {
        let s = shifted_metric(&ShiftedSpec::standard()).unwrap();
        assert_eq!(s.big_a.value(0.0, 0.0), 1.0);
        assert_eq!(s.big_a.value(0.99, 0.0), 2.0);
        assert_eq!(s.big_lambda.value(0.0, 0.0), 0.0);
        assert_eq!(s.big_lambda.value(0.99, 0.0), 0.5);
        assert!(s.seams.max_jump < 1e-12);
    }
}

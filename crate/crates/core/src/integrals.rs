//! First integrals polynomial of degree at most two in the velocity.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{ScalarField, Tape};
use crate::flow::{integrate_geodesic, GeodesicOptions, GeodesicState, GeodesicTrace, Termination};
use crate::metric::{MetricChart, Signature};
use crate::sampling::{sample_states, CausalFilter};
use crate::{Point, Vector, VectorField};

/// `I(p, v) = v·Q(p)v + L(p)·v + c(p)` with `Q = [q11, q12, q22]`.
#[derive(Clone, Debug)]
pub struct FiberIntegral {
    pub name: String,
    pub q: [ScalarField; 3],
    pub l: [ScalarField; 2],
    pub c: ScalarField,
    tape: OnceLock<Tape>,
}

impl FiberIntegral {
    pub fn new(name: impl Into<String>, q: [ScalarField; 3], l: [ScalarField; 2], c: ScalarField) -> Self {
        FiberIntegral {
            name: name.into(),
            q,
            l,
            c,
            tape: OnceLock::new(),
        }
    }

    pub fn quadratic(name: impl Into<String>, q: [ScalarField; 3]) -> Self {
        Self::new(name, q, [ScalarField::zero(), ScalarField::zero()], ScalarField::zero())
    }

    pub fn linear(name: impl Into<String>, l: [ScalarField; 2]) -> Self {
        let z = ScalarField::zero;
        Self::new(name, [z(), z(), z()], l, z())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn tape(&self) -> &Tape {
        self.tape.get_or_init(|| {
            let [q11, q12, q22] = &self.q;
            let [l1, l2] = &self.l;
            Tape::new(&[q11.clone(), q12.clone(), q22.clone(), l1.clone(), l2.clone(), self.c.clone()])
        })
    }

    fn coefficients(&self, p: Point) -> [f64; 6] {
        let mut out = [0.0; 6];
        self.tape().eval_with(p[0], p[1], &mut Vec::new(), &mut out);
        out
    }

    /// Value and the sum of the absolute values of its terms.
    pub fn value_and_scale(&self, p: Point, v: Vector) -> (f64, f64) {
        let [a, b, c, l1, l2, k] = self.coefficients(p);
        let terms = [a * v[0] * v[0], 2.0 * b * v[0] * v[1], c * v[1] * v[1], l1 * v[0], l2 * v[1], k];
        (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
    }

    pub fn value(&self, p: Point, v: Vector) -> f64 {
        self.value_and_scale(p, v).0
    }

    pub fn eval(&self, p: Point, v: Vector) -> Result<f64> {
        let val = self.value(p, v);
        if val.is_finite() {
            Ok(val)
        } else {
            Err(Error::NonFinite {
                what: self.name.clone(),
                x: p[0],
                y: p[1],
            })
        }
    }

    /// Gradient in the fiber: `2 Q v + L`.
    pub fn fiber_gradient(&self, p: Point, v: Vector) -> Vector {
        let [a, b, c, l1, l2, _] = self.coefficients(p);
        [2.0 * (a * v[0] + b * v[1]) + l1, 2.0 * (b * v[0] + c * v[1]) + l2]
    }

    pub fn is_quadratic_form(&self) -> bool {
        self.l.iter().chain([&self.c]).all(|f| f.as_constant() == Some(0.0))
    }

    pub fn scale(&self, s: f64) -> FiberIntegral {
        FiberIntegral::new(
            format!("{s}*{}", self.name),
            self.q.clone().map(|f| f * s),
            self.l.clone().map(|f| f * s),
            &self.c * s,
        )
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &FiberIntegral, b: f64) -> FiberIntegral {
        let mix = |f: &ScalarField, g: &ScalarField| f * a + g * b;
        FiberIntegral::new(
            format!("{a}*{}+{b}*{}", self.name, other.name),
            [mix(&self.q[0], &other.q[0]), mix(&self.q[1], &other.q[1]), mix(&self.q[2], &other.q[2])],
            [mix(&self.l[0], &other.l[0]), mix(&self.l[1], &other.l[1])],
            mix(&self.c, &other.c),
        )
    }

    /// Square of a linear integral `L·v`, as the quadratic form `L ⊗ L`.
    pub fn square_of_linear(&self) -> Result<FiberIntegral> {
        let zero = |f: &ScalarField| f.as_constant() == Some(0.0);
        if !(self.q.iter().all(zero) && zero(&self.c)) {
            return Err(Error::Precondition(format!("{} is not linear in the velocity", self.name)));
        }
        let [l1, l2] = &self.l;
        Ok(FiberIntegral::quadratic(
            format!("({})^2", self.name),
            [l1.square(), l1 * l2, l2.square()],
        ))
    }
}

/// `g(v, v)`.
pub fn energy(m: &MetricChart) -> FiberIntegral {
    FiberIntegral::quadratic("energy", m.coeffs().clone())
}

/// Maximum over sampled points of the Lie derivative of the metric along
/// `k`, relative to the size of the terms it is built from.
pub fn killing_defect(m: &MetricChart, k: &VectorField, n: usize) -> f64 {
    let g = m.coeffs();
    let dk = [[k[0].dx(), k[0].dy()], [k[1].dx(), k[1].dy()]];
    let dg = [g.clone().map(|c| c.dx()), g.clone().map(|c| c.dy())];
    let at = |s: &[ScalarField; 3], p: Point, i: usize, j: usize| {
        s[if i == j { 2 * i } else { 1 }].value(p[0], p[1])
    };
    let mut worst: f64 = 0.0;
    for p in m.sample_box().grid(n) {
        if !m.domain().contains(p) {
            continue;
        }
        let kv = [k[0].value(p[0], p[1]), k[1].value(p[0], p[1])];
        let dkv = |l: usize, i: usize| dk[l][i].value(p[0], p[1]);
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let terms = [
                kv[0] * at(&dg[0], p, i, j),
                kv[1] * at(&dg[1], p, i, j),
                at(g, p, 0, j) * dkv(0, i),
                at(g, p, 1, j) * dkv(1, i),
                at(g, p, i, 0) * dkv(0, j),
                at(g, p, i, 1) * dkv(1, j),
            ];
            let sum: f64 = terms.iter().sum();
            let size: f64 = terms.iter().map(|t| t.abs()).sum::<f64>();
            if !sum.is_finite() {
                return f64::INFINITY;
            }
            if size > 0.0 {
                worst = worst.max(sum.abs() / size);
            }
        }
    }
    worst
}

/// Killing-test threshold.
pub const KILLING_TOL: f64 = 1e-8;

/// `C(v) = g(K, v)` after a sampled check that `K` is Killing.
pub fn clairaut(m: &MetricChart, k: &VectorField) -> Result<FiberIntegral> {
    let defect = killing_defect(m, k, 30);
    if !(defect <= KILLING_TOL) {
        return Err(Error::NotKilling {
            chart: m.name().to_string(),
            defect,
            tol: KILLING_TOL,
        });
    }
    let [g11, g12, g22] = m.coeffs();
    let [k1, k2] = k;
    Ok(FiberIntegral::linear(
        format!("clairaut({}, {})", k1, k2),
        [g11 * k1 + g12 * k2, g12 * k1 + g22 * k2],
    ))
}

fn sampled_points(a: &MetricChart, b: &MetricChart, n: usize) -> Vec<Point> {
    a.sample_box()
        .grid(n)
        .into_iter()
        .filter(|&p| a.domain().contains(p) && b.domain().contains(p))
        .collect()
}

/// `I(v) = (det g / det ḡ)^{2/3} ḡ(v, v)`, the power taken as the squared
/// real cube root so that negative ratios stay on a real branch.
pub fn darboux_integral(g: &MetricChart, gbar: &MetricChart) -> Result<FiberIntegral> {
    let ratio = g.det_field() / gbar.det_field();
    for p in sampled_points(g, gbar, 20) {
        let r = ratio.value(p[0], p[1]);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Degenerate {
                chart: format!("det({})/det({})", g.name(), gbar.name()),
                x: p[0],
                y: p[1],
            });
        }
    }
    let w = ratio.two_thirds_power();
    Ok(FiberIntegral::quadratic(
        format!("darboux({}, {})", g.name(), gbar.name()),
        gbar.coeffs().clone().map(|c| &w * &c),
    ))
}

/// `ḡ = (det g / det J)² J`: the metric sharing its unparametrized
/// geodesics with `g` that has `J` as its Darboux integral.
pub fn metric_from_integral(g: &MetricChart, j: &FiberIntegral, name: &str) -> Result<MetricChart> {
    if !j.is_quadratic_form() {
        return Err(Error::Precondition(format!("{} is not a quadratic form", j.name)));
    }
    let [a, b, c] = &j.q;
    let det_j = a * c - b.square();
    let factor = (g.det_field() / &det_j).square();
    let coeffs = j.q.clone().map(|f| &factor * &f);
    let mut sig = None;
    for p in g.sample_box().grid(8) {
        if !g.domain().contains(p) {
            continue;
        }
        let d = det_j.value(p[0], p[1]);
        if d.is_finite() && d != 0.0 {
            sig = Signature::of_det(d);
            break;
        }
    }
    let sig = sig.ok_or_else(|| Error::Precondition(format!("{}: no nondegenerate sample point", j.name)))?;
    Ok(MetricChart::new(name, coeffs, sig)
        .with_domain(g.domain().clone())
        .with_sample_box(g.sample_box())
        .with_periods(g.periods()))
}

/// Placement of the profile functions in the quadratic Liouville integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiouvilleVariant {
    /// `(h1(x)+h2(y)) (h2(y) ẋ² − s·h1(x) ẏ²)`.
    Standard,
    /// `(h1(x)+h2(y)) (h1(y) ẋ² − s·h2(x) ẏ²)`.
    SwappedArguments,
}

/// Quadratic integral of `(h1(x)+h2(y)) (dx² + s dy²)`, where `h1` and `h2`
/// are given as functions of `x`.
pub fn liouville_integral(h1: &ScalarField, h2: &ScalarField, sign: f64) -> FiberIntegral {
    liouville_integral_variant(h1, h2, sign, LiouvilleVariant::Standard)
}

pub fn liouville_integral_variant(
    h1: &ScalarField,
    h2: &ScalarField,
    sign: f64,
    variant: LiouvilleVariant,
) -> FiberIntegral {
    let h2y = h2.in_y();
    let conf = h1 + &h2y;
    let (a, b) = match variant {
        LiouvilleVariant::Standard => (h2y.clone(), h1.clone()),
        LiouvilleVariant::SwappedArguments => (h1.in_y(), h2.clone()),
    };
    FiberIntegral::quadratic(
        match variant {
            LiouvilleVariant::Standard => "liouville",
            LiouvilleVariant::SwappedArguments => "liouville-swapped",
        },
        [&conf * &a, ScalarField::zero(), &conf * &b * (-sign)],
    )
}

/// Normalized Gram determinant of the fiber gradients of `a` and `b` at
/// `(p, v)`: `sin²` of the angle between them.
pub fn independence(a: &FiberIntegral, b: &FiberIntegral, p: Point, v: Vector) -> f64 {
    let u = a.fiber_gradient(p, v);
    let w = b.fiber_gradient(p, v);
    let uu = u[0] * u[0] + u[1] * u[1];
    let ww = w[0] * w[0] + w[1] * w[1];
    let cross = u[0] * w[1] - u[1] * w[0];
    if uu == 0.0 || ww == 0.0 {
        0.0
    } else {
        cross * cross / (uu * ww)
    }
}

pub const INDEPENDENCE_TOL: f64 = 1e-8;

/// Maximum deviation of `i` from its initial value along the trace. Each
/// deviation is taken relative to the largest term scale seen up to that
/// sample, the precision the value can carry after cancellation.
pub fn relative_drift(i: &FiberIntegral, trace: &GeodesicTrace) -> f64 {
    let s0 = trace.start();
    let (v0, mut scale) = i.value_and_scale(s0.position(), s0.velocity());
    let mut worst: f64 = 0.0;
    for s in &trace.samples {
        let (v, sc) = i.value_and_scale(s.position(), s.velocity());
        scale = scale.max(sc);
        let d = (v - v0).abs() / scale.max(f64::MIN_POSITIVE);
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    worst
}

pub const CONSERVATION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationOptions {
    pub n_samples: usize,
    pub t_max: f64,
    pub seed: u64,
    pub filter: CausalFilter,
    pub geodesic: GeodesicOptions,
    pub threshold: f64,
}

impl Default for ConservationOptions {
    fn default() -> Self {
        ConservationOptions {
            n_samples: 20,
            t_max: 5.0,
            seed: 0,
            filter: CausalFilter::Any,
            geodesic: GeodesicOptions::default(),
            threshold: CONSERVATION_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDrift {
    pub start: [f64; 4],
    pub duration: f64,
    pub termination: Termination,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub schema: u32,
    pub chart: String,
    pub integral: String,
    pub n_samples: usize,
    pub seed: u64,
    pub max_drift: f64,
    pub pass: bool,
    pub traces: Vec<TraceDrift>,
}

/// Drift of `i` along geodesics of `m` from the given starts.
pub fn check_conservation_from(
    m: &MetricChart,
    i: &FiberIntegral,
    starts: &[GeodesicState],
    opts: &ConservationOptions,
) -> Result<ConservationReport> {
    let traces: Vec<TraceDrift> = starts
        .par_iter()
        .map(|s0| {
            let tr = integrate_geodesic(m, *s0, opts.t_max, &opts.geodesic)?;
            Ok(TraceDrift {
                start: [s0.x, s0.y, s0.vx, s0.vy],
                duration: tr.duration(),
                termination: tr.termination,
                drift: relative_drift(i, &tr),
            })
        })
        .collect::<Result<_>>()?;
    let max_drift = traces.iter().map(|t| t.drift).fold(0.0, f64::max);
    Ok(ConservationReport {
        schema: 1,
        chart: m.name().to_string(),
        integral: i.name.clone(),
        n_samples: traces.len(),
        seed: opts.seed,
        max_drift,
        pass: max_drift <= opts.threshold,
        traces,
    })
}

/// Integrates `n_samples` seeded geodesics of `m` and reports the largest
/// relative drift of `i`.
pub fn check_conservation(m: &MetricChart, i: &FiberIntegral, opts: &ConservationOptions) -> Result<ConservationReport> {
    let starts = sample_states(m, opts.n_samples, opts.seed, opts.filter)?;
    check_conservation_from(m, i, &starts, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> MetricChart {
        MetricChart::new(
            "flat",
            [ScalarField::zero(), ScalarField::one(), ScalarField::zero()],
            Signature::Lorentzian,
        )
    }

    fn cp() -> MetricChart {
        let x = ScalarField::x();
        let y = ScalarField::y();
        let r2 = x.square() + y.square();
        MetricChart::new(
            "cp",
            [ScalarField::zero(), 1.0 / &r2, ScalarField::zero()],
            Signature::Lorentzian,
        )
        .with_domain(crate::domain::Domain::plane().with_constraint(r2 - 1e-12))
        .with_sample_box(crate::domain::Rect::new([0.5, 2.0], [0.5, 2.0]))
    }

    #[test]
    fn energy_values() {
        assert_eq!(energy(&flat()).value([3.0, 4.0], [1.0, 1.0]), 2.0);
        assert_eq!(energy(&cp()).value([1.0, 1.0], [1.0, 1.0]), 1.0);
    }

    #[test]
    fn clairaut_requires_killing() {
        let m = cp();
        let radial = [ScalarField::x(), ScalarField::y()];
        assert!(killing_defect(&m, &radial, 20) < 1e-12);
        let c = clairaut(&m, &radial).unwrap();
        // g(K, v) with K = (1, 1) at (1, 1): (v_x + v_y)/2
        assert!((c.value([1.0, 1.0], [0.4, 0.2]) - 0.3).abs() < 1e-15);
        let bad = [ScalarField::one(), ScalarField::zero()];
        assert!(matches!(clairaut(&m, &bad), Err(Error::NotKilling { .. })));
    }

    #[test]
    fn darboux_of_self_is_energy() {
        let m = cp();
        let i = darboux_integral(&m, &m).unwrap();
        let e = energy(&m);
        for p in m.sample_box().grid(5) {
            let v = [0.3, -1.2];
            assert!((i.value(p, v) - e.value(p, v)).abs() < 1e-12);
        }
        let i = darboux_integral(&m, &m.scaled(8.0)).unwrap();
        assert!((i.value([1.0, 1.0], [1.0, 1.0]) - 0.5 * e.value([1.0, 1.0], [1.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn metric_from_integral_round_trips_through_darboux() {
        let m = cp();
        let c = clairaut(&m, &[ScalarField::x(), ScalarField::y()]).unwrap();
        let j = energy(&m).combine(1.0, &c.square_of_linear().unwrap(), 0.5);
        let gbar = metric_from_integral(&m, &j, "gbar").unwrap();
        let i = darboux_integral(&m, &gbar).unwrap();
        for p in m.sample_box().grid(4) {
            let v = [0.7, 0.1];
            assert!((i.value(p, v) - j.value(p, v)).abs() < 1e-10 * j.value_and_scale(p, v).1);
        }
    }

    #[test]
    fn flat_liouville_is_conserved_exactly() {
        let m = MetricChart::new(
            "flat",
            [ScalarField::constant(5.0), ScalarField::zero(), ScalarField::constant(5.0)],
            Signature::Riemannian,
        );
        let i = liouville_integral(&ScalarField::constant(2.0), &ScalarField::constant(3.0), 1.0);
        let r = check_conservation(&m, &i, &Default::default()).unwrap();
        assert!(r.pass && r.max_drift < 1e-13, "{r:?}");
    }

    #[test]
    fn gram_determinant_detects_dependence() {
        let m = cp();
        let e = energy(&m);
        assert!(independence(&e, &e.scale(3.0), [1.0, 1.0], [0.2, 0.5]) < 1e-20);
        let c = clairaut(&m, &[ScalarField::x(), ScalarField::y()]).unwrap();
        assert!(independence(&e, &c, [1.0, 1.0], [0.2, 0.5]) > INDEPENDENCE_TOL);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{christoffel_from_jet, MetricChart};
use crate::{Point, Vector};

use super::ode::{dopri5, OdeSystem, RhsError, StopReason, Tolerances};

/// A point of the tangent bundle together with the affine parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl GeodesicState {
    pub fn new(p: Point, v: Vector) -> Self {
        GeodesicState {
            t: 0.0,
            x: p[0],
            y: p[1],
            vx: v[0],
            vy: v[1],
        }
    }

    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    pub fn velocity(&self) -> Vector {
        [self.vx, self.vy]
    }

    pub fn reversed(&self) -> Self {
        GeodesicState {
            vx: -self.vx,
            vy: -self.vy,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    TimeLimit,
    /// The Euclidean chart length limit was reached.
    LengthLimit,
    DomainExit,
    Singularity,
    ClosureDetected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    pub tol: Tolerances,
    /// Leaving the disk of this radius counts as a domain exit.
    pub escape_radius: f64,
    /// Stop once the Euclidean length of the chart curve reaches this.
    pub max_length: Option<f64>,
    /// Stop as singular once the largest metric coefficient or the speed
    /// exceeds this multiple of its starting value.
    pub blowup: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tol: Tolerances::default(),
            escape_radius: 1e6,
            max_length: None,
            blowup: 1e6,
        }
    }
}

/// Accepted integrator steps along one geodesic, with Euclidean chart
/// arclength carried alongside.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicTrace {
    pub samples: Vec<GeodesicState>,
    pub arclength: Vec<f64>,
    pub termination: Termination,
}

impl GeodesicTrace {
    pub fn start(&self) -> &GeodesicState {
        &self.samples[0]
    }

    pub fn end(&self) -> &GeodesicState {
        self.samples.last().expect("trace has at least the initial sample")
    }

    pub fn duration(&self) -> f64 {
        self.end().t - self.start().t
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap_or(&0.0)
    }

    /// Cubic Hermite interpolation of the position at parameter `t`.
    pub fn position_at(&self, t: f64) -> Point {
        let s = &self.samples;
        let i = match s.binary_search_by(|q| q.t.partial_cmp(&t).unwrap()) {
            Ok(i) => return s[i].position(),
            Err(0) => return s[0].position(),
            Err(i) if i >= s.len() => return s[s.len() - 1].position(),
            Err(i) => i - 1,
        };
        let (a, b) = (&s[i], &s[i + 1]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let h00 = 2.0 * u.powi(3) - 3.0 * u * u + 1.0;
        let h10 = u.powi(3) - 2.0 * u * u + u;
        let h01 = -2.0 * u.powi(3) + 3.0 * u * u;
        let h11 = u.powi(3) - u * u;
        [
            h00 * a.x + h10 * h * a.vx + h01 * b.x + h11 * h * b.vx,
            h00 * a.y + h10 * h * a.vy + h01 * b.y + h11 * h * b.vy,
        ]
    }

    fn param_at_length(&self, target: f64) -> f64 {
        let ls = &self.arclength;
        let i = ls.partition_point(|&l| l < target);
        if i == 0 {
            return self.samples[0].t;
        }
        if i >= ls.len() {
            return self.end().t;
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let (la, lb) = (ls[i - 1], ls[i]);
        // Hermite interpolation of s(t), with ds/dt = |v|
        let speed = |q: &GeodesicState| q.vx.hypot(q.vy);
        let h = b.t - a.t;
        let s_of = |u: f64| {
            let h00 = 2.0 * u.powi(3) - 3.0 * u * u + 1.0;
            let h10 = u.powi(3) - 2.0 * u * u + u;
            let h01 = -2.0 * u.powi(3) + 3.0 * u * u;
            let h11 = u.powi(3) - u * u;
            h00 * la + h10 * h * speed(a) + h01 * lb + h11 * h * speed(b)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if s_of(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        a.t + 0.5 * (lo + hi) * h
    }

    /// `n + 1` points equally spaced in Euclidean chart arclength on `[0, length]`.
    pub fn resample_by_length(&self, length: f64, n: usize) -> Vec<Point> {
        (0..=n)
            .map(|k| self.position_at(self.param_at_length(length * k as f64 / n as f64)))
            .collect()
    }

    /// `g(v, v)` at every sample.
    pub fn energies(&self, m: &MetricChart) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| crate::metric::sym_quad(&m.coeffs_unchecked(s.position()), s.velocity(), s.velocity()))
            .collect()
    }
}

/// Relative distance from a finite chart edge below which a trace is
/// treated as having left the domain. Coefficients that blow up at the
/// edge lose all precision there.
pub const EDGE_GUARD: f64 = 1e-7;

/// Geodesic spray `ẍ^k = −Γ^k_ij ẋ^i ẋ^j` plus Euclidean arclength.
pub(crate) struct GeodesicSystem<'a> {
    pub(crate) chart: &'a MetricChart,
    pub(crate) escape_radius: f64,
    pub(crate) scratch: Vec<f64>,
}

impl<'a> GeodesicSystem<'a> {
    pub(crate) fn new(chart: &'a MetricChart, escape_radius: f64) -> Self {
        GeodesicSystem {
            chart,
            escape_radius,
            scratch: Vec::new(),
        }
    }

    pub(crate) fn acceleration(&mut self, p: Point, v: Vector) -> Result<Vector, RhsError> {
        if p[0].hypot(p[1]) > self.escape_radius || self.chart.domain().rect.near_edge(p, EDGE_GUARD) {
            return Err(RhsError::OutOfDomain);
        }
        let jet = match self.chart.jet1_with(p, &mut self.scratch) {
            Ok(j) => j,
            Err(Error::DomainViolation { .. }) => return Err(RhsError::OutOfDomain),
            Err(_) => return Err(RhsError::NonFinite),
        };
        let gamma = christoffel_from_jet(&jet).ok_or(RhsError::NonFinite)?;
        let mut a = [0.0; 2];
        for (k, ak) in a.iter_mut().enumerate() {
            let g = &gamma[k];
            *ak = -(g[0][0] * v[0] * v[0] + 2.0 * g[0][1] * v[0] * v[1] + g[1][1] * v[1] * v[1]);
        }
        Ok(a)
    }
}

impl OdeSystem<5> for GeodesicSystem<'_> {
    fn rhs(&mut self, _t: f64, y: &[f64; 5]) -> Result<[f64; 5], RhsError> {
        let a = self.acceleration([y[0], y[1]], [y[2], y[3]])?;
        Ok([y[2], y[3], a[0], a[1], y[2].hypot(y[3])])
    }
}

pub(crate) fn termination_of(reason: StopReason, stopped_by_length: bool) -> Termination {
    match reason {
        StopReason::Reached => Termination::TimeLimit,
        StopReason::Stopped if stopped_by_length => Termination::LengthLimit,
        StopReason::Stopped => Termination::ClosureDetected,
        StopReason::DomainExit => Termination::DomainExit,
        StopReason::Singularity | StopReason::MaxSteps => Termination::Singularity,
    }
}

pub(crate) fn check_start(m: &MetricChart, s0: &GeodesicState, t_max: f64) -> Result<()> {
    if !(t_max > 0.0) {
        return Err(Error::Precondition(format!("t_max must be positive, got {t_max}")));
    }
    if !m.domain().contains(s0.position()) {
        return Err(Error::DomainViolation {
            what: m.name().to_string(),
            x: s0.x,
            y: s0.y,
        });
    }
    Ok(())
}

/// Integrates the geodesic through `s0` for parameter length `t_max`.
///
/// Domain exit, escape and step underflow terminate the trace normally; the
/// reason is recorded in [`GeodesicTrace::termination`].
pub fn integrate_geodesic(
    m: &MetricChart,
    s0: GeodesicState,
    t_max: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicTrace> {
    check_start(m, &s0, t_max)?;
    let mut sys = GeodesicSystem::new(m, opts.escape_radius);
    let mut samples = vec![s0];
    let mut arclength = vec![0.0];
    let mut by_length = false;
    let mut blown = false;
    let coeff_size = |p: Point| m.coeffs_unchecked(p).iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let c_lim = opts.blowup * coeff_size(s0.position());
    let v_lim = opts.blowup * s0.vx.hypot(s0.vy);
    let reason = dopri5(
        &mut sys,
        s0.t,
        [s0.x, s0.y, s0.vx, s0.vy, 0.0],
        s0.t + t_max,
        &opts.tol,
        |t, y, _| {
            samples.push(GeodesicState {
                t,
                x: y[0],
                y: y[1],
                vx: y[2],
                vy: y[3],
            });
            arclength.push(y[4]);
            if opts.max_length.is_some_and(|l| y[4] >= l) {
                by_length = true;
                return false;
            }
            if coeff_size([y[0], y[1]]) > c_lim || y[2].hypot(y[3]) > v_lim {
                blown = true;
                return false;
            }
            true
        },
    );
    let termination = if blown {
        Termination::Singularity
    } else {
        termination_of(reason, by_length)
    };
    Ok(GeodesicTrace {
        samples,
        arclength,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain, Rect};
    use crate::expr::ScalarField;
    use crate::metric::Signature;
    use std::f64::consts::PI;

    fn flat() -> MetricChart {
        MetricChart::new(
            "flat",
            [ScalarField::zero(), ScalarField::one(), ScalarField::zero()],
            Signature::Lorentzian,
        )
    }

    fn sphere() -> MetricChart {
        MetricChart::new(
            "sphere",
            [ScalarField::one(), ScalarField::zero(), ScalarField::x().sin().square()],
            Signature::Riemannian,
        )
        .with_domain(Domain::rect([0.0, PI], [f64::NEG_INFINITY, f64::INFINITY]))
        .with_sample_box(Rect::new([0.3, PI - 0.3], [0.0, 2.0 * PI]))
        .with_periods([None, Some(2.0 * PI)])
    }

    #[test]
    fn flat_geodesics_are_straight_lines() {
        let tr = integrate_geodesic(&flat(), GeodesicState::new([0.0, 0.0], [1.0, 2.0]), 3.0, &Default::default())
            .unwrap();
        assert_eq!(tr.termination, Termination::TimeLimit);
        for s in &tr.samples {
            assert!((s.x - s.t).abs() < 1e-12 && (s.y - 2.0 * s.t).abs() < 1e-12);
        }
        assert!((tr.length() - 3.0 * 5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn equator_returns_after_two_pi() {
        let tr = integrate_geodesic(
            &sphere(),
            GeodesicState::new([PI / 2.0, 0.0], [0.0, 1.0]),
            2.0 * PI,
            &Default::default(),
        )
        .unwrap();
        let e = tr.end();
        assert!((e.x - PI / 2.0).abs() < 1e-6);
        assert!((e.y - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn length_limit_and_resampling() {
        let opts = GeodesicOptions {
            max_length: Some(1.0),
            ..Default::default()
        };
        let tr = integrate_geodesic(&flat(), GeodesicState::new([0.0, 0.0], [0.6, 0.8]), 100.0, &opts).unwrap();
        assert_eq!(tr.termination, Termination::LengthLimit);
        let pts = tr.resample_by_length(1.0, 10);
        for (k, p) in pts.iter().enumerate() {
            let s = k as f64 / 10.0;
            assert!((p[0] - 0.6 * s).abs() < 1e-9 && (p[1] - 0.8 * s).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_start_is_rejected() {
        let m = sphere();
        assert!(integrate_geodesic(&m, GeodesicState::new([4.0, 0.0], [1.0, 0.0]), 1.0, &Default::default()).is_err());
        assert!(integrate_geodesic(&m, GeodesicState::new([1.0, 0.0], [1.0, 0.0]), 0.0, &Default::default()).is_err());
    }

    #[test]
    fn meridian_hits_the_pole_as_domain_exit() {
        let tr = integrate_geodesic(&sphere(), GeodesicState::new([1.0, 0.0], [-1.0, 0.0]), 5.0, &Default::default())
            .unwrap();
        assert_eq!(tr.termination, Termination::DomainExit);
        assert!(tr.end().x < 1e-6);
    }
}

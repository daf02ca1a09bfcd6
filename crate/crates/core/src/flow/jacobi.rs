use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{christoffel_with_derivative, Christoffel, MetricChart};
use crate::{Point, Vector};

use super::geodesic::{check_start, termination_of, EDGE_GUARD, GeodesicOptions, GeodesicState, GeodesicTrace, Termination};
use super::ode::{advance, dopri5, OdeSystem, RhsError};

/// A Jacobi field value along a geodesic: `j` is the field and `dj` its
/// covariant derivative along the base curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiState {
    pub base: GeodesicState,
    pub j: Vector,
    pub dj: Vector,
}

/// Geodesic plus its linearization. State is `[x, y, vx, vy, Jx, Jy, Wx, Wy]`
/// where `W` is the coordinate derivative of `J`.
struct JacobiSystem<'a> {
    chart: &'a MetricChart,
    escape_radius: f64,
    scratch: Vec<f64>,
}

impl JacobiSystem<'_> {
    fn gamma_at(&mut self, p: Point) -> Result<Christoffel, RhsError> {
        let jet = self.jet(p)?;
        let (g, _) = christoffel_with_derivative(&jet).ok_or(RhsError::NonFinite)?;
        Ok(g)
    }

    fn jet(&mut self, p: Point) -> Result<crate::metric::Jet2, RhsError> {
        if p[0].hypot(p[1]) > self.escape_radius || self.chart.domain().rect.near_edge(p, EDGE_GUARD) {
            return Err(RhsError::OutOfDomain);
        }
        match self.chart.jet2_with(p, &mut self.scratch) {
            Ok(j) => Ok(j),
            Err(Error::DomainViolation { .. }) => Err(RhsError::OutOfDomain),
            Err(_) => Err(RhsError::NonFinite),
        }
    }
}

impl OdeSystem<8> for JacobiSystem<'_> {
    fn rhs(&mut self, _t: f64, s: &[f64; 8]) -> Result<[f64; 8], RhsError> {
        let jet = self.jet([s[0], s[1]])?;
        let (g, dg) = christoffel_with_derivative(&jet).ok_or(RhsError::NonFinite)?;
        let v = [s[2], s[3]];
        let j = [s[4], s[5]];
        let w = [s[6], s[7]];
        let mut out = [s[2], s[3], 0.0, 0.0, s[6], s[7], 0.0, 0.0];
        for k in 0..2 {
            let mut acc = 0.0;
            let mut lin = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    acc += g[k][a][b] * v[a] * v[b];
                    lin += 2.0 * g[k][a][b] * v[a] * w[b];
                    for (l, dgl) in dg.iter().enumerate() {
                        lin += dgl[k][a][b] * j[l] * v[a] * v[b];
                    }
                }
            }
            out[2 + k] = -acc;
            out[6 + k] = -lin;
        }
        Ok(out)
    }
}

fn covariant(g: &Christoffel, v: Vector, j: Vector, w: Vector) -> Vector {
    let mut d = w;
    for (k, dk) in d.iter_mut().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                *dk += g[k][a][b] * v[a] * j[b];
            }
        }
    }
    d
}

fn to_state(sys: &mut JacobiSystem, t: f64, s: &[f64; 8]) -> JacobiState {
    let base = GeodesicState {
        t,
        x: s[0],
        y: s[1],
        vx: s[2],
        vy: s[3],
    };
    let dj = match sys.gamma_at([s[0], s[1]]) {
        Ok(g) => covariant(&g, [s[2], s[3]], [s[4], s[5]], [s[6], s[7]]),
        Err(_) => [f64::NAN; 2],
    };
    JacobiState {
        base,
        j: [s[4], s[5]],
        dj,
    }
}

fn initial_vector(sys: &mut JacobiSystem, j0: &JacobiState) -> Result<[f64; 8]> {
    let b = &j0.base;
    let g = sys.gamma_at(b.position()).map_err(|_| Error::Degenerate {
        chart: sys.chart.name().to_string(),
        x: b.x,
        y: b.y,
    })?;
    // W = DJ − Γ(v, J)
    let corr = covariant(&g, b.velocity(), j0.j, [0.0; 2]);
    Ok([
        b.x,
        b.y,
        b.vx,
        b.vy,
        j0.j[0],
        j0.j[1],
        j0.dj[0] - corr[0],
        j0.dj[1] - corr[1],
    ])
}

/// Integrates the Jacobi equation along the geodesic of `trace`, starting
/// from `j0` at the trace's initial point, over the trace's duration.
pub fn integrate_jacobi(
    m: &MetricChart,
    trace: &GeodesicTrace,
    j0: JacobiState,
    opts: &GeodesicOptions,
) -> Result<Vec<JacobiState>> {
    let start = trace.start();
    let b = &j0.base;
    if (b.x, b.y, b.vx, b.vy) != (start.x, start.y, start.vx, start.vy) {
        return Err(Error::Precondition("Jacobi initial state is not based at the trace start".into()));
    }
    let mut sys = JacobiSystem {
        chart: m,
        escape_radius: opts.escape_radius,
        scratch: Vec::new(),
    };
    let y0 = initial_vector(&mut sys, &j0)?;
    let mut raw = vec![(start.t, y0)];
    dopri5(&mut sys, start.t, y0, start.t + trace.duration(), &opts.tol, |t, y, _| {
        raw.push((t, *y));
        true
    });
    Ok(raw.into_iter().map(|(t, y)| to_state(&mut sys, t, &y)).collect())
}

/// Conjugate points along one geodesic, as sampled evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateScan {
    pub times: Vec<f64>,
    /// Parameter length actually covered.
    pub covered: f64,
    pub termination: Termination,
}

fn normal_component(s: &[f64; 8]) -> f64 {
    s[4] * s[3] - s[5] * s[2]
}

/// Zeros of the Jacobi field with `J(0) = 0` and `J'(0)` Euclidean-normal to
/// the initial velocity, detected by sign changes of `J × v` and refined by
/// bisection to `1e-8` in the parameter.
pub fn find_conjugate_points(
    m: &MetricChart,
    s0: GeodesicState,
    t_max: f64,
    opts: &GeodesicOptions,
) -> Result<ConjugateScan> {
    check_start(m, &s0, t_max)?;
    if s0.vx == 0.0 && s0.vy == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut sys = JacobiSystem {
        chart: m,
        escape_radius: opts.escape_radius,
        scratch: Vec::new(),
    };
    let y0 = [s0.x, s0.y, s0.vx, s0.vy, 0.0, 0.0, -s0.vy, s0.vx];
    let mut brackets = Vec::new();
    let mut prev = (s0.t, y0);
    let mut last_t = s0.t;
    let reason = dopri5(&mut sys, s0.t, y0, s0.t + t_max, &opts.tol, |t, y, _| {
        let (pt, py) = prev;
        if pt > s0.t {
            let (a, b) = (normal_component(&py), normal_component(y));
            if a != 0.0 && (b == 0.0 || a.signum() != b.signum()) {
                brackets.push((pt, py, t));
            }
        }
        prev = (t, *y);
        last_t = t;
        true
    });
    let mut times = Vec::with_capacity(brackets.len());
    for (ta, ya, tb) in brackets {
        let sa = normal_component(&ya).signum();
        let (mut lo, mut hi) = (ta, tb);
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            match advance(&mut sys, ta, ya, mid, &opts.tol) {
                Some(ym) if normal_component(&ym).signum() == sa => lo = mid,
                Some(_) => hi = mid,
                None => break,
            }
        }
        times.push(0.5 * (lo + hi) - s0.t);
    }
    Ok(ConjugateScan {
        times,
        covered: last_t - s0.t,
        termination: termination_of(reason, false),
    })
}

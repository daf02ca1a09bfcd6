use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricChart;
use crate::Point;

use super::geodesic::{check_start, termination_of, GeodesicOptions, GeodesicState, GeodesicSystem, Termination};
use super::ode::{advance, dopri5, StopReason};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub geodesic: GeodesicOptions,
    /// Bound on both the position and the unit-direction mismatch.
    pub tol: f64,
    /// Section crossings farther than this from the start are ignored.
    pub capture_radius: f64,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            geodesic: GeodesicOptions::default(),
            tol: 1e-6,
            capture_radius: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ClosureOutcome {
    Closed {
        period: f64,
        position_error: f64,
        direction_error: f64,
    },
    NotClosed {
        termination: Termination,
        /// Closest section return seen, as `max(position, direction)` error.
        best_miss: Option<f64>,
    },
}

impl ClosureOutcome {
    pub fn is_closed(&self) -> bool {
        matches!(self, ClosureOutcome::Closed { .. })
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            ClosureOutcome::Closed { period, .. } => Some(*period),
            ClosureOutcome::NotClosed { .. } => None,
        }
    }
}

fn wrapped_offset(periods: [Option<f64>; 2], p0: Point, p: Point) -> [f64; 2] {
    let mut d = [p[0] - p0[0], p[1] - p0[1]];
    for (di, per) in d.iter_mut().zip(periods) {
        if let Some(per) = per {
            *di -= per * (*di / per).round();
        }
    }
    d
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// First return of position and oriented direction to the initial ones,
/// found on the section through the start orthogonal to the initial
/// direction. Coordinates with a declared period are compared modulo it.
pub fn detect_closure(
    m: &MetricChart,
    s0: GeodesicState,
    t_max: f64,
    opts: &ClosureOptions,
) -> Result<ClosureOutcome> {
    check_start(m, &s0, t_max)?;
    if s0.vx == 0.0 && s0.vy == 0.0 {
        return Err(Error::ZeroVector);
    }
    let periods = m.periods();
    let p0 = s0.position();
    let d0 = unit(s0.velocity());
    let section = |y: &[f64; 5]| {
        let d = wrapped_offset(periods, p0, [y[0], y[1]]);
        (d[0] * d0[0] + d[1] * d0[1], d[0].hypot(d[1]))
    };
    let mismatch = |y: &[f64; 5]| {
        let d = wrapped_offset(periods, p0, [y[0], y[1]]);
        let u = unit([y[2], y[3]]);
        (d[0].hypot(d[1]), (u[0] - d0[0]).hypot(u[1] - d0[1]))
    };

    let mut sys = GeodesicSystem::new(m, opts.geodesic.escape_radius);
    let y0 = [s0.x, s0.y, s0.vx, s0.vy, 0.0];
    // keep steps short enough that one step cannot skip a return
    let mut tol = opts.geodesic.tol;
    tol.h_max = tol.h_max.min(0.5 * opts.capture_radius / s0.vx.hypot(s0.vy));
    let mut prev = (s0.t, y0);
    let mut found = None;
    let mut best_miss: Option<f64> = None;
    let reason = dopri5(&mut sys, s0.t, y0, s0.t + t_max, &tol, |t, y, _| {
        let (ta, ya) = prev;
        prev = (t, *y);
        let (sa, ra) = section(&ya);
        let (sb, rb) = section(y);
        if !(sa < 0.0 && sb >= 0.0 && ra.min(rb) < opts.capture_radius) {
            return true;
        }
        let mut inner = GeodesicSystem::new(m, opts.geodesic.escape_radius);
        let (mut lo, mut hi) = (ta, t);
        let mut y_hit = *y;
        for _ in 0..80 {
            if hi - lo <= 1e-13 * t.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match advance(&mut inner, ta, ya, mid, &tol) {
                Some(ym) if section(&ym).0 < 0.0 => lo = mid,
                Some(ym) => {
                    hi = mid;
                    y_hit = ym;
                }
                None => break,
            }
        }
        let (pe, de) = mismatch(&y_hit);
        let miss = pe.max(de);
        best_miss = Some(best_miss.map_or(miss, |b| b.min(miss)));
        if pe <= opts.tol && de <= opts.tol {
            found = Some((hi - s0.t, pe, de));
            return false;
        }
        true
    });
    Ok(match found {
        Some((period, position_error, direction_error)) => ClosureOutcome::Closed {
            period,
            position_error,
            direction_error,
        },
        None => ClosureOutcome::NotClosed {
            termination: termination_of(
                if reason == StopReason::Stopped { StopReason::Reached } else { reason },
                false,
            ),
            best_miss,
        },
    })
}

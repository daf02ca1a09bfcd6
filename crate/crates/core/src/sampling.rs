//! Seeded initial conditions: positions uniform in the chart's sample box
//! (kept only inside the domain), directions uniform on the Euclidean unit
//! circle, filtered by causal character.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::GeodesicState;
use crate::metric::{sym_quad, CausalClass, MetricChart};
use crate::{Point, Vector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalFilter {
    #[default]
    Any,
    Spacelike,
    Timelike,
    /// Spacelike or timelike.
    NonNull,
    /// Solved for `g(v, v) = 0`, then normalized to Euclidean length one.
    Lightlike,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_in(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.gen::<f64>()
}

pub fn sample_point(m: &MetricChart, r: &mut ChaCha8Rng) -> Point {
    let b = m.sample_box();
    [uniform_in(r, b.x[0], b.x[1]), uniform_in(r, b.y[0], b.y[1])]
}

pub fn unit_direction(r: &mut ChaCha8Rng) -> Vector {
    let phi = uniform_in(r, 0.0, std::f64::consts::TAU);
    [phi.cos(), phi.sin()]
}

/// Euclidean-unit null directions at a point of a Lorentzian chart.
pub fn null_directions(m: &MetricChart, p: Point) -> Result<[Vector; 2]> {
    let [a, b, c] = m.coeffs_at(p)?;
    let disc = b * b - a * c;
    if !(disc > 0.0) {
        return Err(Error::Signature {
            chart: m.name().to_string(),
            message: format!("no null directions at ({:.4}, {:.4})", p[0], p[1]),
        });
    }
    let s = disc.sqrt();
    let norm = |v: Vector| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    // roots of a vx² + 2b vx vy + c vy² = 0 without cancellation
    let q = -b - b.signum() * s;
    Ok([norm([q, a]), norm([c, q])])
}

fn accepts(m: &MetricChart, p: Point, v: Vector, filter: CausalFilter) -> bool {
    let class = match m.classify(p, v, None) {
        Ok(c) => c,
        Err(_) => return false,
    };
    match filter {
        CausalFilter::Any => true,
        CausalFilter::Spacelike => class == CausalClass::Spacelike,
        CausalFilter::Timelike => class == CausalClass::Timelike,
        CausalFilter::NonNull => class != CausalClass::Lightlike,
        CausalFilter::Lightlike => class == CausalClass::Lightlike,
    }
}

/// `n` initial states, reproducible from `seed`. `extra` can reject
/// candidates further.
pub fn sample_states_with(
    m: &MetricChart,
    n: usize,
    seed: u64,
    filter: CausalFilter,
    extra: impl Fn(Point, Vector) -> bool,
) -> Result<Vec<GeodesicState>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    let budget = 1000 * n.max(1);
    for _ in 0..budget {
        if out.len() == n {
            break;
        }
        let p = sample_point(m, &mut r);
        if !m.domain().contains(p) || m.coeffs_at(p).is_err() {
            continue;
        }
        let v = if filter == CausalFilter::Lightlike {
            match null_directions(m, p) {
                Ok(ds) => {
                    let d = ds[usize::from(r.gen::<bool>())];
                    if r.gen::<bool>() {
                        d
                    } else {
                        [-d[0], -d[1]]
                    }
                }
                Err(_) => continue,
            }
        } else {
            unit_direction(&mut r)
        };
        if accepts(m, p, v, filter) && extra(p, v) {
            out.push(GeodesicState::new(p, v));
        }
    }
    if out.len() < n {
        return Err(Error::Precondition(format!(
            "{}: found only {} of {n} admissible initial conditions",
            m.name(),
            out.len()
        )));
    }
    Ok(out)
}

pub fn sample_states(m: &MetricChart, n: usize, seed: u64, filter: CausalFilter) -> Result<Vec<GeodesicState>> {
    sample_states_with(m, n, seed, filter, |_, _| true)
}

/// Rescales `v` so that `|g(v, v)| = 1`; null vectors are returned unchanged.
pub fn normalize(m: &MetricChart, p: Point, v: Vector) -> Result<Vector> {
    let q = sym_quad(&m.coeffs_at(p)?, v, v);
    if q == 0.0 || m.classify(p, v, None)? == CausalClass::Lightlike {
        return Ok(v);
    }
    let s = q.abs().sqrt();
    Ok([v[0] / s, v[1] / s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarField;
    use crate::metric::Signature;

    fn lorentz() -> MetricChart {
        let x = ScalarField::x();
        MetricChart::new(
            "l",
            [x.sin() * 0.3, ScalarField::one(), x.cos() + 0.5],
            Signature::Lorentzian,
        )
    }

    #[test]
    fn same_seed_same_states() {
        let m = lorentz();
        let a = sample_states(&m, 10, 7, CausalFilter::Spacelike).unwrap();
        let b = sample_states(&m, 10, 7, CausalFilter::Spacelike).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(m.metric_eval(s.position(), s.velocity(), s.velocity()).unwrap() > 0.0);
        }
    }

    #[test]
    fn null_directions_are_null() {
        let m = lorentz();
        for s in sample_states(&m, 20, 1, CausalFilter::Lightlike).unwrap() {
            let q = m.metric_eval(s.position(), s.velocity(), s.velocity()).unwrap();
            assert!(q.abs() < 1e-12, "{q}");
        }
    }

    #[test]
    fn impossible_filter_is_an_error() {
        let m = MetricChart::new(
            "e",
            [ScalarField::one(), ScalarField::zero(), ScalarField::one()],
            Signature::Riemannian,
        );
        assert!(sample_states(&m, 3, 0, CausalFilter::Timelike).is_err());
    }
}

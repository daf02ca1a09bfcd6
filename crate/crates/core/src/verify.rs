//! Pointwise identity checks with JSON-friendly reports.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expr::ScalarField;
use crate::integrals::{
    check_conservation, liouville_integral_variant, ConservationOptions, FiberIntegral, LiouvilleVariant,
};
use crate::metric::MetricChart;
use crate::sampling::rng;
use crate::zoo::{
    matrix_identity_check, liouville_metric, shifted_metric, tannery_deformed, tannery_reparam_x, tannery_riemannian,
    ShiftedSpec, ShiftReading, TannerySpec,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub check: String,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_residual: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl VerifyReport {
    fn new(check: &str, n: usize, seed: u64, tol: f64, max_residual: f64) -> Self {
        VerifyReport {
            schema: 1,
            check: check.to_string(),
            n,
            seed,
            tol,
            max_residual,
            pass: n > 0 && max_residual <= tol,
            detail: None,
        }
    }
}

fn signed(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let m = r.gen_range(lo..hi);
    if r.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// The matrix identity at `n` random tuples `(a, ℓ, z, μ, β)` with
/// `1 + ℓz` and `1 + mz` kept away from zero.
pub fn matrix_identity_random(n: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let a = signed(&mut r, 0.1, 5.0);
        let l = signed(&mut r, 0.0, 3.0);
        let z = signed(&mut r, 0.0, 3.0);
        let mu = signed(&mut r, 0.0, 3.0);
        let beta = signed(&mut r, 0.2, 3.0);
        let m = l + mu * a;
        if (1.0 + l * z).abs() < 0.1 || (1.0 + m * z).abs() < 0.1 {
            continue;
        }
        worst = worst.max(matrix_identity_check(a, l, z, mu, beta)?);
        done += 1;
    }
    Ok(VerifyReport::new("lemma23", n, seed, tol, worst))
}

/// The period relation of the shifted construction at `n` random
/// `(x, shift)` pairs, `x ∈ [0, 1)`, `shift ∈ {−2, …, 3}`.
pub fn shift_relation(spec: &ShiftedSpec, n: usize, seed: u64, reading: ShiftReading, tol: f64) -> Result<VerifyReport> {
    let s = shifted_metric(spec)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x = r.gen_range(0.0..1.0);
        let k = r.gen_range(-2..=3);
        worst = worst.max(s.relation_residual(x, k, reading));
    }
    let mut rep = VerifyReport::new("sec31-relation", n, seed, tol, worst);
    rep.detail = Some(serde_json::json!({ "reading": reading }));
    Ok(rep)
}

/// `sin²x/(1 − 2 sin²x) = −cosh²t` and `x ∈ (π/4, 3π/4)` at `n` evenly
/// spaced `t ∈ [−3, 3]`, plus monotonicity.
pub fn tannery_x(n: usize, tol: f64) -> VerifyReport {
    let mut worst: f64 = 0.0;
    let mut prev = f64::NEG_INFINITY;
    let mut ordered = true;
    for i in 0..n {
        let t = -3.0 + 6.0 * i as f64 / (n.max(2) - 1) as f64;
        let x = tannery_reparam_x(t);
        let s2 = x.sin().powi(2);
        let lhs = s2 / (1.0 - 2.0 * s2);
        let rhs = -t.cosh().powi(2);
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
        ordered &= x > prev && x > PI / 4.0 && x < 3.0 * PI / 4.0;
        prev = x;
    }
    if !ordered {
        worst = f64::INFINITY;
    }
    VerifyReport::new("tannery-x", n, 0, tol, worst)
}

/// Unit vectors of the undeformed metric with `sin⁴r θ̇² = 1/2` at `n`
/// random points of the band, tested for nullity in the deformed chart
/// (relative to the coefficient scale).
pub fn tannery_lightlike(n: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    let spec = TannerySpec::round().with_l(-2.0);
    let (g, _) = tannery_deformed(&spec)?;
    let (g0, _) = tannery_riemannian(&spec)?;
    let sb = g.sample_box();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p = [r.gen_range(sb.x[0]..sb.x[1]), r.gen_range(sb.y[0]..sb.y[1])];
        let s2 = p[0].sin().powi(2);
        let th = 1.0 / (2f64.sqrt() * s2);
        let g0c = g0.coeffs_at(p)?;
        let rdot2 = (1.0 - g0c[2] * th * th) / g0c[0];
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let v = [sign * rdot2.max(0.0).sqrt(), th];
        let c = g.coeffs_at(p)?;
        let scale = c[0].abs() * v[0] * v[0] + c[2].abs() * v[1] * v[1];
        worst = worst.max(g.metric_eval(p, v, v)?.abs() / scale);
    }
    Ok(VerifyReport::new("tannery-lightlike", n, seed, tol, worst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleI0Report {
    pub schema: u32,
    pub seed: u64,
    pub standard_drift: f64,
    pub swapped_drift: f64,
    pub standard_conserved: bool,
    pub swapped_conserved: bool,
    /// The standard form is conserved and the swapped one is not.
    pub pass: bool,
}

/// Conservation of `(h1(x) + h2(y))(h2(y) ẋ² − s h1(x) ẏ²)` against the
/// variant with the arguments of `h1`, `h2` exchanged.
pub fn liouville_i0(h1: &ScalarField, h2: &ScalarField, sign: f64, seed: u64) -> Result<LiouvilleI0Report> {
    let m: MetricChart = liouville_metric(h1, h2, sign, Some(1.0))?;
    let opts = ConservationOptions { seed, ..Default::default() };
    let drift = |v| -> Result<f64> {
        let i: FiberIntegral = liouville_integral_variant(h1, h2, sign, v);
        Ok(check_conservation(&m, &i, &opts)?.max_drift)
    };
    let standard_drift = drift(LiouvilleVariant::Standard)?;
    let swapped_drift = drift(LiouvilleVariant::SwappedArguments)?;
    let standard_conserved = standard_drift <= opts.threshold;
    let swapped_conserved = swapped_drift <= opts.threshold;
    Ok(LiouvilleI0Report {
        schema: 1,
        seed,
        standard_drift,
        swapped_drift,
        standard_conserved,
        swapped_conserved,
        pass: standard_conserved && !swapped_conserved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        assert!(matrix_identity_random(200, 1, 1e-10).unwrap().pass);
        assert!(tannery_x(100, 1e-10).pass);
        assert!(tannery_lightlike(50, 2, 1e-8).unwrap().pass);
        let spec = ShiftedSpec::standard();
        assert!(shift_relation(&spec, 50, 3, ShiftReading::Definition, 1e-8).unwrap().pass);
        assert!(!shift_relation(&spec, 50, 3, ShiftReading::Cubed, 1e-8).unwrap().pass);
    }
}

//! Sampled deciders: projective equivalence, isometry and affinity of maps,
//! and the search for isometries of Liouville metrics swapping the factors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expr::ScalarField;
use crate::flow::{integrate_geodesic, GeodesicOptions, GeodesicState, Termination};
use crate::integrals::{darboux_integral, relative_drift, FiberIntegral, CONSERVATION_TOL};
use crate::metric::{pullback, ChartMap, MetricChart};
use crate::sampling::{sample_states_with, CausalFilter};
use crate::{Point, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOptions {
    pub n_traces: usize,
    pub seed: u64,
    /// Euclidean chart length of each compared segment.
    pub length: f64,
    pub drift_tol: f64,
    pub hausdorff_tol: f64,
    /// Points per resampled segment.
    pub resample: usize,
    pub min_complete: usize,
    pub geodesic: GeodesicOptions,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        let mut geodesic = GeodesicOptions::default();
        geodesic.tol.h_max = 0.02;
        EquivalenceOptions {
            n_traces: 20,
            seed: 0,
            length: 1.0,
            drift_tol: CONSERVATION_TOL,
            hausdorff_tol: 1e-4,
            resample: 200,
            min_complete: 5,
            geodesic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub schema: u32,
    pub chart: String,
    pub other: String,
    pub verdict: Verdict,
    pub max_drift: f64,
    pub drift_pass: bool,
    pub max_hausdorff: f64,
    pub mean_hausdorff: f64,
    pub overlap_pass: bool,
    pub n_traces: usize,
    /// Pairs of segments that both reached full length.
    pub n_complete: usize,
    pub seed: u64,
}

/// Symmetric discrete Hausdorff distance between two point sets.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |p: &[Point], q: &[Point]| {
        p.iter()
            .map(|u| q.iter().map(|w| (u[0] - w[0]).hypot(u[1] - w[1])).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

struct PairOutcome {
    drift: f64,
    hausdorff: Option<f64>,
}

fn compare_pair(g: &MetricChart, gbar: &MetricChart, i: &FiberIntegral, s0: GeodesicState, opts: &EquivalenceOptions) -> Result<PairOutcome> {
    let go = GeodesicOptions {
        max_length: Some(opts.length),
        ..opts.geodesic
    };
    let t_max = 1e4;
    let a = integrate_geodesic(g, s0, t_max, &go)?;
    let b = integrate_geodesic(gbar, s0, t_max, &go)?;
    let drift = relative_drift(i, &a);
    let done = |t: &crate::flow::GeodesicTrace| t.termination == Termination::LengthLimit;
    let hausdorff = (done(&a) && done(&b)).then(|| {
        hausdorff(
            &a.resample_by_length(opts.length, opts.resample),
            &b.resample_by_length(opts.length, opts.resample),
        )
    });
    Ok(PairOutcome { drift, hausdorff })
}

/// Darboux conservation along geodesics of `g`, cross-checked by shooting
/// both metrics from the same point in the same direction and comparing
/// the segments as point sets after resampling by Euclidean chart length.
pub fn check_projective_equivalence(g: &MetricChart, gbar: &MetricChart, opts: &EquivalenceOptions) -> Result<EquivalenceReport> {
    let i = darboux_integral(g, gbar)?;
    let starts = sample_states_with(g, opts.n_traces, opts.seed, CausalFilter::Any, |p, _| {
        gbar.domain().contains(p) && gbar.coeffs_at(p).is_ok()
    })?;
    let outcomes: Vec<PairOutcome> = starts
        .par_iter()
        .map(|s0| compare_pair(g, gbar, &i, *s0, opts))
        .collect::<Result<_>>()?;
    let max_drift = outcomes.iter().map(|o| o.drift).fold(0.0, f64::max);
    let hs: Vec<f64> = outcomes.iter().filter_map(|o| o.hausdorff).collect();
    let max_hausdorff = hs.iter().cloned().fold(0.0, f64::max);
    let mean_hausdorff = if hs.is_empty() {
        0.0
    } else {
        hs.iter().sum::<f64>() / hs.len() as f64
    };
    let drift_pass = max_drift <= opts.drift_tol;
    let overlap_pass = max_hausdorff <= opts.hausdorff_tol;
    let verdict = if !drift_pass || (!hs.is_empty() && !overlap_pass) {
        Verdict::NotEquivalent
    } else if hs.len() < opts.min_complete {
        Verdict::Inconclusive
    } else {
        Verdict::Equivalent
    };
    Ok(EquivalenceReport {
        schema: 1,
        chart: g.name().to_string(),
        other: gbar.name().to_string(),
        verdict,
        max_drift,
        drift_pass,
        max_hausdorff,
        mean_hausdorff,
        overlap_pass: overlap_pass && hs.len() >= opts.min_complete,
        n_traces: starts.len(),
        n_complete: hs.len(),
        seed: opts.seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapCheckOptions {
    pub tol: f64,
    /// Grid resolution over the chart's sample box.
    pub grid: usize,
}

impl Default for MapCheckOptions {
    fn default() -> Self {
        MapCheckOptions { tol: 1e-9, grid: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub schema: u32,
    pub chart: String,
    pub map: String,
    pub holds: bool,
    /// Largest relative defect seen.
    pub max_defect: f64,
    pub n_points: usize,
    /// For affinity: whether `φ*g` is a constant multiple of `g` on samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proportional: Option<bool>,
}

fn map_points(g: &MetricChart, phi: &ChartMap, n: usize) -> Vec<Point> {
    g.sample_box()
        .grid(n)
        .into_iter()
        .filter(|&p| g.coeffs_at(p).is_ok() && g.coeffs_at(phi.apply(p)).is_ok())
        .collect()
}

/// `φ*g = g` on a sampled grid, relative to the coefficient size.
pub fn check_isometry(g: &MetricChart, phi: &ChartMap, opts: &MapCheckOptions) -> Result<MapReport> {
    let pb = pullback(g, phi);
    let pts = map_points(g, phi, opts.grid);
    let mut worst: f64 = 0.0;
    for &p in &pts {
        let (a, b) = (g.coeffs_unchecked(p), pb.coeffs_unchecked(p));
        let scale = a.iter().chain(&b).fold(0.0f64, |s, c| s.max(c.abs())).max(f64::MIN_POSITIVE);
        let d = (0..3).fold(0.0f64, |s, i| s.max((a[i] - b[i]).abs()));
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d / scale });
    }
    Ok(MapReport {
        schema: 1,
        chart: g.name().to_string(),
        map: phi.name.clone(),
        holds: !pts.is_empty() && worst <= opts.tol,
        max_defect: worst,
        n_points: pts.len(),
        proportional: None,
    })
}

/// Christoffel symbols of `φ*g` and `g` agree on samples. Proportionality
/// of the two metrics is reported alongside.
pub fn check_affinity(g: &MetricChart, phi: &ChartMap, opts: &MapCheckOptions) -> Result<MapReport> {
    let pb = pullback(g, phi);
    let pts = map_points(g, phi, opts.grid);
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for &p in &pts {
        let (ga, gb) = (g.christoffel(p)?, pb.christoffel(p)?);
        let flat = |c: &crate::metric::Christoffel| c.iter().flatten().flatten().cloned().collect::<Vec<f64>>();
        let (a, b) = (flat(&ga), flat(&gb));
        let scale = a.iter().chain(&b).fold(0.0f64, |s, c| s.max(c.abs())).max(1e-300);
        let d = a.iter().zip(&b).fold(0.0f64, |s, (u, w)| s.max((u - w).abs()));
        worst = worst.max(d / scale);
        let (ca, cb) = (g.coeffs_unchecked(p), pb.coeffs_unchecked(p));
        for i in 0..3 {
            if ca[i].abs() > 1e-12 && cb[i].abs() > 1e-12 {
                ratios.push(cb[i] / ca[i]);
            }
        }
    }
    let zero_mismatch = pts.iter().any(|&p| {
        let (ca, cb) = (g.coeffs_unchecked(p), pb.coeffs_unchecked(p));
        (0..3).any(|i| (ca[i].abs() <= 1e-12) != (cb[i].abs() <= 1e-12))
    });
    let spread = match ratios.first() {
        Some(&r0) => ratios.iter().map(|r| (r - r0).abs() / r0.abs()).fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(MapReport {
        schema: 1,
        chart: g.name().to_string(),
        map: phi.name.clone(),
        holds: !pts.is_empty() && worst <= opts.tol,
        max_defect: worst,
        n_points: pts.len(),
        proportional: Some(!zero_mismatch && spread <= opts.tol),
    })
}

/// Largest relative difference between `I(φ(p), dφ v)` and `I(p, v)` on
/// sampled points and directions.
pub fn preservation_defect(i: &FiberIntegral, phi: &ChartMap, g: &MetricChart, grid: usize) -> f64 {
    let dirs: [Vector; 3] = [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]];
    let mut worst: f64 = 0.0;
    for p in map_points(g, phi, grid) {
        let q = phi.apply(p);
        for v in dirs {
            let w = phi.push(p, v);
            let (a, sa) = i.value_and_scale(p, v);
            let (b, sb) = i.value_and_scale(q, w);
            let scale = sa.max(sb).max(f64::MIN_POSITIVE);
            worst = worst.max((a - b).abs() / scale);
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `h2(x + k) = h1(x) + c`, map `(x, y) ↦ (y + k, x + k)`.
    Swap,
    /// `h2(−x − k) = h1(x) + c`, map `(x, y) ↦ (−y + k, −x − k)`.
    AntiSwap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleIsometryResult {
    pub found: bool,
    pub k: f64,
    pub c: f64,
    pub orientation: Orientation,
    /// Residual at the reported `k`.
    pub residual: f64,
    /// Best residual over the whole grid, per orientation.
    pub min_swap: f64,
    pub min_anti: f64,
    /// `k ≡ 0` modulo half a period, or `h1` constant.
    pub degenerate: bool,
}

impl LiouvilleIsometryResult {
    pub fn map(&self) -> ChartMap {
        let x = ScalarField::x();
        let y = ScalarField::y();
        let k = self.k;
        match self.orientation {
            Orientation::Swap => ChartMap::new("liouville-swap", &y + k, &x + k).with_inverse(&y - k, &x - k),
            Orientation::AntiSwap => {
                ChartMap::new("liouville-anti-swap", k - &y, -(&x + k)).with_inverse(-(&y + k), k - &x)
            }
        }
    }
}

pub const SEARCH_TOL: f64 = 1e-8;

struct Residuals {
    xs: Vec<f64>,
    h1: Vec<f64>,
}

fn variance(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = v.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n, mean)
}

impl Residuals {
    fn offset(&self, h2: &ScalarField, k: f64, o: Orientation) -> (f64, f64) {
        variance(self.xs.iter().zip(&self.h1).map(|(&x, &h)| {
            let arg = match o {
                Orientation::Swap => x + k,
                Orientation::AntiSwap => -x - k,
            };
            h2.value(arg, 0.0) - h
        }))
    }

    fn periodicity(&self, h1: &ScalarField, k: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.h1)
            .map(|(&x, &h)| (h1.value(x + 2.0 * k, 0.0) - h).powi(2))
            .sum::<f64>()
            / self.xs.len() as f64
    }

    fn total(&self, h1: &ScalarField, h2: &ScalarField, k: f64, o: Orientation) -> f64 {
        let per = match o {
            Orientation::Swap => self.periodicity(h1, k),
            Orientation::AntiSwap => 0.0,
        };
        self.offset(h2, k, o).0 + per
    }
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid search over `k ∈ [0, period)` refined by golden-section search.
/// Non-degenerate solutions are preferred, then [`Orientation::Swap`],
/// then the smallest `k`.
pub fn liouville_isometry_search(h1: &ScalarField, h2: &ScalarField, period: f64, grid: usize) -> LiouvilleIsometryResult {
    let m = 256;
    let xs: Vec<f64> = (0..m).map(|i| period * i as f64 / m as f64).collect();
    let res = Residuals {
        h1: xs.iter().map(|&x| h1.value(x, 0.0)).collect(),
        xs,
    };
    let h1_constant = variance(res.h1.iter().cloned()).0 < 1e-20;
    let grid = grid.max(3);
    let dk = period / grid as f64;
    let mut candidates = Vec::new();
    let mut mins = [f64::INFINITY; 2];
    for (oi, o) in [Orientation::Swap, Orientation::AntiSwap].into_iter().enumerate() {
        let r = |k: f64| res.total(h1, h2, k, o);
        let vals: Vec<f64> = (0..grid).map(|i| r(i as f64 * dk)).collect();
        for i in 0..grid {
            let (prev, next) = (vals[(i + grid - 1) % grid], vals[(i + 1) % grid]);
            if vals[i] <= prev && vals[i] <= next {
                let k0 = i as f64 * dk;
                let k = golden(&r, k0 - dk, k0 + dk).rem_euclid(period);
                let k = if (period - k) < 1e-9 * period { 0.0 } else { k };
                let (k, rk) = if r(k) < vals[i] { (k, r(k)) } else { (k0, vals[i]) };
                mins[oi] = mins[oi].min(rk);
                if rk <= SEARCH_TOL {
                    candidates.push((o, k, rk));
                }
            }
        }
    }
    let degenerate_k = |k: f64| {
        if h1_constant {
            return true;
        }
        let t = (2.0 * k).rem_euclid(period);
        t.min(period - t) < 1e-6 * period
    };
    candidates.sort_by(|a, b| {
        let key = |c: &(Orientation, f64, f64)| (degenerate_k(c.1), c.0 != Orientation::Swap);
        key(a).cmp(&key(b)).then(a.1.partial_cmp(&b.1).unwrap())
    });
    candidates.dedup_by(|a, b| a.0 == b.0 && (a.1 - b.1).abs() < 1e-7);
    match candidates.first() {
        Some(&(o, k, rk)) => LiouvilleIsometryResult {
            found: true,
            k,
            c: res.offset(h2, k, o).1,
            orientation: o,
            residual: rk,
            min_swap: mins[0],
            min_anti: mins[1],
            degenerate: degenerate_k(k),
        },
        None => LiouvilleIsometryResult {
            found: false,
            k: f64::NAN,
            c: f64::NAN,
            orientation: Orientation::Swap,
            residual: mins[0].min(mins[1]),
            min_swap: mins[0],
            min_anti: mins[1],
            degenerate: h1_constant,
        },
    }
}

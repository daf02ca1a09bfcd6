//! Explicit metrics, queryable by name.

mod liouville;
mod planar;
mod shifted;
mod tannery;

pub use liouville::{liouville_instance, liouville_metric};
pub use planar::{
    band_metric, clifton_pohl, g_matrix, matrix_identity_check, matrix_identity_sides, punctured_plane_family, q_matrix,
    BandMetricSpec, Mat,
};
pub use shifted::{shifted_metric, SeamReport, Shifted, ShiftedSpec, ShiftReading, SEAM_TOL};
pub use tannery::{clairaut_truncation, tannery_deformed, tannery_reparam_x, tannery_riemannian, TannerySpec};

use serde::{Deserialize, Serialize};

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::integrals::{clairaut, darboux_integral, energy, liouville_integral, FiberIntegral};
use crate::metric::{pullback, ChartMap};
use crate::metric::{MetricChart, Signature};
use crate::VectorField;

/// `2 dxdy` on the plane.
pub fn flat() -> MetricChart {
    MetricChart::new(
        "flat",
        [ScalarField::zero(), ScalarField::one(), ScalarField::zero()],
        Signature::Lorentzian,
    )
    .with_sample_box(Rect::new([-1.0, 1.0], [-1.0, 1.0]))
}

/// `dr² + sin²r dθ²`.
pub fn sphere() -> MetricChart {
    tannery_riemannian(&TannerySpec::round())
        .expect("round sphere parameters are valid")
        .0
        .with_name("sphere")
}

/// `sin²(πx)`, the default band profile.
pub fn default_profile() -> ScalarField {
    (std::f64::consts::PI * ScalarField::x()).sin().square()
}

/// Parameters for catalogue entries; unset fields take per-entry defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZooParams {
    pub a: Option<f64>,
    pub l: Option<f64>,
    pub eps: Option<f64>,
    /// Profile in `x` (prefix or infix syntax).
    pub f: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    /// Odd function in `x` for the Tannery family.
    pub h: Option<String>,
    pub h1: Option<String>,
    pub h2: Option<String>,
    pub sign: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub name: &'static str,
    pub chart: MetricChart,
    pub killing: Option<VectorField>,
    /// Energy first, then any further integrals known to be exact.
    pub integrals: Vec<FiberIntegral>,
    pub maps: Vec<ChartMap>,
    /// A metric with the same unparametrized geodesics, when one is known.
    pub partner: Option<MetricChart>,
    pub report: Option<serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogueItem {
    pub name: &'static str,
    pub description: &'static str,
}

pub const CATALOGUE: &[CatalogueItem] = &[
    CatalogueItem {
        name: "flat",
        description: "2 dxdy on the plane",
    },
    CatalogueItem {
        name: "sphere",
        description: "round sphere dr² + sin²r dθ², θ of period 2π",
    },
    CatalogueItem {
        name: "clifton-pohl",
        description: "2/(x²+y²) dxdy on the punctured plane, radial Killing field",
    },
    CatalogueItem {
        name: "band",
        description: "aℓ/(1+ℓf)² dx² + 2a/(1+ℓf) dxdy + af/(1+ℓf) dy², geodesically equivalent to 2dxdy + f dy² [--f --a --l]",
    },
    CatalogueItem {
        name: "punctured-family",
        description: "(det g/det J)² J with J = a g + ℓ C² from the Clifton–Pohl chart and radial field, −|a| < ℓ < |a| [--a --l]",
    },
    CatalogueItem {
        name: "tannery",
        description: "(p/q + h(cos r))² dr² + sin²r dθ², h odd [--p --q --h]",
    },
    CatalogueItem {
        name: "tannery-deformed",
        description: "−(1+ℓ sin²r)⁻² ((p/q + h(cos r))² dr² + sin²r (1+ℓ sin²r) dθ²), Lorentzian band for ℓ < −1 [--l]",
    },
    CatalogueItem {
        name: "tannery-truncation",
        description: "(det g/det J)² J with J = g − C²/ℓ² on {g(∂θ,∂θ) < ℓ²} over the Tannery chart [--l]",
    },
    CatalogueItem {
        name: "sec31",
        description: "A³(Λ/(1+Λf)² dx² + 2/(1+Λf) dxdy + f/(1+Λf) dy²) with τ(x,y) = (x+1,y) projective but not affine [--f --a --eps]",
    },
    CatalogueItem {
        name: "liouville",
        description: "(h1(x) + h2(y))(dx² ± dy²) with its quadratic integral [--h1 --h2 --sign]",
    },
];

pub fn names() -> Vec<&'static str> {
    CATALOGUE.iter().map(|c| c.name).collect()
}

fn field(src: &Option<String>, default: impl FnOnce() -> ScalarField) -> Result<ScalarField> {
    match src {
        Some(s) => ScalarField::parse(s),
        None => Ok(default()),
    }
}

fn tannery_spec(p: &ZooParams) -> Result<TannerySpec> {
    Ok(TannerySpec {
        p: p.p.unwrap_or(1),
        q: p.q.unwrap_or(1),
        h: field(&p.h, ScalarField::zero)?,
        l: 0.0,
    })
}

fn with_clairaut(chart: &MetricChart, k: &VectorField) -> Result<Vec<FiberIntegral>> {
    Ok(vec![energy(chart), clairaut(chart, k)?])
}

fn entry_name(name: &str) -> Result<&'static str> {
    CATALOGUE
        .iter()
        .find(|c| c.name == name)
        .map(|c| c.name)
        .ok_or_else(|| Error::UnknownChart {
            name: name.to_string(),
            available: names().join(", "),
        })
}

/// Builds the catalogue entry `name` with the given parameters.
pub fn entry(name: &str, p: &ZooParams) -> Result<ZooEntry> {
    let name = entry_name(name)?;
    let dy: VectorField = [ScalarField::zero(), ScalarField::one()];
    let mut maps = Vec::new();
    let mut report = None;
    let mut partner = None;
    let (chart, killing, integrals) = match name {
        "flat" => {
            let m = flat();
            let ints = with_clairaut(&m, &dy)?;
            (m, Some(dy), ints)
        }
        "sphere" => {
            let m = sphere();
            let ints = with_clairaut(&m, &dy)?;
            (m, Some(dy), ints)
        }
        "clifton-pohl" => {
            let (m, k) = clifton_pohl();
            let ints = with_clairaut(&m, &k)?;
            (m, Some(k), ints)
        }
        "band" => {
            let f = field(&p.f, default_profile)?;
            let spec = BandMetricSpec::new(f, [f64::NEG_INFINITY, f64::INFINITY], p.a.unwrap_or(2.0), p.l.unwrap_or(0.3));
            let m = band_metric(&spec)?;
            let base = band_metric(&spec.base())?;
            let mut ints = with_clairaut(&m, &dy)?;
            ints.push(darboux_integral(&m, &base)?);
            partner = Some(base);
            (m, Some(dy), ints)
        }
        "punctured-family" => {
            let (m, k) = punctured_plane_family(p.a.unwrap_or(1.0), p.l.unwrap_or(0.5))?;
            let ints = with_clairaut(&m, &k)?;
            partner = Some(clifton_pohl().0);
            (m, Some(k), ints)
        }
        "tannery" => {
            let (m, k) = tannery_riemannian(&tannery_spec(p)?)?;
            let ints = with_clairaut(&m, &k)?;
            (m, Some(k), ints)
        }
        "tannery-deformed" => {
            let spec = tannery_spec(p)?.with_l(p.l.unwrap_or(-2.0));
            let (m, k) = tannery_deformed(&spec)?;
            let (g0, _) = tannery_riemannian(&spec)?;
            let mut ints = with_clairaut(&m, &k)?;
            let g0 = g0.restricted(m.domain());
            ints.push(darboux_integral(&m, &g0)?);
            partner = Some(g0);
            (m, Some(k), ints)
        }
        "tannery-truncation" => {
            let (g0, k) = tannery_riemannian(&tannery_spec(p)?)?;
            let m = clairaut_truncation(&g0, &k, p.l.unwrap_or(1.0))?;
            let ints = with_clairaut(&m, &k)?;
            partner = Some(g0.restricted(m.domain()));
            (m, Some(k), ints)
        }
        "sec31" => {
            let mut spec = ShiftedSpec::standard();
            if let Some(f) = &p.f {
                spec.f = ScalarField::parse(f)?;
            }
            spec.a = p.a.unwrap_or(spec.a);
            spec.eps = p.eps.unwrap_or(spec.eps);
            let s = shifted_metric(&spec)?;
            let mut ints = with_clairaut(&s.chart, &s.killing)?;
            let pb = pullback(&s.chart, &s.tau);
            ints.push(darboux_integral(&s.chart, &pb)?);
            partner = Some(pb);
            report = Some(serde_json::json!({ "m": s.m, "seams": s.seams }));
            maps.push(s.tau.clone());
            (s.chart, Some(s.killing), ints)
        }
        "liouville" => {
            let (d1, d2) = liouville_instance();
            let h1 = field(&p.h1, || d1)?;
            let h2 = field(&p.h2, || d2)?;
            let sign = p.sign.unwrap_or(1.0);
            let m = liouville_metric(&h1, &h2, sign, Some(1.0))?;
            let ints = vec![energy(&m), liouville_integral(&h1, &h2, sign)];
            (m, None, ints)
        }
        _ => unreachable!("catalogue names are exhaustive"),
    };
    Ok(ZooEntry {
        name,
        chart,
        killing,
        integrals,
        maps,
        partner,
        report,
    })
}

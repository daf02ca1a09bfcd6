//! Text description of a chart (TOML). Coefficients and domain constraints
//! are written in the prefix expression syntax, e.g.
//!
//! ```toml
//! name = "clifton-pohl"
//! signature = "lorentzian"
//! g11 = "0"
//! g12 = "(/ 1 (+ (^ x 2) (^ y 2)))"
//! g22 = "0"
//! killing = ["x", "y"]
//!
//! [domain]
//! x = [-inf, inf]
//! y = [-inf, inf]
//! positive = ["(- (+ (^ x 2) (^ y 2)) 1e-12)"]
//!
//! [sample_box]
//! x = [0.5, 2.0]
//! y = [0.5, 2.0]
//! ```

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Rect};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::VectorField;

use super::{MetricChart, Signature};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDescription {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub positive: Vec<String>,
}

impl Default for DomainDescription {
    fn default() -> Self {
        DomainDescription {
            x: [f64::NEG_INFINITY, f64::INFINITY],
            y: [f64::NEG_INFINITY, f64::INFINITY],
            positive: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodsDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDescription {
    pub name: String,
    pub signature: Signature,
    pub g11: String,
    pub g12: String,
    pub g22: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing: Option<[String; 2]>,
    #[serde(default)]
    pub domain: DomainDescription,
    pub sample_box: Rect,
    #[serde(default)]
    pub periods: PeriodsDescription,
}

impl ChartDescription {
    pub fn from_chart(m: &MetricChart, killing: Option<&VectorField>) -> Self {
        let [g11, g12, g22] = m.coeffs().clone().map(|c| c.to_string());
        let [px, py] = m.periods();
        ChartDescription {
            name: m.name().to_string(),
            signature: m.signature(),
            g11,
            g12,
            g22,
            killing: killing.map(|k| [k[0].to_string(), k[1].to_string()]),
            domain: DomainDescription {
                x: m.domain().rect.x,
                y: m.domain().rect.y,
                positive: m.domain().positive.iter().map(|h| h.to_string()).collect(),
            },
            sample_box: m.sample_box(),
            periods: PeriodsDescription { x: px, y: py },
        }
    }

    pub fn to_chart(&self) -> Result<(MetricChart, Option<VectorField>)> {
        let parse = |s: &str| ScalarField::parse(s);
        let coeffs = [parse(&self.g11)?, parse(&self.g12)?, parse(&self.g22)?];
        let mut domain = Domain::rect(self.domain.x, self.domain.y);
        for h in &self.domain.positive {
            domain = domain.with_constraint(parse(h)?);
        }
        if !self.sample_box.is_bounded() {
            return Err(Error::Format("sample_box must be bounded".into()));
        }
        let chart = MetricChart::new(self.name.clone(), coeffs, self.signature)
            .with_domain(domain)
            .with_sample_box(self.sample_box)
            .with_periods([self.periods.x, self.periods.y]);
        let killing = match &self.killing {
            Some([a, b]) => Some([parse(a)?, parse(b)?]),
            None => None,
        };
        Ok((chart, killing))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CP: &str = r#"
name = "clifton-pohl"
signature = "lorentzian"
g11 = "0"
g12 = "(/ 1 (+ (^ x 2) (^ y 2)))"
g22 = "0"
killing = ["x", "y"]

[domain]
x = [-inf, inf]
y = [-inf, inf]
positive = ["(- (+ (^ x 2) (^ y 2)) 1e-12)"]

[sample_box]
x = [0.5, 2.0]
y = [0.5, 2.0]
"#;

    #[test]
    fn parses_documented_example() {
        let desc = ChartDescription::from_toml(CP).unwrap();
        let (m, k) = desc.to_chart().unwrap();
        assert_eq!(m.metric_eval([1.0, 1.0], [1.0, 0.0], [0.0, 1.0]).unwrap(), 0.5);
        assert!(!m.domain().contains([0.0, 0.0]));
        assert_eq!(k.unwrap()[1].value(0.0, 3.0), 3.0);
    }

    #[test]
    fn toml_round_trip() {
        let desc = ChartDescription::from_toml(CP).unwrap();
        let text = desc.to_toml().unwrap();
        assert_eq!(ChartDescription::from_toml(&text).unwrap(), desc);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(ChartDescription::from_toml("name = 3"), Err(Error::Format(_))));
        let mut desc = ChartDescription::from_toml(CP).unwrap();
        desc.g11 = "(nope x)".into();
        assert!(matches!(desc.to_chart(), Err(Error::Parse { .. })));
    }
}

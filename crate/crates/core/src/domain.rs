//! Chart domains: an open coordinate rectangle cut down by strict
//! inequalities `h(x, y) > 0`.

use serde::{Deserialize, Serialize};

use crate::expr::ScalarField;

/// Axis-aligned rectangle; bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub const fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Rect { x, y }
    }

    pub const fn plane() -> Self {
        Rect {
            x: [f64::NEG_INFINITY, f64::INFINITY],
            y: [f64::NEG_INFINITY, f64::INFINITY],
        }
    }

    pub fn contains_open(&self, p: [f64; 2]) -> bool {
        p[0] > self.x[0] && p[0] < self.x[1] && p[1] > self.y[0] && p[1] < self.y[1]
    }

    /// Whether `p` lies within `rel·(1 + |b|)` of some finite edge `b`.
    pub fn near_edge(&self, p: [f64; 2], rel: f64) -> bool {
        [(p[0], self.x), (p[1], self.y)].iter().any(|&(c, [lo, hi])| {
            (lo.is_finite() && c - lo < rel * (1.0 + lo.abs())) || (hi.is_finite() && hi - c < rel * (1.0 + hi.abs()))
        })
    }

    pub fn is_bounded(&self) -> bool {
        self.x.iter().chain(&self.y).all(|b| b.is_finite())
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x: [self.x[0].max(other.x[0]), self.x[1].min(other.x[1])],
            y: [self.y[0].max(other.y[0]), self.y[1].min(other.y[1])],
        }
    }

    /// `n × n` cell-centred grid.
    pub fn grid(&self, n: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let u = (i as f64 + 0.5) / n as f64;
                let v = (j as f64 + 0.5) / n as f64;
                pts.push([
                    self.x[0] + u * (self.x[1] - self.x[0]),
                    self.y[0] + v * (self.y[1] - self.y[0]),
                ]);
            }
        }
        pts
    }
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub rect: Rect,
    /// Each field must be strictly positive.
    pub positive: Vec<ScalarField>,
}

impl Domain {
    pub fn plane() -> Self {
        Domain {
            rect: Rect::plane(),
            positive: Vec::new(),
        }
    }

    pub fn rect(x: [f64; 2], y: [f64; 2]) -> Self {
        Domain {
            rect: Rect::new(x, y),
            positive: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, h: ScalarField) -> Self {
        self.positive.push(h);
        self
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.rect.contains_open(p) && self.positive.iter().all(|h| h.value(p[0], p[1]) > 0.0)
    }

    pub fn intersect(&self, other: &Domain) -> Domain {
        let mut positive = self.positive.clone();
        positive.extend(other.positive.iter().cloned());
        Domain {
            rect: self.rect.intersect(&other.rect),
            positive,
        }
    }

    /// Preimage under `(x, y) -> (u, v)`: rectangle bounds become constraints.
    pub fn preimage(&self, u: &ScalarField, v: &ScalarField) -> Domain {
        let mut positive = Vec::new();
        for (f, [lo, hi]) in [(u, self.rect.x), (v, self.rect.y)] {
            if lo.is_finite() {
                positive.push(f - lo);
            }
            if hi.is_finite() {
                positive.push(hi - f);
            }
        }
        positive.extend(self.positive.iter().map(|h| h.compose(u, v)));
        Domain {
            rect: Rect::plane(),
            positive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctured_plane() {
        let x = ScalarField::x();
        let y = ScalarField::y();
        let d = Domain::plane().with_constraint(x.square() + y.square() - 1e-12);
        assert!(d.contains([1.0, 0.0]));
        assert!(!d.contains([0.0, 0.0]));
    }

    #[test]
    fn preimage_under_translation() {
        let d = Domain::rect([0.0, 1.0], [f64::NEG_INFINITY, f64::INFINITY]);
        let pre = d.preimage(&(ScalarField::x() + 1.0), &ScalarField::y());
        assert!(pre.contains([-0.5, 7.0]));
        assert!(!pre.contains([0.5, 7.0]));
    }

    #[test]
    fn grid_is_inside() {
        let r = Rect::new([0.0, 1.0], [2.0, 3.0]);
        let g = r.grid(4);
        assert_eq!(g.len(), 16);
        assert!(g.iter().all(|p| r.contains_open(*p)));
    }
}

//! Scalar fields on the plane as immutable, shared expression trees.
//!
//! A [`ScalarField`] is a cheap handle (`Arc`) to a node. Partial derivatives
//! are built symbolically and cached inside the node, so repeated
//! differentiation of the same subtree returns the same shared tree. That
//! sharing is what keeps second derivatives of the larger coefficient
//! functions tractable; evaluation of many related fields at once should go
//! through a [`Tape`], which visits each shared node once.

mod parse;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub use parse::{parse_infix, parse_prefix};
pub use tape::Tape;

/// Coordinate variable of the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

/// Elementary one-argument functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Asin,
    Sqrt,
    Abs,
    Cbrt,
    Floor,
    Sign,
}

impl Func {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Func::Sin => u.sin(),
            Func::Cos => u.cos(),
            Func::Sinh => u.sinh(),
            Func::Cosh => u.cosh(),
            Func::Exp => u.exp(),
            Func::Log => u.ln(),
            Func::Asin => u.asin(),
            Func::Sqrt => u.sqrt(),
            Func::Abs => u.abs(),
            Func::Cbrt => u.cbrt(),
            Func::Floor => u.floor(),
            Func::Sign => {
                if u > 0.0 {
                    1.0
                } else if u < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Asin => "asin",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Cbrt => "cbrt",
            Func::Floor => "floor",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "asin" | "arcsin" => Func::Asin,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "cbrt" => Func::Cbrt,
            "floor" => Func::Floor,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Const(f64),
    Var(Var),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Neg(ScalarField),
    /// Real power with a constant exponent.
    Pow(ScalarField, f64),
    Unary(Func, ScalarField),
    /// `exp(-1/t) * t^(-k)` for `t > 0`, zero otherwise. Closed under
    /// differentiation, which makes the smooth step exactly differentiable.
    Bump(ScalarField, i32),
    /// `t - P * floor(t / P)`: reduction of the argument to one period.
    Wrap(ScalarField, f64),
}

pub(crate) struct Node {
    pub(crate) kind: Kind,
    dx: OnceLock<ScalarField>,
    dy: OnceLock<ScalarField>,
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// A smooth (or piecewise smooth) real function of `(x, y)`.
#[derive(Clone)]
pub struct ScalarField(Arc<Node>);

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({self})")
    }
}

pub(crate) fn bump_value(t: f64, k: i32) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        let e = (-1.0 / t).exp();
        if e == 0.0 {
            0.0
        } else {
            e * t.powi(-k)
        }
    }
}

pub(crate) fn pow_value(u: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        u.powi(p as i32)
    } else {
        u.powf(p)
    }
}

pub(crate) fn wrap_value(u: f64, period: f64) -> f64 {
    u - period * (u / period).floor()
}

impl ScalarField {
    fn from_kind(kind: Kind) -> Self {
        ScalarField(Arc::new(Node {
            kind,
            dx: OnceLock::new(),
            dy: OnceLock::new(),
        }))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: f64) -> Self {
        Self::from_kind(Kind::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn x() -> Self {
        Self::from_kind(Kind::Var(Var::X))
    }

    pub fn y() -> Self {
        Self::from_kind(Kind::Var(Var::Y))
    }

    pub fn var(v: Var) -> Self {
        Self::from_kind(Kind::Var(v))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.0.kind {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_const(&self, c: f64) -> bool {
        self.as_constant() == Some(c)
    }

    pub fn apply(&self, func: Func) -> Self {
        if let Some(c) = self.as_constant() {
            return Self::constant(func.apply(c));
        }
        Self::from_kind(Kind::Unary(func, self.clone()))
    }

    pub fn sin(&self) -> Self {
        self.apply(Func::Sin)
    }
    pub fn cos(&self) -> Self {
        self.apply(Func::Cos)
    }
    pub fn sinh(&self) -> Self {
        self.apply(Func::Sinh)
    }
    pub fn cosh(&self) -> Self {
        self.apply(Func::Cosh)
    }
    pub fn exp(&self) -> Self {
        self.apply(Func::Exp)
    }
    pub fn ln(&self) -> Self {
        self.apply(Func::Log)
    }
    pub fn asin(&self) -> Self {
        self.apply(Func::Asin)
    }
    pub fn sqrt(&self) -> Self {
        self.apply(Func::Sqrt)
    }
    pub fn abs(&self) -> Self {
        self.apply(Func::Abs)
    }
    pub fn cbrt(&self) -> Self {
        self.apply(Func::Cbrt)
    }
    pub fn floor(&self) -> Self {
        self.apply(Func::Floor)
    }
    pub fn signum(&self) -> Self {
        self.apply(Func::Sign)
    }

    pub fn powf(&self, p: f64) -> Self {
        if p == 0.0 {
            return Self::one();
        }
        if p == 1.0 {
            return self.clone();
        }
        if let Some(c) = self.as_constant() {
            return Self::constant(pow_value(c, p));
        }
        Self::from_kind(Kind::Pow(self.clone(), p))
    }

    pub fn powi(&self, n: i32) -> Self {
        self.powf(n as f64)
    }

    pub fn square(&self) -> Self {
        self.powi(2)
    }

    /// `exp(-1/t) t^(-k)` for `t > 0`, zero for `t <= 0`.
    pub fn bump(&self, k: i32) -> Self {
        if let Some(c) = self.as_constant() {
            return Self::constant(bump_value(c, k));
        }
        Self::from_kind(Kind::Bump(self.clone(), k))
    }

    /// Reduces the argument modulo `period` into `[0, period)`.
    pub fn wrap(&self, period: f64) -> Self {
        if let Some(c) = self.as_constant() {
            return Self::constant(wrap_value(c, period));
        }
        Self::from_kind(Kind::Wrap(self.clone(), period))
    }

    /// The C^∞ step `e(t) / (e(t) + e(1 - t))` with `e(t) = exp(-1/t)`:
    /// zero for `t <= 0`, one for `t >= 1`, monotone in between.
    pub fn smooth_step(&self) -> Self {
        let a = self.bump(0);
        let b = (Self::one() - self).bump(0);
        &a / &(&a + &b)
    }

    /// Real cube root squared, the single-valued branch of `r^(2/3)`.
    pub fn two_thirds_power(&self) -> Self {
        self.cbrt().square()
    }

    /// Raw evaluation. Non-finite results are returned as is.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match &self.0.kind {
            Kind::Const(c) => *c,
            Kind::Var(Var::X) => x,
            Kind::Var(Var::Y) => y,
            Kind::Add(a, b) => a.value(x, y) + b.value(x, y),
            Kind::Sub(a, b) => a.value(x, y) - b.value(x, y),
            Kind::Mul(a, b) => a.value(x, y) * b.value(x, y),
            Kind::Div(a, b) => a.value(x, y) / b.value(x, y),
            Kind::Neg(a) => -a.value(x, y),
            Kind::Pow(a, p) => pow_value(a.value(x, y), *p),
            Kind::Unary(f, a) => f.apply(a.value(x, y)),
            Kind::Bump(a, k) => bump_value(a.value(x, y), *k),
            Kind::Wrap(a, p) => wrap_value(a.value(x, y), *p),
        }
    }

    /// Evaluates the field, rejecting non-finite results (singularities).
    pub fn eval(&self, p: [f64; 2]) -> Result<f64> {
        let v = self.value(p[0], p[1]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                what: self.to_string(),
                x: p[0],
                y: p[1],
            })
        }
    }

    /// Evaluates inside a declared domain.
    pub fn eval_in(&self, domain: &crate::domain::Domain, p: [f64; 2]) -> Result<f64> {
        if !domain.contains(p) {
            return Err(Error::DomainViolation {
                what: self.to_string(),
                x: p[0],
                y: p[1],
            });
        }
        self.eval(p)
    }

    /// Exact partial derivative, memoized per node and variable.
    pub fn diff(&self, var: Var) -> ScalarField {
        let cell = match var {
            Var::X => &self.0.dx,
            Var::Y => &self.0.dy,
        };
        cell.get_or_init(|| self.derive(var)).clone()
    }

    pub fn dx(&self) -> ScalarField {
        self.diff(Var::X)
    }

    pub fn dy(&self) -> ScalarField {
        self.diff(Var::Y)
    }

    fn derive(&self, var: Var) -> ScalarField {
        use Kind::*;
        match &self.0.kind {
            Const(_) => Self::zero(),
            Var(v) => Self::constant(if *v == var { 1.0 } else { 0.0 }),
            Add(a, b) => a.diff(var) + b.diff(var),
            Sub(a, b) => a.diff(var) - b.diff(var),
            Mul(a, b) => &a.diff(var) * b + a * &b.diff(var),
            Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                if db.is_const(0.0) {
                    &da / b
                } else {
                    (&da * b - a * &db) / b.square()
                }
            }
            Neg(a) => -a.diff(var),
            Pow(a, p) => {
                let da = a.diff(var);
                &a.powf(p - 1.0) * &da * *p
            }
            Unary(f, a) => {
                let da = a.diff(var);
                if da.is_const(0.0) {
                    return Self::zero();
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Sinh => a.cosh(),
                    Func::Cosh => a.sinh(),
                    Func::Exp => self.clone(),
                    Func::Log => return &da / a,
                    Func::Asin => return &da / &(Self::one() - a.square()).sqrt(),
                    Func::Sqrt => return &da / &(self * 2.0),
                    Func::Abs => a.signum(),
                    Func::Cbrt => return &da / &(self.square() * 3.0),
                    Func::Floor | Func::Sign => return Self::zero(),
                };
                &outer * &da
            }
            Bump(a, k) => {
                let da = a.diff(var);
                if da.is_const(0.0) {
                    return Self::zero();
                }
                let outer = if *k == 0 {
                    a.bump(2)
                } else {
                    a.bump(k + 2) - a.bump(k + 1) * (*k as f64)
                };
                &outer * &da
            }
            Wrap(a, _) => a.diff(var),
        }
    }

    /// Substitutes `x -> fx`, `y -> fy` throughout the tree.
    pub fn compose(&self, fx: &ScalarField, fy: &ScalarField) -> ScalarField {
        let mut memo = HashMap::new();
        self.compose_memo(fx, fy, &mut memo)
    }

    fn compose_memo(
        &self,
        fx: &ScalarField,
        fy: &ScalarField,
        memo: &mut HashMap<usize, ScalarField>,
    ) -> ScalarField {
        if let Some(done) = memo.get(&self.id()) {
            return done.clone();
        }
        use Kind::*;
        let mut go = |f: &ScalarField| f.compose_memo(fx, fy, memo);
        let out = match &self.0.kind {
            Const(_) => self.clone(),
            Kind::Var(self::Var::X) => fx.clone(),
            Kind::Var(self::Var::Y) => fy.clone(),
            Add(a, b) => {
                let a = go(a);
                a + go(b)
            }
            Sub(a, b) => {
                let a = go(a);
                a - go(b)
            }
            Mul(a, b) => {
                let a = go(a);
                a * go(b)
            }
            Div(a, b) => {
                let a = go(a);
                a / go(b)
            }
            Neg(a) => -go(a),
            Pow(a, p) => go(a).powf(*p),
            Unary(f, a) => go(a).apply(*f),
            Bump(a, k) => go(a).bump(*k),
            Wrap(a, p) => go(a).wrap(*p),
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// A one-variable profile `h(x)` re-expressed as a function of `y`.
    pub fn in_y(&self) -> ScalarField {
        self.compose(&Self::y(), &Self::y())
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        fn walk(f: &ScalarField, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(f.id()) {
                return;
            }
            for c in f.children() {
                walk(c, seen);
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<&ScalarField> {
        use Kind::*;
        match &self.0.kind {
            Const(_) | Var(_) => vec![],
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => vec![a, b],
            Neg(a) | Pow(a, _) | Unary(_, a) | Bump(a, _) | Wrap(a, _) => vec![a],
        }
    }

    /// Parses either the prefix (s-expression) or the infix syntax.
    pub fn parse(src: &str) -> Result<ScalarField> {
        match parse_prefix(src) {
            Ok(f) => Ok(f),
            Err(prefix_err) => parse_infix(src).map_err(|infix_err| {
                if src.trim_start().starts_with('(') {
                    prefix_err
                } else {
                    infix_err
                }
            }),
        }
    }
}

fn fmt_number(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let a = c.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

/// Prefix (s-expression) rendering; [`parse_prefix`] reads it back.
impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Kind::*;
        match &self.0.kind {
            Const(c) => fmt_number(*c, f),
            Kind::Var(self::Var::X) => write!(f, "x"),
            Kind::Var(self::Var::Y) => write!(f, "y"),
            Add(a, b) => write!(f, "(+ {a} {b})"),
            Sub(a, b) => write!(f, "(- {a} {b})"),
            Mul(a, b) => write!(f, "(* {a} {b})"),
            Div(a, b) => write!(f, "(/ {a} {b})"),
            Neg(a) => write!(f, "(- {a})"),
            Pow(a, p) => {
                write!(f, "(^ {a} ")?;
                fmt_number(*p, f)?;
                write!(f, ")")
            }
            Unary(func, a) => write!(f, "({} {a})", func.name()),
            Bump(a, k) => write!(f, "(bump {a} {k})"),
            Wrap(a, p) => {
                write!(f, "(wrap {a} ")?;
                fmt_number(*p, f)?;
                write!(f, ")")
            }
        }
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::constant(c)
    }
}

fn add(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x + y),
        (Some(z), _) if z == 0.0 => b.clone(),
        (_, Some(z)) if z == 0.0 => a.clone(),
        _ => ScalarField::from_kind(Kind::Add(a.clone(), b.clone())),
    }
}

fn sub(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x - y),
        (_, Some(z)) if z == 0.0 => a.clone(),
        (Some(z), _) if z == 0.0 => neg(b),
        _ => ScalarField::from_kind(Kind::Sub(a.clone(), b.clone())),
    }
}

fn mul(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x * y),
        (Some(z), _) | (_, Some(z)) if z == 0.0 => ScalarField::zero(),
        (Some(o), _) if o == 1.0 => b.clone(),
        (_, Some(o)) if o == 1.0 => a.clone(),
        (Some(m), _) if m == -1.0 => neg(b),
        (_, Some(m)) if m == -1.0 => neg(a),
        _ => ScalarField::from_kind(Kind::Mul(a.clone(), b.clone())),
    }
}

fn div(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x / y),
        (Some(z), _) if z == 0.0 => ScalarField::zero(),
        (_, Some(o)) if o == 1.0 => a.clone(),
        _ => ScalarField::from_kind(Kind::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &ScalarField) -> ScalarField {
    match &a.0.kind {
        Kind::Const(c) => ScalarField::constant(-c),
        Kind::Neg(inner) => inner.clone(),
        _ => ScalarField::from_kind(Kind::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $f:ident) => {
        impl ops::$tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                $f(self, rhs)
            }
        }
        impl ops::$tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                $f(&self, &rhs)
            }
        }
        impl ops::$tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                $f(&self, rhs)
            }
        }
        impl ops::$tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                $f(self, &rhs)
            }
        }
        impl ops::$tr<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                $f(self, &ScalarField::constant(rhs))
            }
        }
        impl ops::$tr<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                $f(&self, &ScalarField::constant(rhs))
            }
        }
        impl ops::$tr<&ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                $f(&ScalarField::constant(self), rhs)
            }
        }
        impl ops::$tr<ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                $f(&ScalarField::constant(self), &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        neg(self)
    }
}

impl ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn x() -> ScalarField {
        ScalarField::x()
    }
    fn y() -> ScalarField {
        ScalarField::y()
    }

    #[test]
    fn constant_and_rational_values() {
        assert_eq!(ScalarField::one().eval([3.0, -2.0]).unwrap(), 1.0);
        let f = 1.0 / (x().square() + y().square());
        assert_eq!(f.eval([1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn singularity_is_an_error() {
        let f = 1.0 / (x().square() + y().square());
        assert!(matches!(f.eval([0.0, 0.0]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn domain_violation() {
        let d = crate::domain::Domain::rect([0.0, 1.0], [0.0, 1.0]);
        let f = x();
        assert!(matches!(
            f.eval_in(&d, [2.0, 0.5]),
            Err(Error::DomainViolation { .. })
        ));
        assert_eq!(f.eval_in(&d, [0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn simple_derivatives() {
        let f = x().square() + y().square();
        assert_eq!(f.dx().eval([1.0, 1.0]).unwrap(), 2.0);
        let g = (x() * (4.0 * PI)).sin();
        assert!((g.dx().eval([0.0, 0.0]).unwrap() - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn derivative_is_memoized() {
        let f = (x() * y()).sin();
        let a = f.dx();
        let b = f.dx();
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn smooth_step_plateaus_and_monotone() {
        let s = x().smooth_step();
        assert_eq!(s.value(-0.5, 0.0), 0.0);
        assert_eq!(s.value(0.0, 0.0), 0.0);
        assert_eq!(s.value(1.0, 0.0), 1.0);
        assert_eq!(s.value(1.7, 0.0), 1.0);
        let mid = s.value(0.5, 0.0);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = s.value(i as f64 / 1000.0, 0.0);
            assert!(v >= prev);
            prev = v;
        }
        // all derivatives vanish on the plateaus and stay finite at the seams
        let d3 = s.dx().dx().dx();
        for t in [-1.0, 0.0, 1.0, 2.0] {
            assert_eq!(d3.value(t, 0.0), 0.0);
        }
        assert!(d3.value(0.5, 0.0).is_finite());
    }

    #[test]
    fn wrap_reduces_to_one_period() {
        let w = x().wrap(2.0);
        assert!((w.value(5.5, 0.0) - 1.5).abs() < 1e-15);
        assert!((w.value(-0.5, 0.0) - 1.5).abs() < 1e-15);
        assert_eq!(w.dx().value(3.3, 0.0), 1.0);
    }

    #[test]
    fn cube_root_branch_is_real() {
        let f = x().two_thirds_power();
        assert!((f.value(-8.0, 0.0) - 4.0).abs() < 1e-12);
        // d/dx x^(2/3) = (2/3) x^(-1/3)
        assert!((f.dx().value(8.0, 0.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn compose_substitutes_both_variables() {
        let f = x().square() * y();
        let g = f.compose(&(y() + 1.0), &x());
        // f(y + 1, x) at (2, 3) = 16 * 2
        assert_eq!(g.eval([2.0, 3.0]).unwrap(), 32.0);
        assert_eq!(x().sin().in_y().eval([0.0, 1.0]).unwrap(), 1f64.sin());
    }

    #[test]
    fn constant_folding() {
        let f = (x() * 0.0) + 3.0;
        assert_eq!(f.as_constant(), Some(3.0));
        assert_eq!(ScalarField::constant(2.0).dx().as_constant(), Some(0.0));
    }

    #[test]
    fn display_round_trips_through_prefix_parser() {
        let f = (x() * 2.5).sin() / (y().square() + 1e-12) - x().smooth_step() + x().wrap(1.0).floor();
        let g = parse_prefix(&f.to_string()).unwrap();
        for p in [[0.3, 0.7], [1.2, -0.4], [-2.0, 3.0]] {
            assert_eq!(f.value(p[0], p[1]), g.value(p[0], p[1]));
        }
    }
}

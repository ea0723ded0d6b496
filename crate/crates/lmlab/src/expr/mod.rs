//! Symbolic scalar expressions on a coordinate chart.
//!
//! A [`Chart`] fixes the coordinate names and a closed sampling box; a
//! [`ScalarExpr`] is an immutable expression tree over those coordinates
//! with exact rational constants. Everything downstream (vector fields,
//! differential forms, Poisson and Riemannian operators) is built on the
//! four services of this module: parsing, evaluation, exact partial
//! differentiation, and sampling-based zero testing.

mod deriv;
mod eval;
mod parse;
mod sample;
mod simplify;

pub use sample::{zero_on_domain, zero_on_domain_multi, CheckVerdict, Sampler, DEFAULT_TOL};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Names of the supported unary functions, in grammar order.
pub const FUNCTION_NAMES: [&str; 9] = [
    "sin", "cos", "exp", "ln", "sqrt", "cosh", "sinh", "tanh", "abs",
];

/// A coordinate chart: dimension, coordinate names, and the closed box
/// used for sampling-based checks.
#[derive(Debug, Clone)]
pub struct Chart(Arc<ChartData>);

#[derive(Debug)]
struct ChartData {
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    /// Builds a chart from coordinate names and per-coordinate closed intervals.
    pub fn new<S: Into<String>>(coords: Vec<S>, domain: Vec<(f64, f64)>) -> Result<Chart> {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        if coords.is_empty() {
            return Err(Error::InvalidChart("dimension must be at least 1".into()));
        }
        if coords.len() != domain.len() {
            return Err(Error::InvalidChart(format!(
                "{} coordinate names but {} intervals",
                coords.len(),
                domain.len()
            )));
        }
        for name in &coords {
            if !is_identifier(name) {
                return Err(Error::InvalidChart(format!(
                    "`{name}` is not a valid identifier"
                )));
            }
            if FUNCTION_NAMES.contains(&name.as_str()) {
                return Err(Error::InvalidChart(format!(
                    "coordinate name `{name}` collides with a function name"
                )));
            }
            if coords.iter().filter(|c| *c == name).count() > 1 {
                return Err(Error::InvalidChart(format!(
                    "duplicate coordinate name `{name}`"
                )));
            }
        }
        for (i, &(lo, hi)) in domain.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
                return Err(Error::InvalidChart(format!(
                    "interval for `{}` must be finite with positive length, got [{lo}, {hi}]",
                    coords[i]
                )));
            }
        }
        Ok(Chart(Arc::new(ChartData { coords, domain })))
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.0.coords
    }

    pub fn coord_name(&self, i: usize) -> &str {
        &self.0.coords[i]
    }

    /// Index of a coordinate by name.
    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == name)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.0.domain
    }

    /// The domain box enlarged by the given fraction of each side length,
    /// on both ends (used by the flow module, fraction 0.5).
    pub fn enlarged_domain(&self, fraction: f64) -> Vec<(f64, f64)> {
        self.0
            .domain
            .iter()
            .map(|&(lo, hi)| {
                let pad = fraction * (hi - lo);
                (lo - pad, hi + pad)
            })
            .collect()
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.coords == other.0.coords && self.0.domain == other.0.domain)
    }
}

impl Eq for Chart {}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Supported unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Cosh,
    Sinh,
    Tanh,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Expression tree node. Constants are exact rationals; real-valued named
/// parameters carry their value with them so evaluation stays a pure
/// function of the sample point.
#[derive(Debug, PartialEq)]
pub(crate) enum Node {
    Const(BigRational),
    Coord(usize),
    Param(String, f64),
    Neg(Arc<Node>),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, i64),
    Func(Func, Arc<Node>),
}

/// An immutable symbolic expression bound to a chart.
#[derive(Clone)]
pub struct ScalarExpr {
    chart: Chart,
    node: Arc<Node>,
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.node == other.node
    }
}

impl ScalarExpr {
    pub(crate) fn raw(chart: Chart, node: Arc<Node>) -> ScalarExpr {
        ScalarExpr { chart, node }
    }

    pub(crate) fn node(&self) -> &Arc<Node> {
        &self.node
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn constant(chart: &Chart, value: BigRational) -> ScalarExpr {
        ScalarExpr::raw(chart.clone(), Arc::new(Node::Const(value)))
    }

    pub fn int(chart: &Chart, value: i64) -> ScalarExpr {
        ScalarExpr::constant(chart, BigRational::from(BigInt::from(value)))
    }

    pub fn rational(chart: &Chart, num: i64, den: i64) -> ScalarExpr {
        assert!(den != 0, "rational constant with zero denominator");
        ScalarExpr::constant(
            chart,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    pub fn zero(chart: &Chart) -> ScalarExpr {
        ScalarExpr::int(chart, 0)
    }

    pub fn one(chart: &Chart) -> ScalarExpr {
        ScalarExpr::int(chart, 1)
    }

    /// Exact conversion of a finite f64 (every finite double is a dyadic
    /// rational).
    pub fn from_f64(chart: &Chart, value: f64) -> ScalarExpr {
        let r = BigRational::from_float(value)
            .unwrap_or_else(|| panic!("cannot convert non-finite {value} to a constant"));
        ScalarExpr::constant(chart, r)
    }

    pub fn coord(chart: &Chart, index: usize) -> ScalarExpr {
        assert!(
            index < chart.dim(),
            "coordinate index {index} out of range for chart of dimension {}",
            chart.dim()
        );
        ScalarExpr::raw(chart.clone(), Arc::new(Node::Coord(index)))
    }

    /// A named real-valued parameter (a `t`-like constant).
    pub fn param(chart: &Chart, name: &str, value: f64) -> ScalarExpr {
        ScalarExpr::raw(
            chart.clone(),
            Arc::new(Node::Param(name.to_string(), value)),
        )
    }

    fn same_chart(&self, other: &ScalarExpr) -> Chart {
        assert!(
            self.chart == other.chart,
            "chart mismatch in expression arithmetic"
        );
        self.chart.clone()
    }

    pub(crate) fn as_const(&self) -> Option<&BigRational> {
        match self.node.as_ref() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node.as_ref(), Node::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node.as_ref(), Node::Const(c) if c.is_one())
    }

    // Light-folding constructors. They keep derivative output compact;
    // the full flatten/refold pass lives in `simplify`.

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        let chart = self.same_chart(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return ScalarExpr::constant(&chart, a + b);
        }
        ScalarExpr::raw(chart, Arc::new(Node::Add(self.node.clone(), other.node.clone())))
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        let chart = self.same_chart(other);
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return ScalarExpr::constant(&chart, a - b);
        }
        ScalarExpr::raw(chart, Arc::new(Node::Sub(self.node.clone(), other.node.clone())))
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        let chart = self.same_chart(other);
        if self.is_zero() || other.is_zero() {
            return ScalarExpr::zero(&chart);
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return ScalarExpr::constant(&chart, a * b);
        }
        ScalarExpr::raw(chart, Arc::new(Node::Mul(self.node.clone(), other.node.clone())))
    }

    pub fn div(&self, other: &ScalarExpr) -> ScalarExpr {
        let chart = self.same_chart(other);
        if other.is_one() {
            return self.clone();
        }
        if self.is_zero() && !other.is_zero() {
            return ScalarExpr::zero(&chart);
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if !b.is_zero() {
                return ScalarExpr::constant(&chart, a / b);
            }
        }
        ScalarExpr::raw(chart, Arc::new(Node::Div(self.node.clone(), other.node.clone())))
    }

    pub fn neg(&self) -> ScalarExpr {
        match self.node.as_ref() {
            Node::Const(c) => ScalarExpr::constant(&self.chart, -c),
            Node::Neg(inner) => ScalarExpr::raw(self.chart.clone(), inner.clone()),
            _ => ScalarExpr::raw(self.chart.clone(), Arc::new(Node::Neg(self.node.clone()))),
        }
    }

    /// Integer power with a constant exponent.
    pub fn powi(&self, exp: i64) -> ScalarExpr {
        match exp {
            0 => ScalarExpr::one(&self.chart),
            1 => self.clone(),
            _ => {
                if let Some(c) = self.as_const() {
                    if !c.is_zero() || exp > 0 {
                        return ScalarExpr::constant(&self.chart, rational_pow(c, exp));
                    }
                }
                ScalarExpr::raw(self.chart.clone(), Arc::new(Node::Pow(self.node.clone(), exp)))
            }
        }
    }

    pub fn apply(&self, func: Func) -> ScalarExpr {
        ScalarExpr::raw(
            self.chart.clone(),
            Arc::new(Node::Func(func, self.node.clone())),
        )
    }

    pub fn sin(&self) -> ScalarExpr {
        self.apply(Func::Sin)
    }
    pub fn cos(&self) -> ScalarExpr {
        self.apply(Func::Cos)
    }
    pub fn exp(&self) -> ScalarExpr {
        self.apply(Func::Exp)
    }
    pub fn ln(&self) -> ScalarExpr {
        self.apply(Func::Ln)
    }
    pub fn sqrt(&self) -> ScalarExpr {
        self.apply(Func::Sqrt)
    }
    pub fn cosh(&self) -> ScalarExpr {
        self.apply(Func::Cosh)
    }
    pub fn sinh(&self) -> ScalarExpr {
        self.apply(Func::Sinh)
    }
    pub fn tanh(&self) -> ScalarExpr {
        self.apply(Func::Tanh)
    }
    pub fn abs(&self) -> ScalarExpr {
        self.apply(Func::Abs)
    }

    /// Exact symbolic partial derivative with respect to coordinate `i`.
    pub fn partial_derivative(&self, i: usize) -> ScalarExpr {
        assert!(
            i < self.chart.dim(),
            "derivative index {i} out of range for chart of dimension {}",
            self.chart.dim()
        );
        deriv::partial_derivative(self, i)
    }

    /// Flatten/refold simplification: constant folding, 0/1 identities,
    /// cancellation of equal terms, canonical ordering of sums and
    /// products. Semantics-preserving at every non-singular point.
    pub fn simplify(&self) -> ScalarExpr {
        simplify::simplify(self)
    }

    /// Evaluates at a point of the chart.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        eval::evaluate(self, point)
    }

    /// Evaluates and reports the smallest denominator magnitude met along
    /// the way (used by the sampling guard).
    pub(crate) fn evaluate_guarded(&self, point: &[f64]) -> Result<(f64, f64)> {
        eval::evaluate_guarded(self, point)
    }

    /// The top-level additive terms of the expression (descending through
    /// sums, differences and negations). Used for the local-scale estimate
    /// in relative zero tests.
    pub(crate) fn additive_terms(&self) -> Vec<ScalarExpr> {
        let mut out = Vec::new();
        fn walk(chart: &Chart, n: &Arc<Node>, out: &mut Vec<ScalarExpr>) {
            match n.as_ref() {
                Node::Add(a, b) | Node::Sub(a, b) => {
                    walk(chart, a, out);
                    walk(chart, b, out);
                }
                Node::Neg(a) => walk(chart, a, out),
                _ => out.push(ScalarExpr::raw(chart.clone(), n.clone())),
            }
        }
        walk(&self.chart, &self.node, &mut out);
        out
    }

    /// Parses an expression against a chart.
    pub fn parse(src: &str, chart: &Chart) -> Result<ScalarExpr> {
        parse::parse_scalar(src, chart)
    }
}

/// Parses an expression string against a chart (module-level alias).
pub fn parse_scalar(src: &str, chart: &Chart) -> Result<ScalarExpr> {
    parse::parse_scalar(src, chart)
}

pub(crate) fn rational_pow(base: &BigRational, exp: i64) -> BigRational {
    if exp >= 0 {
        num_traits::pow::pow(base.clone(), exp as usize)
    } else {
        let p = num_traits::pow::pow(base.clone(), (-exp) as usize);
        p.recip()
    }
}

// ---------------------------------------------------------------------------
// Display

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.node, self.chart.coord_names(), 0)
    }
}

/// Operator precedence used for printing: 1 additive, 2 multiplicative,
/// 3 prefix minus, 4 power, 5 atoms.
fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Const(c) if c.is_negative() => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

fn write_node(
    f: &mut fmt::Formatter<'_>,
    n: &Node,
    coords: &[String],
    parent: u8,
) -> fmt::Result {
    let p = prec(n);
    let parens = p < parent;
    if parens {
        write!(f, "(")?;
    }
    match n {
        Node::Const(c) => {
            if c.denom().is_one() {
                write!(f, "{}", c.numer())?;
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())?;
            }
        }
        Node::Coord(i) => write!(f, "{}", coords[*i])?,
        Node::Param(name, _) => write!(f, "{name}")?,
        Node::Neg(a) => {
            write!(f, "-")?;
            // The grammar binds prefix minus tighter than `^`, so anything
            // that is not an atom must be parenthesized after the sign.
            if prec(a) == 5 && !matches!(a.as_ref(), Node::Pow(..)) {
                write_node(f, a, coords, 0)?;
            } else {
                write!(f, "(")?;
                write_node(f, a, coords, 0)?;
                write!(f, ")")?;
            }
        }
        Node::Add(a, b) => {
            write_node(f, a, coords, 1)?;
            write!(f, " + ")?;
            write_node(f, b, coords, 2)?;
        }
        Node::Sub(a, b) => {
            write_node(f, a, coords, 1)?;
            write!(f, " - ")?;
            write_node(f, b, coords, 2)?;
        }
        Node::Mul(a, b) => {
            write_node(f, a, coords, 2)?;
            write!(f, "*")?;
            write_node(f, b, coords, 3)?;
        }
        Node::Div(a, b) => {
            write_node(f, a, coords, 2)?;
            write!(f, "/")?;
            write_node(f, b, coords, 3)?;
        }
        Node::Pow(a, k) => {
            if prec(a) == 5 && !matches!(a.as_ref(), Node::Const(c) if !c.denom().is_one()) {
                write_node(f, a, coords, 5)?;
            } else {
                write!(f, "(")?;
                write_node(f, a, coords, 0)?;
                write!(f, ")")?;
            }
            write!(f, "^{k}")?;
        }
        Node::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, coords, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Operator sugar

macro_rules! impl_bin_op {
    ($trait:ident, $method:ident, $call:ident) => {
        impl std::ops::$trait for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                self.$call(rhs)
            }
        }
        impl std::ops::$trait for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$call(&self, &rhs)
            }
        }
    };
}

impl_bin_op!(Add, add, add);
impl_bin_op!(Sub, sub, sub);
impl_bin_op!(Mul, mul, mul);
impl_bin_op!(Div, div, div);

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(&self)
    }
}

#[cfg(test)]
mod tests;

//! Numerical evaluation of expression trees.
//!
//! `evaluate_guarded` additionally reports the smallest denominator
//! magnitude met anywhere in the tree (division denominators and bases of
//! negative integer powers); the sampling layer skips points where that
//! magnitude falls under the singularity guard.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};

use super::{Chart, Func, Node, ScalarExpr};

pub fn evaluate(e: &ScalarExpr, point: &[f64]) -> Result<f64> {
    evaluate_guarded(e, point).map(|(v, _)| v)
}

pub fn evaluate_guarded(e: &ScalarExpr, point: &[f64]) -> Result<(f64, f64)> {
    if point.len() != e.chart().dim() {
        return Err(Error::DimensionMismatch {
            expected: e.chart().dim(),
            actual: point.len(),
        });
    }
    let mut min_den = f64::INFINITY;
    let v = eval_node(e.chart(), e.node(), point, &mut min_den)?;
    if !v.is_finite() {
        return Err(domain(e.chart(), e.node(), "non-finite value"));
    }
    Ok((v, min_den))
}

fn domain(chart: &Chart, node: &std::sync::Arc<Node>, reason: &str) -> Error {
    let printed = ScalarExpr::raw(chart.clone(), node.clone()).to_string();
    Error::Domain {
        expr: printed,
        reason: reason.to_string(),
    }
}

fn eval_node(
    chart: &Chart,
    node: &std::sync::Arc<Node>,
    p: &[f64],
    min_den: &mut f64,
) -> Result<f64> {
    Ok(match node.as_ref() {
        Node::Const(c) => c.to_f64().unwrap_or(f64::NAN),
        Node::Coord(i) => p[*i],
        Node::Param(_, v) => *v,
        Node::Neg(a) => -eval_node(chart, a, p, min_den)?,
        Node::Add(a, b) => eval_node(chart, a, p, min_den)? + eval_node(chart, b, p, min_den)?,
        Node::Sub(a, b) => eval_node(chart, a, p, min_den)? - eval_node(chart, b, p, min_den)?,
        Node::Mul(a, b) => eval_node(chart, a, p, min_den)? * eval_node(chart, b, p, min_den)?,
        Node::Div(a, b) => {
            let num = eval_node(chart, a, p, min_den)?;
            let den = eval_node(chart, b, p, min_den)?;
            if den == 0.0 {
                return Err(domain(chart, node, "division by zero"));
            }
            *min_den = min_den.min(den.abs());
            num / den
        }
        Node::Pow(a, k) => {
            let base = eval_node(chart, a, p, min_den)?;
            if *k < 0 {
                if base == 0.0 {
                    return Err(domain(chart, node, "zero raised to a negative power"));
                }
                *min_den = min_den.min(base.abs().powi((-k) as i32));
            }
            // 0^0 folds to 1 at construction; powi(0, 0) = 1 here as well.
            base.powi(*k as i32)
        }
        Node::Func(f, a) => {
            let v = eval_node(chart, a, p, min_den)?;
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(domain(chart, node, "logarithm of a non-positive value"));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(domain(chart, node, "square root of a negative value"));
                    }
                    v.sqrt()
                }
                Func::Cosh => v.cosh(),
                Func::Sinh => v.sinh(),
                Func::Tanh => v.tanh(),
                Func::Abs => v.abs(),
            }
        }
    })
}

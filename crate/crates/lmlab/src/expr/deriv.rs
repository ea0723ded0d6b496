//! Exact symbolic partial differentiation by recursive rules.

use super::{Func, Node, ScalarExpr};

/// d/dx_i of `e`, simplified.
pub fn partial_derivative(e: &ScalarExpr, i: usize) -> ScalarExpr {
    d(e, i).simplify()
}

fn wrap(e: &ScalarExpr, node: &std::sync::Arc<Node>) -> ScalarExpr {
    ScalarExpr::raw(e.chart().clone(), node.clone())
}

fn d(e: &ScalarExpr, i: usize) -> ScalarExpr {
    let chart = e.chart();
    match e.node().as_ref() {
        Node::Const(_) | Node::Param(..) => ScalarExpr::zero(chart),
        Node::Coord(j) => {
            if *j == i {
                ScalarExpr::one(chart)
            } else {
                ScalarExpr::zero(chart)
            }
        }
        Node::Neg(a) => d(&wrap(e, a), i).neg(),
        Node::Add(a, b) => d(&wrap(e, a), i).add(&d(&wrap(e, b), i)),
        Node::Sub(a, b) => d(&wrap(e, a), i).sub(&d(&wrap(e, b), i)),
        Node::Mul(a, b) => {
            let (a, b) = (wrap(e, a), wrap(e, b));
            d(&a, i).mul(&b).add(&a.mul(&d(&b, i)))
        }
        Node::Div(a, b) => {
            let (a, b) = (wrap(e, a), wrap(e, b));
            let num = d(&a, i).mul(&b).sub(&a.mul(&d(&b, i)));
            num.div(&b.powi(2))
        }
        Node::Pow(a, k) => {
            let a = wrap(e, a);
            ScalarExpr::int(chart, *k)
                .mul(&a.powi(k - 1))
                .mul(&d(&a, i))
        }
        Node::Func(f, a) => {
            let u = wrap(e, a);
            let du = d(&u, i);
            match f {
                Func::Sin => u.cos().mul(&du),
                Func::Cos => u.sin().neg().mul(&du),
                Func::Exp => u.exp().mul(&du),
                Func::Ln => du.div(&u),
                Func::Sqrt => du.div(&ScalarExpr::int(chart, 2).mul(&u.sqrt())),
                Func::Cosh => u.sinh().mul(&du),
                Func::Sinh => u.cosh().mul(&du),
                Func::Tanh => {
                    let sech2 = ScalarExpr::one(chart).sub(&u.tanh().powi(2));
                    sech2.mul(&du)
                }
                // d|u| = sign(u) du, with sign written as u / |u| so the
                // kink at u = 0 is caught by the sampling guard.
                Func::Abs => u.div(&u.abs()).mul(&du),
            }
        }
    }
}

//! Flatten/refold simplification.
//!
//! Sums are flattened to (constant, coefficient-per-canonical-term) and
//! products to (rational coefficient, integer-exponent-per-canonical-factor),
//! then rebuilt in a canonical order. This folds constants, applies the 0/1
//! identities, cancels equal terms (`e - e -> 0`) and equal factors
//! (`e/e -> 1`), and makes structurally different spellings of the same
//! polynomial meet in one normal form. No distribution of products over
//! sums is performed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{rational_pow, Func, Node, ScalarExpr};

pub fn simplify(e: &ScalarExpr) -> ScalarExpr {
    ScalarExpr::raw(e.chart().clone(), simp(e.node()))
}

fn simp(n: &Arc<Node>) -> Arc<Node> {
    match n.as_ref() {
        Node::Const(_) | Node::Coord(_) | Node::Param(..) => n.clone(),
        Node::Func(f, a) => fold_func(*f, simp(a)),
        Node::Add(..) | Node::Sub(..) => rebuild_sum_of(n),
        Node::Neg(..) | Node::Mul(..) | Node::Div(..) | Node::Pow(..) => rebuild_product_of(n),
    }
}

// ---------------------------------------------------------------------------
// Canonical ordering of nodes

#[derive(Debug, Clone)]
struct NodeKey(Arc<Node>);

impl PartialEq for NodeKey {
    fn eq(&self, other: &Self) -> bool {
        cmp_node(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for NodeKey {}
impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_node(&self.0, &other.0)
    }
}

fn rank(n: &Node) -> u8 {
    match n {
        Node::Const(_) => 0,
        Node::Coord(_) => 1,
        Node::Param(..) => 2,
        Node::Func(..) => 3,
        Node::Pow(..) => 4,
        Node::Neg(_) => 5,
        Node::Mul(..) => 6,
        Node::Div(..) => 7,
        Node::Add(..) => 8,
        Node::Sub(..) => 9,
    }
}

fn cmp_node(a: &Node, b: &Node) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Node::Const(x), Node::Const(y)) => x.cmp(y),
        (Node::Coord(x), Node::Coord(y)) => x.cmp(y),
        (Node::Param(nx, vx), Node::Param(ny, vy)) => {
            nx.cmp(ny).then(vx.to_bits().cmp(&vy.to_bits()))
        }
        (Node::Func(fx, x), Node::Func(fy, y)) => fx.cmp(fy).then_with(|| cmp_node(x, y)),
        (Node::Pow(x, kx), Node::Pow(y, ky)) => cmp_node(x, y).then(kx.cmp(ky)),
        (Node::Neg(x), Node::Neg(y)) => cmp_node(x, y),
        (Node::Add(x1, x2), Node::Add(y1, y2))
        | (Node::Sub(x1, x2), Node::Sub(y1, y2))
        | (Node::Mul(x1, x2), Node::Mul(y1, y2))
        | (Node::Div(x1, x2), Node::Div(y1, y2)) => {
            cmp_node(x1, y1).then_with(|| cmp_node(x2, y2))
        }
        _ => unreachable!("rank already distinguished the variants"),
    })
}

// ---------------------------------------------------------------------------
// Product flattening

struct ProductAcc {
    coeff: BigRational,
    factors: BTreeMap<NodeKey, i64>,
    zero: bool,
}

impl ProductAcc {
    fn new() -> Self {
        ProductAcc {
            coeff: BigRational::one(),
            factors: BTreeMap::new(),
            zero: false,
        }
    }

    fn add_factor(&mut self, core: Arc<Node>, exp: i64) {
        *self.factors.entry(NodeKey(core)).or_insert(0) += exp;
    }
}

/// Walks a product-shaped subtree, accumulating `coeff * prod core^exp`.
/// Returns `Err(())` if an exponent overflows, in which case the caller
/// falls back to a shallow rebuild.
fn collect_product(n: &Arc<Node>, mult: i64, acc: &mut ProductAcc) -> Result<(), ()> {
    match n.as_ref() {
        Node::Mul(a, b) => {
            collect_product(a, mult, acc)?;
            collect_product(b, mult, acc)?;
        }
        Node::Div(a, b) => {
            collect_product(a, mult, acc)?;
            collect_product(b, mult.checked_neg().ok_or(())?, acc)?;
        }
        Node::Neg(a) => {
            if mult.rem_euclid(2) == 1 {
                self_negate(&mut acc.coeff);
            }
            collect_product(a, mult, acc)?;
        }
        Node::Pow(u, k) => {
            collect_product(u, mult.checked_mul(*k).ok_or(())?, acc)?;
        }
        Node::Const(c) => {
            if c.is_zero() {
                if mult > 0 {
                    acc.zero = true;
                } else {
                    // constant zero denominator: keep it so evaluation
                    // still reports the division error
                    acc.add_factor(n.clone(), mult);
                }
            } else {
                if mult.unsigned_abs() > 64 {
                    return Err(());
                }
                acc.coeff *= rational_pow(c, mult);
            }
        }
        _ => {
            let s = simp(n);
            match s.as_ref() {
                Node::Mul(..) | Node::Div(..) | Node::Neg(..) | Node::Pow(..) | Node::Const(_) => {
                    collect_product(&s, mult, acc)?;
                }
                _ => acc.add_factor(s, mult),
            }
        }
    }
    Ok(())
}

fn self_negate(c: &mut BigRational) {
    let taken = std::mem::replace(c, BigRational::zero());
    *c = -taken;
}

fn rebuild_product_of(n: &Arc<Node>) -> Arc<Node> {
    let mut acc = ProductAcc::new();
    if collect_product(n, 1, &mut acc).is_err() {
        return shallow(n);
    }
    rebuild_product(acc)
}

fn rebuild_product(acc: ProductAcc) -> Arc<Node> {
    if acc.zero || acc.coeff.is_zero() {
        return constant(BigRational::zero());
    }
    let negative = acc.coeff.is_negative();
    let c = acc.coeff.abs();

    let mut num_parts: Vec<Arc<Node>> = Vec::new();
    let mut den_parts: Vec<Arc<Node>> = Vec::new();
    for (key, exp) in &acc.factors {
        match exp.cmp(&0) {
            Ordering::Equal => {}
            Ordering::Greater => num_parts.push(pow_node(key.0.clone(), *exp)),
            Ordering::Less => den_parts.push(pow_node(key.0.clone(), -*exp)),
        }
    }

    let mut num = if !c.is_one() || num_parts.is_empty() {
        let mut node = constant(c);
        for p in num_parts {
            node = Arc::new(Node::Mul(node, p));
        }
        node
    } else {
        let mut it = num_parts.into_iter();
        let mut node = it.next().unwrap();
        for p in it {
            node = Arc::new(Node::Mul(node, p));
        }
        node
    };

    if !den_parts.is_empty() {
        let mut it = den_parts.into_iter();
        let mut den = it.next().unwrap();
        for p in it {
            den = Arc::new(Node::Mul(den, p));
        }
        num = Arc::new(Node::Div(num, den));
    }

    if negative {
        num = Arc::new(Node::Neg(num));
    }
    num
}

fn pow_node(core: Arc<Node>, exp: i64) -> Arc<Node> {
    if exp == 1 {
        core
    } else {
        Arc::new(Node::Pow(core, exp))
    }
}

fn constant(c: BigRational) -> Arc<Node> {
    Arc::new(Node::Const(c))
}

// ---------------------------------------------------------------------------
// Sum flattening

struct SumAcc {
    constant: BigRational,
    terms: BTreeMap<NodeKey, BigRational>,
}

fn collect_sum(n: &Arc<Node>, positive: bool, acc: &mut SumAcc) {
    match n.as_ref() {
        Node::Add(a, b) => {
            collect_sum(a, positive, acc);
            collect_sum(b, positive, acc);
        }
        Node::Sub(a, b) => {
            collect_sum(a, positive, acc);
            collect_sum(b, !positive, acc);
        }
        Node::Neg(a) => collect_sum(a, !positive, acc),
        Node::Const(c) => {
            if positive {
                acc.constant += c;
            } else {
                acc.constant -= c;
            }
        }
        _ => {
            let s = simp(n);
            match s.as_ref() {
                Node::Add(..) | Node::Sub(..) | Node::Neg(..) | Node::Const(_) => {
                    collect_sum(&s, positive, acc)
                }
                _ => {
                    let mut p = ProductAcc::new();
                    if collect_product(&s, 1, &mut p).is_err() {
                        add_term(acc, positive, BigRational::one(), s);
                        return;
                    }
                    if p.zero || p.coeff.is_zero() {
                        return;
                    }
                    let coeff = std::mem::replace(&mut p.coeff, BigRational::one());
                    if p.factors.is_empty() {
                        if positive {
                            acc.constant += &coeff;
                        } else {
                            acc.constant -= &coeff;
                        }
                        return;
                    }
                    let core = rebuild_product(p);
                    add_term(acc, positive, coeff, core);
                }
            }
        }
    }
}

fn add_term(acc: &mut SumAcc, positive: bool, coeff: BigRational, core: Arc<Node>) {
    let signed = if positive { coeff } else { -coeff };
    let entry = acc
        .terms
        .entry(NodeKey(core))
        .or_insert_with(BigRational::zero);
    *entry += signed;
}

fn rebuild_sum_of(n: &Arc<Node>) -> Arc<Node> {
    let mut acc = SumAcc {
        constant: BigRational::zero(),
        terms: BTreeMap::new(),
    };
    collect_sum(n, true, &mut acc);

    let mut node: Option<Arc<Node>> = None;
    for (key, coeff) in &acc.terms {
        if coeff.is_zero() {
            continue;
        }
        let piece = scaled(coeff.abs(), key.0.clone());
        node = Some(match node {
            None => {
                if coeff.is_negative() {
                    Arc::new(Node::Neg(piece))
                } else {
                    piece
                }
            }
            Some(prev) => {
                if coeff.is_negative() {
                    Arc::new(Node::Sub(prev, piece))
                } else {
                    Arc::new(Node::Add(prev, piece))
                }
            }
        });
    }

    match node {
        None => constant(acc.constant),
        Some(prev) => {
            if acc.constant.is_zero() {
                prev
            } else if acc.constant.is_negative() {
                Arc::new(Node::Sub(prev, constant(acc.constant.abs())))
            } else {
                Arc::new(Node::Add(prev, constant(acc.constant)))
            }
        }
    }
}

/// `c * core` with the constant folded into a `Div` numerator when the
/// core is a quotient, so `2 * (1/(x*y))` prints as `2/(x*y)`.
fn scaled(c: BigRational, core: Arc<Node>) -> Arc<Node> {
    if c.is_one() {
        return core;
    }
    if let Node::Div(num, den) = core.as_ref() {
        let new_num = match num.as_ref() {
            Node::Const(k) => constant(&c * k),
            _ => Arc::new(Node::Mul(constant(c), num.clone())),
        };
        return Arc::new(Node::Div(new_num, den.clone()));
    }
    Arc::new(Node::Mul(constant(c), core))
}

// ---------------------------------------------------------------------------
// Function folding (exact cases only)

fn fold_func(f: Func, a: Arc<Node>) -> Arc<Node> {
    if let Node::Const(c) = a.as_ref() {
        match f {
            Func::Abs => return constant(c.abs()),
            Func::Sqrt => {
                if !c.is_negative() {
                    if let Some(root) = exact_sqrt(c) {
                        return constant(root);
                    }
                }
            }
            Func::Sin | Func::Sinh | Func::Tanh if c.is_zero() => {
                return constant(BigRational::zero())
            }
            Func::Cos | Func::Cosh | Func::Exp if c.is_zero() => {
                return constant(BigRational::one())
            }
            Func::Ln if c.is_one() => return constant(BigRational::zero()),
            _ => {}
        }
    }
    Arc::new(Node::Func(f, a))
}

fn exact_sqrt(c: &BigRational) -> Option<BigRational> {
    let num = c.numer().sqrt();
    let den = c.denom().sqrt();
    if &(&num * &num) == c.numer() && &(&den * &den) == c.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

/// Fallback when flattening overflows: rebuild with simplified children only.
fn shallow(n: &Arc<Node>) -> Arc<Node> {
    Arc::new(match n.as_ref() {
        Node::Neg(a) => Node::Neg(simp(a)),
        Node::Add(a, b) => Node::Add(simp(a), simp(b)),
        Node::Sub(a, b) => Node::Sub(simp(a), simp(b)),
        Node::Mul(a, b) => Node::Mul(simp(a), simp(b)),
        Node::Div(a, b) => Node::Div(simp(a), simp(b)),
        Node::Pow(a, k) => Node::Pow(simp(a), *k),
        _ => return n.clone(),
    })
}

//! Symbolic differentiation with constant folding.
//!
//! Folding covers constant-constant arithmetic and the additive/multiplicative
//! identities (`0 + e`, `1 * e`, `0 * e`, `e ^ 1`). Nothing else is simplified.

use alloc::boxed::Box;

use super::{BinaryOp, ExprError, Node, UnaryOp};
use crate::math;

fn konst(n: &Node) -> Option<f64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn bin(op: BinaryOp, a: Node, b: Node) -> Node {
    Node::Binary(op, Box::new(a), Box::new(b))
}

fn un(op: UnaryOp, a: Node) -> Node {
    Node::Unary(op, Box::new(a))
}

pub(super) fn add(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Node::Const(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => bin(BinaryOp::Add, a, b),
    }
}

pub(super) fn sub(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Node::Const(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => bin(BinaryOp::Sub, a, b),
    }
}

pub(super) fn mul(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Node::Const(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Node::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => bin(BinaryOp::Mul, a, b),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Node::Const(x / y),
        (Some(0.0), _) => Node::Const(0.0),
        (_, Some(1.0)) => a,
        _ => bin(BinaryOp::Div, a, b),
    }
}

fn pow(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) if math::pow(x, y).is_finite() => Node::Const(math::pow(x, y)),
        (_, Some(1.0)) => a,
        _ => bin(BinaryOp::Pow, a, b),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        other => un(UnaryOp::Neg, other),
    }
}

pub(super) fn differentiate(n: &Node, var: usize) -> Result<Node, ExprError> {
    if let Node::Var(v) = n {
        return Ok(Node::Const(if *v == var { 1.0 } else { 0.0 }));
    }
    if !n.depends_on(var) {
        if n.contains_abs() {
            return Err(ExprError::NonDifferentiable);
        }
        return Ok(Node::Const(0.0));
    }
    Ok(match n {
        Node::Const(_) | Node::Var(_) => unreachable!(),
        Node::Unary(op, a) => {
            let da = differentiate(a, var)?;
            let a = (**a).clone();
            match op {
                UnaryOp::Neg => neg(da),
                UnaryOp::Sin => mul(un(UnaryOp::Cos, a), da),
                UnaryOp::Cos => neg(mul(un(UnaryOp::Sin, a), da)),
                UnaryOp::Exp => mul(un(UnaryOp::Exp, a), da),
                UnaryOp::Ln => div(da, a),
                UnaryOp::Sqrt => div(da, mul(Node::Const(2.0), un(UnaryOp::Sqrt, a))),
                UnaryOp::Abs => return Err(ExprError::NonDifferentiable),
            }
        }
        Node::Binary(op, a, b) => {
            let da = differentiate(a, var)?;
            let db = differentiate(b, var)?;
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => add(da, db),
                BinaryOp::Sub => sub(da, db),
                BinaryOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinaryOp::Div if b.is_constant() => div(da, b),
                BinaryOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Node::Const(2.0))),
                BinaryOp::Pow if !b.depends_on(var) => {
                    // d(u^c) = c u^(c-1) du
                    let exponent = sub(b.clone(), Node::Const(1.0));
                    mul(mul(b, pow(a, exponent)), da)
                }
                BinaryOp::Pow if !a.depends_on(var) => {
                    // d(c^v) = c^v ln(c) dv
                    mul(mul(pow(a.clone(), b), un(UnaryOp::Ln, a)), db)
                }
                BinaryOp::Pow => {
                    // d(u^v) = u^v (dv ln u + v du / u)
                    let whole = pow(a.clone(), b.clone());
                    let inner = add(mul(db, un(UnaryOp::Ln, a.clone())), div(mul(b, da), a));
                    mul(whole, inner)
                }
            }
        }
    })
}

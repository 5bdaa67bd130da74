//! Scalar expressions over a small declared variable list.
//!
//! Expressions are parsed from text, evaluated at points, and differentiated
//! symbolically. The grammar is deliberately minimal:
//!
//! | Precedence (high to low) | Syntax |
//! |--------------------------|--------|
//! | 1 | numbers, variables, `f(e)`, `(e)` |
//! | 2 | `a ^ b` (right associative) |
//! | 3 | unary `-a` |
//! | 4 | `a * b`, `a / b` |
//! | 5 | `a + b`, `a - b` |
//!
//! So `-x^2` is `-(x^2)`. The exponent of `^` may itself carry a sign, as in
//! `x^-2`. Functions: `sin cos exp ln sqrt abs`. There is no implicit
//! multiplication.

mod diff;
mod lagrangian;
mod parse;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math;

pub use lagrangian::{Lagrangian, LagrangianError, LAGRANGIAN_VARS};
pub use parse::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "ln" => Self::Ln,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Sqrt => "sqrt",
            Self::Abs => "abs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

/// Expression tree. Variables are indices into the owning [`Expr`]'s list.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Unary(_, a) => a.is_constant(),
            Node::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(v) => *v == var,
            Node::Unary(_, a) => a.depends_on(var),
            Node::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    fn contains_abs(&self) -> bool {
        match self {
            Node::Const(_) | Node::Var(_) => false,
            Node::Unary(op, a) => *op == UnaryOp::Abs || a.contains_abs(),
            Node::Binary(_, a, b) => a.contains_abs() || b.contains_abs(),
        }
    }

    fn substitute(&self, var: usize, with: &Node) -> Node {
        match self {
            Node::Var(v) if *v == var => with.clone(),
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Unary(op, a) => Node::Unary(*op, Box::new(a.substitute(var, with))),
            Node::Binary(op, a, b) => Node::Binary(
                *op,
                Box::new(a.substitute(var, with)),
                Box::new(b.substitute(var, with)),
            ),
        }
    }

    fn eval(&self, point: &[f64], vars: &[String]) -> Result<f64, EvalError> {
        let fail = |kind| EvalError {
            kind,
            subexpr: Display { node: self, vars }.to_string(),
        };
        let value = match self {
            Node::Const(c) => *c,
            Node::Var(v) => point[*v],
            Node::Unary(op, a) => {
                let a = a.eval(point, vars)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => math::sin(a),
                    UnaryOp::Cos => math::cos(a),
                    UnaryOp::Exp => math::exp(a),
                    UnaryOp::Abs => math::abs(a),
                    UnaryOp::Ln => {
                        if a <= 0.0 {
                            return Err(fail(DomainErrorKind::LogOfNonPositive));
                        }
                        math::ln(a)
                    }
                    UnaryOp::Sqrt => {
                        if a < 0.0 {
                            return Err(fail(DomainErrorKind::SqrtOfNegative));
                        }
                        math::sqrt(a)
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let a = a.eval(point, vars)?;
                let b = b.eval(point, vars)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(fail(DomainErrorKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        let r = math::pow(a, b);
                        if !r.is_finite() {
                            return Err(fail(DomainErrorKind::Power));
                        }
                        r
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail(DomainErrorKind::NonFinite))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    Power,
    NonFinite,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DivisionByZero => "division by zero",
            Self::LogOfNonPositive => "ln of a non-positive value",
            Self::SqrtOfNegative => "sqrt of a negative value",
            Self::Power => "power out of domain",
            Self::NonFinite => "non-finite value",
        })
    }
}

/// Evaluation failure, carrying the subexpression that failed.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: DomainErrorKind,
    pub subexpr: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("`abs` is not differentiable")]
    NonDifferentiable,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// A parsed expression together with its declared variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Vec<String>,
}

impl Expr {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let root = parse::parse(source, &vars)?;
        Ok(Self { root, vars })
    }

    pub fn constant(value: f64, vars: &[&str]) -> Self {
        Self {
            root: Node::Const(value),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn from_node(root: Node, vars: Vec<String>) -> Self {
        Self { root, vars }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// The value if the tree is a single constant node.
    pub fn as_const(&self) -> Option<f64> {
        match self.root {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.root.depends_on(var)
    }

    pub fn contains_abs(&self) -> bool {
        self.root.contains_abs()
    }

    /// Evaluates at `point`, given in declared variable order.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        assert_eq!(
            point.len(),
            self.vars.len(),
            "point arity must match the declared variables"
        );
        self.root.eval(point, &self.vars)
    }

    /// Like [`Expr::eval`] but reports an arity mismatch instead of panicking.
    pub fn try_eval(&self, point: &[f64]) -> Result<Result<f64, EvalError>, ExprError> {
        if point.len() != self.vars.len() {
            return Err(ExprError::Arity {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        Ok(self.root.eval(point, &self.vars))
    }

    /// Symbolic partial derivative with respect to variable index `var`.
    pub fn differentiate(&self, var: usize) -> Result<Expr, ExprError> {
        Ok(Self {
            root: diff::differentiate(&self.root, var)?,
            vars: self.vars.clone(),
        })
    }

    pub fn differentiate_by(&self, name: &str) -> Result<Expr, ExprError> {
        let var = self
            .var_index(name)
            .ok_or_else(|| ExprError::UnknownVariable(name.to_string()))?;
        self.differentiate(var)
    }

    /// Replaces variable `var` with `with`. Both must share a variable list.
    pub fn substitute(&self, var: usize, with: &Expr) -> Expr {
        debug_assert_eq!(self.vars, with.vars);
        Self {
            root: self.root.substitute(var, &with.root),
            vars: self.vars.clone(),
        }
    }

    /// Re-expresses the tree over a different variable list, mapping by name.
    pub fn rebind(&self, vars: &[&str]) -> Result<Expr, ExprError> {
        fn go(n: &Node, map: &[Option<usize>], names: &[String]) -> Result<Node, ExprError> {
            Ok(match n {
                Node::Const(c) => Node::Const(*c),
                Node::Var(v) => Node::Var(map[*v].ok_or_else(|| ExprError::UnknownVariable(names[*v].clone()))?),
                Node::Unary(op, a) => Node::Unary(*op, Box::new(go(a, map, names)?)),
                Node::Binary(op, a, b) => Node::Binary(*op, Box::new(go(a, map, names)?), Box::new(go(b, map, names)?)),
            })
        }
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|name| vars.iter().position(|v| v == name))
            .collect();
        Ok(Self {
            root: go(&self.root, &map, &self.vars)?,
            vars: vars.iter().map(|v| v.to_string()).collect(),
        })
    }

    /// `self * c` with constant folding.
    pub fn scaled(&self, c: f64) -> Expr {
        Self {
            root: diff::mul(Node::Const(c), self.root.clone()),
            vars: self.vars.clone(),
        }
    }

    /// `self + other` with constant folding.
    pub fn plus(&self, other: &Expr) -> Expr {
        debug_assert_eq!(self.vars, other.vars);
        Self {
            root: diff::add(self.root.clone(), other.root.clone()),
            vars: self.vars.clone(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display {
            node: &self.root,
            vars: &self.vars,
        }
        .fmt(f)
    }
}

/// Fully parenthesized printer; its output reparses to the same tree.
struct Display<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Display { node, vars: self.vars };
        match self.node {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(v) => f.write_str(&self.vars[*v]),
            Node::Unary(UnaryOp::Neg, a) => write!(f, "(-{})", sub(a)),
            Node::Unary(op, a) => write!(f, "{}({})", op.name(), sub(a)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
        }
    }
}

#[cfg(test)]
mod tests;

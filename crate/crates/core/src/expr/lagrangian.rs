use super::{EvalError, Expr, ExprError, ParseError};

/// Variable order of every compositional Lagrangian: time, state, velocity
/// and the self-composition `z = q(q(x))`.
pub const LAGRANGIAN_VARS: [&str; 4] = ["x", "q", "qd", "z"];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("Lagrangian must be twice differentiable; `abs` is not allowed")]
    ContainsAbs,
    #[error("Lagrangian must be declared over (x, q, qd, z)")]
    WrongVariables,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `L(x, q, qd, z)` with its four first partials precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct Lagrangian {
    body: Expr,
    partials: [Expr; 4],
}

impl Lagrangian {
    pub fn parse(source: &str) -> Result<Self, LagrangianError> {
        Self::new(Expr::parse(source, &LAGRANGIAN_VARS)?)
    }

    pub fn new(body: Expr) -> Result<Self, LagrangianError> {
        if body.vars() != LAGRANGIAN_VARS {
            return Err(LagrangianError::WrongVariables);
        }
        if body.contains_abs() {
            return Err(LagrangianError::ContainsAbs);
        }
        let partials = [
            body.differentiate(0)?,
            body.differentiate(1)?,
            body.differentiate(2)?,
            body.differentiate(3)?,
        ];
        Ok(Self { body, partials })
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    /// `index` is 1-based to match the usual `∂ᵢL` numbering.
    pub fn partial(&self, index: usize) -> &Expr {
        &self.partials[index - 1]
    }

    /// True when the body references `z`; otherwise no composition is needed.
    pub fn uses_composition(&self) -> bool {
        self.body.depends_on(3)
    }

    pub fn eval(&self, x: f64, q: f64, qd: f64, z: f64) -> Result<f64, EvalError> {
        self.body.eval(&[x, q, qd, z])
    }

    pub fn eval_partial(&self, index: usize, x: f64, q: f64, qd: f64, z: f64) -> Result<f64, EvalError> {
        self.partials[index - 1].eval(&[x, q, qd, z])
    }
}

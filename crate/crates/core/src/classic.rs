//! Classical counterparts for Lagrangians `L(x, q, q')` without composition,
//! with `q` vector-valued.
//!
//! Residuals use the same finite differences and exclusion rules as
//! [`crate::varcalc`], so the two can be compared point by point.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{EvalError, Expr, ExprError, ParseError};
use crate::fd;
use crate::math;
use crate::pieces::Decomposition;
use crate::pwmap::{MapError, PiecewiseCurve};
use crate::varcalc::{ProblemOptions, ResidualError};

/// Variable names for an `n`-dimensional problem: `x, q, qd` when `n = 1`,
/// otherwise `x, q1..qn, qd1..qdn`.
pub fn variable_names(n: usize) -> Vec<String> {
    let mut v = Vec::with_capacity(2 * n + 1);
    v.push(String::from("x"));
    if n == 1 {
        v.push(String::from("q"));
        v.push(String::from("qd"));
    } else {
        v.extend((1..=n).map(|i| format!("q{i}")));
        v.extend((1..=n).map(|i| format!("qd{i}")));
    }
    v
}

/// Generator variable names: `x, q` or `x, q1..qn`.
pub fn generator_names(n: usize) -> Vec<String> {
    let mut v = variable_names(n);
    v.truncate(n + 1);
    v
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ClassicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("{0}")]
    Shape(&'static str),
}

/// `L(x, q, q')` over `ℝⁿ` with its partials.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalLagrangian {
    dim: usize,
    body: Expr,
    d_x: Expr,
    d_q: Vec<Expr>,
    d_qd: Vec<Expr>,
}

impl ClassicalLagrangian {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ClassicError> {
        let names = variable_names(dim);
        Self::new(Expr::parse(source, &as_strs(&names))?, dim)
    }

    /// `body` is rebound to [`variable_names`]`(dim)`.
    pub fn new(body: Expr, dim: usize) -> Result<Self, ClassicError> {
        if dim == 0 {
            return Err(ClassicError::Shape("dimension must be positive"));
        }
        let names = variable_names(dim);
        let body = body.rebind(&as_strs(&names))?;
        let d = |i: usize| body.differentiate(i);
        Ok(Self {
            dim,
            d_x: d(0)?,
            d_q: (1..=dim).map(d).collect::<Result<_, _>>()?,
            d_qd: (dim + 1..=2 * dim).map(d).collect::<Result<_, _>>()?,
            body,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }
}

/// Position and velocity along the candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    /// `[x, q₁..qₙ, q'₁..q'ₙ]`, the evaluation point of `L`.
    point: Vec<f64>,
}

impl ClassicalState {
    pub fn x(&self) -> f64 {
        self.point[0]
    }

    fn dim(&self) -> usize {
        (self.point.len() - 1) / 2
    }

    pub fn q(&self) -> &[f64] {
        &self.point[1..=self.dim()]
    }

    pub fn qd(&self) -> &[f64] {
        &self.point[self.dim() + 1..]
    }

    fn generator_point(&self) -> &[f64] {
        &self.point[..=self.dim()]
    }
}

/// An infinitesimal transformation with `τ(x, q)` and `ξ(x, q) ∈ ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalGenerator {
    pub tau: Expr,
    pub xi: Vec<Expr>,
}

impl ClassicalGenerator {
    /// Expressions are parsed over [`generator_names`].
    pub fn parse(tau: &str, xi: &[&str]) -> Result<Self, ClassicError> {
        let names = generator_names(xi.len());
        let vars = as_strs(&names);
        Ok(Self {
            tau: Expr::parse(tau, &vars)?,
            xi: xi.iter().map(|s| Expr::parse(s, &vars)).collect::<Result<_, _>>()?,
        })
    }
}

/// A classical problem with candidate components `q₁..qₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalProblem {
    lagrangian: ClassicalLagrangian,
    curves: Vec<PiecewiseCurve>,
    options: ProblemOptions,
    pieces: Decomposition,
    owners: Vec<Vec<usize>>,
}

impl ClassicalProblem {
    pub fn new(lagrangian: ClassicalLagrangian, curves: Vec<PiecewiseCurve>) -> Result<Self, ClassicError> {
        Self::with_options(lagrangian, curves, ProblemOptions::default())
    }

    pub fn with_options(
        lagrangian: ClassicalLagrangian,
        curves: Vec<PiecewiseCurve>,
        options: ProblemOptions,
    ) -> Result<Self, ClassicError> {
        if curves.len() != lagrangian.dim() {
            return Err(ClassicError::Shape("one curve per component is required"));
        }
        let (a, b) = curves[0].domain();
        if curves.iter().any(|c| c.domain() != (a, b)) {
            return Err(ClassicError::Shape("all components must share the domain"));
        }
        let pieces = Decomposition::new(a, b, curves.iter().flat_map(|c| c.breakpoints()));
        let owners = (0..pieces.len())
            .map(|k| {
                let (lo, hi) = pieces.interval(k);
                curves.iter().map(|c| c.piece_index(0.5 * (lo + hi))).collect()
            })
            .collect::<Result<_, MapError>>()?;
        Ok(Self {
            lagrangian,
            curves,
            options,
            pieces,
            owners,
        })
    }

    pub fn lagrangian(&self) -> &ClassicalLagrangian {
        &self.lagrangian
    }

    pub fn domain(&self) -> (f64, f64) {
        self.curves[0].domain()
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.dim
    }

    fn width(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    fn fd_step(&self) -> f64 {
        self.options.fd_step * self.width()
    }

    fn state_in(&self, k: usize, x: f64) -> Result<ClassicalState, EvalError> {
        let n = self.dim();
        let mut point = alloc::vec![0.0; 2 * n + 1];
        point[0] = x;
        for (i, (c, &j)) in self.curves.iter().zip(&self.owners[k]).enumerate() {
            let piece = &c.pieces()[j];
            point[1 + i] = piece.eval(x)?;
            point[1 + n + i] = piece.deriv(x)?;
        }
        Ok(ClassicalState { point })
    }

    /// State at `x` under the half-open ownership convention.
    pub fn state(&self, x: f64) -> Result<ClassicalState, ResidualError> {
        self.curves[0].piece_index(x)?;
        Ok(self.state_in(self.pieces.locate(x), x)?)
    }

    fn admit(&self, x: f64) -> Result<usize, ResidualError> {
        self.curves[0].piece_index(x)?;
        let margin = self.options.breakpoint_margin * self.width();
        Ok(self.pieces.admit(x, margin, fd::REACH * self.fd_step())?)
    }

    fn derivative(
        &self,
        k: usize,
        x: f64,
        mut g: impl FnMut(&ClassicalState) -> Result<f64, EvalError>,
    ) -> Result<f64, EvalError> {
        fd::central(|s| g(&self.state_in(k, s)?), x, self.fd_step())
    }

    fn momentum_dot_velocity(&self, s: &ClassicalState) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for (d, v) in self.lagrangian.d_qd.iter().zip(s.qd()) {
            acc += d.eval(&s.point)? * v;
        }
        Ok(acc)
    }
}

/// `d/dx ∂L/∂q'ᵢ − ∂L/∂qᵢ` for every component.
pub fn classical_el_residual(cp: &ClassicalProblem, x: f64) -> Result<Vec<f64>, ResidualError> {
    let k = cp.admit(x)?;
    let s = cp.state_in(k, x)?;
    let l = &cp.lagrangian;
    let mut out = Vec::with_capacity(cp.dim());
    for (dq, dqd) in l.d_q.iter().zip(&l.d_qd) {
        let d = cp.derivative(k, x, |s| dqd.eval(&s.point))?;
        out.push(d - dq.eval(&s.point)?);
    }
    Ok(out)
}

/// `∂L/∂x − d/dx[L − Σ ∂L/∂q'ᵢ q'ᵢ]`.
pub fn classical_dbr_residual(cp: &ClassicalProblem, x: f64) -> Result<f64, ResidualError> {
    let k = cp.admit(x)?;
    let s = cp.state_in(k, x)?;
    let l = &cp.lagrangian;
    let d = cp.derivative(k, x, |s| Ok(l.body.eval(&s.point)? - cp.momentum_dot_velocity(s)?))?;
    Ok(l.d_x.eval(&s.point)? - d)
}

fn check_generator(cp: &ClassicalProblem, g: &ClassicalGenerator) -> Result<(), ResidualError> {
    if g.xi.len() != cp.dim() {
        return Err(ResidualError::InvalidArgument(
            "generator dimension differs from the problem",
        ));
    }
    Ok(())
}

/// `Σ ∂L/∂q'ᵢ ξᵢ + (L − Σ ∂L/∂q'ᵢ q'ᵢ)τ`.
pub fn classical_noether_quantity(cp: &ClassicalProblem, g: &ClassicalGenerator, x: f64) -> Result<f64, ResidualError> {
    check_generator(cp, g)?;
    let s = cp.state(x)?;
    Ok(noether_at(cp, g, &s)?)
}

fn noether_at(cp: &ClassicalProblem, g: &ClassicalGenerator, s: &ClassicalState) -> Result<f64, EvalError> {
    let l = &cp.lagrangian;
    let gp = s.generator_point();
    let mut c = 0.0;
    for (d, xi) in l.d_qd.iter().zip(&g.xi) {
        c += d.eval(&s.point)? * xi.eval(gp)?;
    }
    Ok(c + (l.body.eval(&s.point)? - cp.momentum_dot_velocity(s)?) * g.tau.eval(gp)?)
}

/// Difference quotient of the Noether quantity along the candidate.
pub fn classical_noether_derivative(
    cp: &ClassicalProblem,
    g: &ClassicalGenerator,
    x: f64,
) -> Result<f64, ResidualError> {
    check_generator(cp, g)?;
    let k = cp.admit(x)?;
    Ok(cp.derivative(k, x, |s| noether_at(cp, g, s))?)
}

/// `∂L/∂x τ + Σ ∂L/∂qᵢ ξᵢ + Σ ∂L/∂q'ᵢ (ξ'ᵢ − q'ᵢ τ') + L τ'`.
pub fn classical_invariance_residual(
    cp: &ClassicalProblem,
    g: &ClassicalGenerator,
    x: f64,
) -> Result<f64, ResidualError> {
    check_generator(cp, g)?;
    let k = cp.admit(x)?;
    let s = cp.state_in(k, x)?;
    let l = &cp.lagrangian;
    let gp = s.generator_point();
    let taud = cp.derivative(k, x, |s| g.tau.eval(s.generator_point()))?;
    let mut r = l.d_x.eval(&s.point)? * g.tau.eval(gp)?;
    for (i, xi) in g.xi.iter().enumerate() {
        let xid = cp.derivative(k, x, |s| xi.eval(s.generator_point()))?;
        r += l.d_q[i].eval(&s.point)? * xi.eval(gp)? + l.d_qd[i].eval(&s.point)? * (xid - s.qd()[i] * taud);
    }
    Ok(r + l.body.eval(&s.point)? * taud)
}

/// Sup-norm of a vector residual.
pub fn norm_inf(v: &[f64]) -> f64 {
    math::max_abs(v.iter().copied())
}

//! Invariance residuals, the gauge term and the conserved quantity of
//! Noether's theorem for compositional functionals.
//!
//! A generator `(τ, ξ)` acts by `x ↦ x + ετ(x, q)`, `q ↦ q + εξ(x, q)`. Along
//! an extremal that is invariant under it,
//! `C = (L − ∂₃L q')τ + ∂₃L ξ + f` is constant on every smooth piece, where
//! the gauge term satisfies `f' = τ q' Σ_{t ∈ q⁻¹(x)} ∂₄L(t, ...)/|q'(t)|`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::expr::{DomainErrorKind, EvalError, Expr, ParseError};
use crate::math;
use crate::pieces::{midpoints, ExclusionReason};
use crate::pwmap::MapError;
use crate::quad::{cumulative, integrate_split, AdaptiveSpec};
use crate::varcalc::{Problem, ResidualError, ResidualReport, State, MIN_SAMPLES};

/// Variables of `τ` and `ξ`.
pub const GENERATOR_VARS: [&str; 2] = ["x", "q"];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NoetherError {
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error("the symmetry equation is singular at x = {x}: L - qd*dL/dqd vanishes")]
    OdeSingular { x: f64 },
    #[error("no collocation point survived the exclusions")]
    NoCollocationPoints,
    #[error("{0}")]
    InvalidArgument(&'static str),
}

impl From<EvalError> for NoetherError {
    fn from(e: EvalError) -> Self {
        Self::Residual(e.into())
    }
}

impl From<MapError> for NoetherError {
    fn from(e: MapError) -> Self {
        Self::Residual(e.into())
    }
}

/// A solution of the `ξ = 0` symmetry equation. `ln τ` is stored at grid
/// nodes; between nodes it is completed by quadrature of the equation, so
/// `τ` is accurate everywhere the equation is regular. Within the
/// breakpoint margin of `a` or `b`, where it is often singular, the end
/// node's value is held instead.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSolution {
    problem: Problem,
    nodes: Vec<f64>,
    log_tau: Vec<f64>,
    scale: f64,
    /// Whether the equation is singular between `a` (resp. `b`) and the
    /// nearest node.
    hold: (bool, bool),
}

impl TauSolution {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `τ` at the grid nodes.
    pub fn values(&self) -> Vec<f64> {
        self.log_tau.iter().map(|l| self.scale * math::exp(*l)).collect()
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let (first, last) = (self.nodes[0], self.nodes[self.nodes.len() - 1]);
        let x = match self.hold {
            (true, _) if x < first => first,
            (_, true) if x > last => last,
            _ => x,
        };
        Ok(self.scale * math::exp(self.log_at(x)?))
    }

    fn log_at(&self, x: f64) -> Result<f64, EvalError> {
        let j = self.nodes.partition_point(|&n| n <= x).saturating_sub(1);
        let mut r = |s: f64| ode_ratio(&self.problem, s);
        let int = integrate_split(
            &mut r,
            self.nodes[j],
            x,
            self.problem.breakpoints(),
            AdaptiveSpec::default(),
        )?;
        Ok(self.log_tau[j] - int)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            scale: k * self.scale,
            ..self.clone()
        }
    }
}

const SINGULAR_DENOMINATOR: &str = "L - qd*dL/dqd";

fn is_singular(e: &EvalError) -> bool {
    e.kind == DomainErrorKind::DivisionByZero && e.subexpr == SINGULAR_DENOMINATOR
}

/// `∂₁L / (L − ∂₃L q')` along the candidate, with the formulas of the piece
/// owning `x` (also slightly outside the domain).
fn ode_ratio_at(p: &Problem) -> impl FnMut(f64) -> Result<f64, EvalError> + '_ {
    move |x| ode_ratio(p, x)
}

fn ode_ratio(p: &Problem, x: f64) -> Result<f64, EvalError> {
    let s = p.state_in(p.decomposition().locate(x), x)?;
    let d = p.lag(0, &s)? - p.lag(3, &s)? * s.qd;
    if math::abs(d) < p.options().delta_min {
        return Err(EvalError {
            kind: DomainErrorKind::DivisionByZero,
            subexpr: SINGULAR_DENOMINATOR.into(),
        });
    }
    Ok(p.lag(1, &s)? / d)
}

/// One component of a generator.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorFn {
    /// Expression over `(x, q)`.
    Expr(Expr),
    /// Numerical solution of the symmetry equation, a function of `x` alone.
    Solved(Box<TauSolution>),
}

impl GeneratorFn {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Ok(Self::Expr(Expr::parse(source, &GENERATOR_VARS)?))
    }

    pub fn zero() -> Self {
        Self::Expr(Expr::constant(0.0, &GENERATOR_VARS))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Expr(e) if e.as_const() == Some(0.0))
    }

    pub fn eval(&self, x: f64, q: f64) -> Result<f64, EvalError> {
        match self {
            Self::Expr(e) => e.eval(&[x, q]),
            Self::Solved(t) => t.eval(x),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Expr(e) => Self::Expr(e.scaled(k)),
            Self::Solved(t) => Self::Solved(Box::new(t.scaled(k))),
        }
    }
}

impl fmt::Display for GeneratorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Expr(e) => write!(f, "{e}"),
            Self::Solved(t) => write!(f, "<solved on {} nodes>", t.nodes.len()),
        }
    }
}

/// An infinitesimal transformation `(τ, ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGenerator {
    pub tau: GeneratorFn,
    pub xi: GeneratorFn,
}

impl SymmetryGenerator {
    pub fn new(tau: GeneratorFn, xi: GeneratorFn) -> Self {
        Self { tau, xi }
    }

    pub fn parse(tau: &str, xi: &str) -> Result<Self, ParseError> {
        Ok(Self::new(GeneratorFn::parse(tau)?, GeneratorFn::parse(xi)?))
    }

    pub fn zero() -> Self {
        Self::new(GeneratorFn::zero(), GeneratorFn::zero())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.tau.scaled(k), self.xi.scaled(k))
    }
}

/// Which rewriting of the invariance condition to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InvarianceForm {
    /// `∂₁Lτ + ∂₂Lξ + ∂₃L(ξ' − q'τ') + ∂₄L q'(q(x))ξ + ∂₄L ξ(q(x), z(x)) + Lτ'`.
    #[default]
    Direct,
    /// `∂₁Lτ + (d/dx ∂₃L)ξ + ∂₃L(ξ' − q'τ') + Lτ'`: the `ξ` terms transported
    /// by the Frobenius-Perron operator and collapsed with the Euler-Lagrange
    /// equation. Agrees with the direct form along extremals.
    FrobeniusPerron,
}

impl InvarianceForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::FrobeniusPerron => "fp",
        }
    }
}

fn gen_at(g: &GeneratorFn, s: &State) -> Result<f64, EvalError> {
    g.eval(s.x, s.q)
}

pub fn invariance_residual(
    p: &Problem,
    g: &SymmetryGenerator,
    x: f64,
    form: InvarianceForm,
) -> Result<f64, ResidualError> {
    let k = p.admit(x)?;
    let s = p.state_in(k, x)?;
    let tau = gen_at(&g.tau, &s)?;
    let xi = gen_at(&g.xi, &s)?;
    let taud = p.total_derivative(k, x, |s| gen_at(&g.tau, s))?;
    let xid = p.total_derivative(k, x, |s| gen_at(&g.xi, s))?;
    let l3 = p.lag(3, &s)?;
    let mut r = p.lag(1, &s)? * tau + l3 * (xid - s.qd * taud) + p.lag(0, &s)? * taud;
    match form {
        InvarianceForm::Direct => {
            r += p.lag(2, &s)? * xi;
            if p.uses_composition() && !g.xi.is_zero() {
                let l4 = p.lag(4, &s)?;
                let shifted =
                    g.xi.eval(s.q, s.z)
                        .map_err(|_| ExclusionReason::GeneratorUndefined { at: s.q })?;
                r += l4 * p.outer_slope(k, s.q)? * xi + l4 * shifted;
            }
        }
        InvarianceForm::FrobeniusPerron => {
            if !g.xi.is_zero() {
                r += p.total_derivative(k, x, |s| p.lag(3, s))? * xi;
            }
        }
    }
    Ok(r)
}

/// Invariance residuals at `n` midpoints.
pub fn scan_invariance(
    p: &Problem,
    g: &SymmetryGenerator,
    form: InvarianceForm,
    n: usize,
) -> Result<ResidualReport, ResidualError> {
    if n < MIN_SAMPLES {
        return Err(ResidualError::InvalidArgument("a scan needs at least 10 samples"));
    }
    let (a, b) = p.domain();
    ResidualReport::collect(p, midpoints(a, b, n), |x| invariance_residual(p, g, x, form))
}

/// `τ q' Σ ∂₄L/|q'(t)|` at `x`, the derivative of the gauge term.
pub fn gauge_integrand(p: &Problem, g: &SymmetryGenerator, x: f64) -> Result<f64, ResidualError> {
    if !p.uses_composition() || g.tau.is_zero() {
        return Ok(0.0);
    }
    let s = p.state(x)?;
    Ok(gen_at(&g.tau, &s)? * s.qd * p.preimage_sum(x, false)?)
}

/// Default number of grid cells of the gauge table.
pub const GAUGE_CELLS: usize = 200;

/// Gauge term `f` tabulated on a uniform grid, anchored at `f(a) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFn {
    nodes: Vec<f64>,
    values: Vec<f64>,
    breaks: Vec<f64>,
    spec: AdaptiveSpec,
}

impl GaugeFn {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(k τ, k ξ)` has gauge `k f`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| k * v).collect(),
            ..self.clone()
        }
    }

    /// `f(x)`: the table value at the node below `x` plus the integral from
    /// there. `g` must be the generator the table was built for.
    pub fn eval(&self, p: &Problem, g: &SymmetryGenerator, x: f64) -> Result<f64, ResidualError> {
        let j = self.nodes.partition_point(|&n| n <= x).saturating_sub(1);
        let base = self.values[j];
        if x == self.nodes[j] || !p.uses_composition() || g.tau.is_zero() {
            return Ok(base);
        }
        let mut f = |s: f64| gauge_integrand(p, g, s);
        Ok(base + integrate_split(&mut f, self.nodes[j], x, &self.breaks, self.spec)?)
    }
}

/// Points where the gauge integrand may jump: breakpoints of the problem,
/// images of branch ends, and images of breakpoints.
fn gauge_breaks(p: &Problem) -> Vec<f64> {
    let mut out: Vec<f64> = p.breakpoints().to_vec();
    if let Some(m) = p.map() {
        for b in m.branches() {
            for e in [b.lo, b.hi] {
                out.extend(b.eval(e).ok());
            }
            for &bp in p.breakpoints() {
                if b.lo <= bp && bp <= b.hi {
                    out.extend(b.eval(bp).ok());
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Cumulative gauge term on `cells` uniform cells.
pub fn gauge_f(p: &Problem, g: &SymmetryGenerator, cells: usize) -> Result<GaugeFn, ResidualError> {
    if cells == 0 {
        return Err(ResidualError::InvalidArgument("the gauge grid needs at least one cell"));
    }
    let (a, b) = p.domain();
    let nodes: Vec<f64> = (0..=cells)
        .map(|i| {
            if i == cells {
                b
            } else {
                a + (b - a) * i as f64 / cells as f64
            }
        })
        .collect();
    let breaks = gauge_breaks(p);
    let spec = AdaptiveSpec::default();
    let values = if !p.uses_composition() || g.tau.is_zero() {
        alloc::vec![0.0; nodes.len()]
    } else {
        cumulative(&mut |s| gauge_integrand(p, g, s), &nodes, &breaks, spec)?
    };
    Ok(GaugeFn {
        nodes,
        values,
        breaks,
        spec,
    })
}

/// `C = (L − ∂₃L q')τ + ∂₃L ξ + f` at `x`.
pub fn conserved_quantity(p: &Problem, g: &SymmetryGenerator, f: &GaugeFn, x: f64) -> Result<f64, ResidualError> {
    let s = p.state(x)?;
    Ok(conserved_without_gauge(p, g, &s)? + f.eval(p, g, x)?)
}

fn conserved_without_gauge(p: &Problem, g: &SymmetryGenerator, s: &State) -> Result<f64, EvalError> {
    let l3 = p.lag(3, s)?;
    Ok((p.lag(0, s)? - l3 * s.qd) * gen_at(&g.tau, s)? + l3 * gen_at(&g.xi, s)?)
}

/// `dC/dx`: the difference quotient of the gauge-free part plus the gauge
/// integrand, which is exactly `f'`.
pub fn conserved_derivative(p: &Problem, g: &SymmetryGenerator, x: f64) -> Result<f64, ResidualError> {
    let k = p.admit(x)?;
    let d = p.total_derivative(k, x, |s| conserved_without_gauge(p, g, s))?;
    Ok(d + gauge_integrand(p, g, x)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationOptions {
    pub samples: usize,
    pub gauge_cells: usize,
    /// Per-piece variation allowed; `None` means `1e-6 (1 + max|C|)`.
    pub tolerance: Option<f64>,
}

impl Default for ConservationOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            gauge_cells: GAUGE_CELLS,
            tolerance: None,
        }
    }
}

/// Pieces with fewer admitted samples are flagged and left out of the
/// verdict.
pub const MIN_PIECE_SAMPLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PieceVariation {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub flagged: bool,
}

impl PieceVariation {
    pub fn variation(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.max - self.min
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    /// `C` at each admitted sample.
    pub values: ResidualReport,
    /// `dC/dx` at the same samples.
    pub derivative: ResidualReport,
    pub pieces: Vec<PieceVariation>,
    pub gauge: GaugeFn,
    pub max_abs: f64,
    pub tolerance: f64,
    pub conserved: bool,
}

/// Samples `C` and `dC/dx` on every smooth piece and decides whether `C` is
/// piecewise constant.
pub fn conservation_check(
    p: &Problem,
    g: &SymmetryGenerator,
    opts: ConservationOptions,
) -> Result<ConservationReport, ResidualError> {
    if opts.samples < MIN_SAMPLES {
        return Err(ResidualError::InvalidArgument("a scan needs at least 10 samples"));
    }
    let gauge = gauge_f(p, g, opts.gauge_cells)?;
    let (a, b) = p.domain();
    let xs = || midpoints(a, b, opts.samples);
    let values = ResidualReport::collect(p, xs(), |x| {
        p.admit(x)?;
        conserved_quantity(p, g, &gauge, x)
    })?;
    let derivative = ResidualReport::collect(p, xs(), |x| conserved_derivative(p, g, x))?;
    let mut pieces: Vec<PieceVariation> = values
        .pieces
        .iter()
        .map(|s| PieceVariation {
            lo: s.lo,
            hi: s.hi,
            samples: s.samples,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            flagged: s.samples < MIN_PIECE_SAMPLES,
        })
        .collect();
    for s in &values.samples {
        let v = &mut pieces[s.piece];
        v.min = v.min.min(s.value);
        v.max = v.max.max(s.value);
    }
    let max_abs = values.sup;
    let tolerance = opts.tolerance.unwrap_or(1e-6 * (1.0 + max_abs));
    let checked: Vec<&PieceVariation> = pieces.iter().filter(|v| !v.flagged).collect();
    let conserved = !checked.is_empty() && checked.iter().all(|v| v.variation() <= tolerance);
    Ok(ConservationReport {
        values,
        derivative,
        pieces,
        gauge,
        max_abs,
        tolerance,
        conserved,
    })
}

/// Default number of grid cells for [`solve_tau_ode`].
pub const ODE_CELLS: usize = 1000;

/// Solves the `ξ = 0` invariance condition `∂₁L τ + (L − ∂₃L q') τ' = 0`
/// along the candidate, normalized so that `τ(x_ref) = 1`.
///
/// The grid is uniform with the smooth-piece breakpoints added; its two end
/// nodes are moved inward by the breakpoint margin, since the equation is
/// often singular at an end of the interval. The equation must be regular
/// at every node.
pub fn solve_tau_ode(p: &Problem, x_ref: f64, cells: usize) -> Result<SymmetryGenerator, NoetherError> {
    let (a, b) = p.domain();
    if !(a <= x_ref && x_ref <= b) {
        return Err(NoetherError::InvalidArgument("x_ref lies outside the domain"));
    }
    if cells < 2 {
        return Err(NoetherError::InvalidArgument("the grid needs at least two cells"));
    }
    let delta = p.margin();
    let mut nodes: Vec<f64> = (0..=cells).map(|i| a + (b - a) * i as f64 / cells as f64).collect();
    nodes[0] = a + delta;
    nodes[cells] = b - delta;
    let merge = 1e-12 * (b - a);
    for &bp in p.breakpoints() {
        if nodes.iter().all(|n| math::abs(n - bp) > merge) {
            nodes.push(bp);
        }
    }
    nodes.sort_by(f64::total_cmp);
    // both one-sided limits at every node
    for &x in &nodes {
        for k in [
            p.decomposition().locate(x),
            p.decomposition().locate(x).saturating_sub(1),
        ] {
            let s = p.state_in(k, x)?;
            if math::abs(p.lag(0, &s)? - p.lag(3, &s)? * s.qd) < p.options().delta_min {
                return Err(NoetherError::OdeSingular { x });
            }
        }
    }
    let singular = |e: EvalError, x: f64| {
        if is_singular(&e) {
            NoetherError::OdeSingular { x }
        } else {
            NoetherError::from(e)
        }
    };
    let last = core::cell::Cell::new(a);
    let mut integrand = |x: f64| {
        last.set(x);
        ode_ratio(p, x)
    };
    let spec = AdaptiveSpec::default();
    let breaks = p.breakpoints();
    let cum = cumulative(&mut integrand, &nodes, breaks, spec).map_err(|e| singular(e, last.get()))?;
    let at_ref = integrate_split(&mut integrand, nodes[0], x_ref, breaks, spec).map_err(|e| singular(e, last.get()))?;
    let log_tau = cum.iter().map(|c| at_ref - c).collect();
    let end_singular = |from: f64, to: f64| match integrate_split(&mut ode_ratio_at(p), from, to, breaks, spec) {
        Ok(_) => Ok(false),
        Err(e) if is_singular(&e) => Ok(true),
        Err(e) => Err(NoetherError::from(e)),
    };
    let hold = (end_singular(nodes[0], a)?, end_singular(nodes[nodes.len() - 1], b)?);
    let solution = TauSolution {
        problem: p.clone(),
        nodes,
        log_tau,
        scale: 1.0,
        hold,
    };
    Ok(SymmetryGenerator::new(
        GeneratorFn::Solved(Box::new(solution)),
        GeneratorFn::zero(),
    ))
}

/// Null-space threshold relative to the largest singular value.
pub const NULL_SPACE_EPS: f64 = 1e-8;

/// A generator found by [`find_symmetries`], with its unit coefficient
/// vector over the `τ` basis followed by the `ξ` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FoundSymmetry {
    pub coefficients: Vec<f64>,
    pub generator: SymmetryGenerator,
}

fn combine(basis: &[Expr], coeffs: &[f64]) -> GeneratorFn {
    let mut acc = Expr::constant(0.0, &GENERATOR_VARS);
    for (e, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            acc = acc.plus(&e.scaled(c));
        }
    }
    GeneratorFn::Expr(acc)
}

/// Null space of the collocation matrix whose column `j` holds the direct
/// invariance residual of the `j`-th basis generator at the admitted
/// midpoints. Basis expressions must be over `(x, q)`.
pub fn find_symmetries(
    p: &Problem,
    basis_tau: &[Expr],
    basis_xi: &[Expr],
    n_colloc: usize,
    eps_null: f64,
) -> Result<Vec<FoundSymmetry>, NoetherError> {
    let cols = basis_tau.len() + basis_xi.len();
    if cols == 0 {
        return Ok(Vec::new());
    }
    if n_colloc < 2 * cols {
        return Err(NoetherError::InvalidArgument(
            "need at least two collocation points per basis element",
        ));
    }
    let rebind = |e: &Expr| {
        e.rebind(&GENERATOR_VARS)
            .map_err(|_| NoetherError::InvalidArgument("basis expressions must be over (x, q)"))
    };
    let tau_basis = basis_tau.iter().map(rebind).collect::<Result<Vec<_>, _>>()?;
    let xi_basis = basis_xi.iter().map(rebind).collect::<Result<Vec<_>, _>>()?;
    let generators: Vec<SymmetryGenerator> = tau_basis
        .iter()
        .map(|e| SymmetryGenerator::new(GeneratorFn::Expr(e.clone()), GeneratorFn::zero()))
        .chain(
            xi_basis
                .iter()
                .map(|e| SymmetryGenerator::new(GeneratorFn::zero(), GeneratorFn::Expr(e.clone()))),
        )
        .collect();
    let (a, b) = p.domain();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    'points: for x in midpoints(a, b, n_colloc) {
        let mut row = Vec::with_capacity(cols);
        for g in &generators {
            match invariance_residual(p, g, x, InvarianceForm::Direct) {
                Ok(v) => row.push(v),
                Err(ResidualError::Excluded(_)) => continue 'points,
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(NoetherError::NoCollocationPoints);
    }
    // zero rows keep the factorization square so every right singular
    // vector is available
    let m = rows.len().max(cols);
    let mat = DMatrix::from_fn(m, cols, |i, j| rows.get(i).map_or(0.0, |r| r[j]));
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors were requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |s, v| s.max(*v));
    let mut out = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > eps_null * sigma_max {
            continue;
        }
        let mut coeffs: Vec<f64> = v_t.row(i).iter().copied().collect();
        // sign convention: the largest component is positive
        let lead = coeffs
            .iter()
            .fold(0.0f64, |m, c| if math::abs(*c) > math::abs(m) { *c } else { m });
        if lead < 0.0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        let (ct, cx) = coeffs.split_at(tau_basis.len());
        out.push(FoundSymmetry {
            generator: SymmetryGenerator::new(combine(&tau_basis, ct), combine(&xi_basis, cx)),
            coefficients: coeffs,
        });
    }
    Ok(out)
}

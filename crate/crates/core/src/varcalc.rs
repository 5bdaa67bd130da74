//! Compositional functionals and the pointwise residuals of their necessary
//! conditions.
//!
//! A [`Problem`] pairs a Lagrangian `L(x, q, qd, z)` with a candidate `q`.
//! The interval is split at the breakpoints of `q` and of `z = q∘q`; on each
//! smooth piece the state `(q, q', z)` is evaluated from fixed branch
//! formulas, so quadrature panels and difference stencils never see a jump.

use alloc::vec::Vec;

use crate::expr::{EvalError, Lagrangian};
use crate::fd;
use crate::fp::{DensityFn, FpError};
use crate::math;
use crate::pieces::{midpoints, Decomposition};
use crate::pwmap::{CompositionMode, MapError, MapTolerances, PiecewiseCurve, PiecewiseMap, SelfComposition};
use crate::quad::{simpson_refined, QuadratureSpec};

pub use crate::pieces::ExclusionReason;

/// Numerical knobs shared by every analysis of a problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemOptions {
    /// Breakpoint exclusion margin `δ_bp`, relative to `b - a`.
    pub breakpoint_margin: f64,
    /// Finite-difference step `h_fd`, relative to `b - a`.
    pub fd_step: f64,
    /// Minimum admissible `|q'|` when the candidate is used as a map.
    pub delta_min: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self {
            breakpoint_margin: 1e-6,
            fd_step: 1e-6,
            delta_min: 1e-9,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Prescribed end values `q(a), q(b), z(a), z(b)`; each is optional.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundaryData {
    pub q_a: Option<f64>,
    pub q_b: Option<f64>,
    pub z_a: Option<f64>,
    pub z_b: Option<f64>,
}

/// Largest boundary mismatch tolerated without a warning.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A boundary value the candidate does not meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryMismatch {
    pub name: &'static str,
    pub expected: f64,
    /// `NaN` when the candidate cannot be evaluated there.
    pub actual: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("the Lagrangian depends on z but the candidate is not a self-map: {0}")]
    Composition(MapError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ResidualError {
    #[error("point excluded: {0}")]
    Excluded(ExclusionReason),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("{0}")]
    InvalidArgument(&'static str),
}

impl From<ExclusionReason> for ResidualError {
    fn from(r: ExclusionReason) -> Self {
        Self::Excluded(r)
    }
}

/// Values along the candidate at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub x: f64,
    pub q: f64,
    pub qd: f64,
    /// `q(q(x))`; zero when the Lagrangian does not use it.
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Owner {
    q: usize,
    z: Option<usize>,
}

/// A compositional variational problem with a fixed candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    lagrangian: Lagrangian,
    curve: PiecewiseCurve,
    map: Option<PiecewiseMap>,
    composition: Option<SelfComposition>,
    mode: CompositionMode,
    boundary: BoundaryData,
    options: ProblemOptions,
    pieces: Decomposition,
    owners: Vec<Owner>,
}

impl Problem {
    pub fn new(lagrangian: Lagrangian, candidate: PiecewiseCurve, mode: CompositionMode) -> Result<Self, ProblemError> {
        Self::with_options(lagrangian, candidate, mode, ProblemOptions::default())
    }

    /// The candidate is validated as a self-composable map only when the
    /// Lagrangian depends on `z`.
    pub fn with_options(
        lagrangian: Lagrangian,
        candidate: PiecewiseCurve,
        mode: CompositionMode,
        options: ProblemOptions,
    ) -> Result<Self, ProblemError> {
        let (a, b) = candidate.domain();
        let (map, composition) = if lagrangian.uses_composition() {
            let tol = MapTolerances {
                delta_min: options.delta_min,
                breakpoint_margin: options.breakpoint_margin,
            };
            let map = PiecewiseMap::with_tolerances(candidate.clone(), tol).map_err(ProblemError::Composition)?;
            let comp = map.self_compose(mode).map_err(ProblemError::Composition)?;
            (Some(map), Some(comp))
        } else {
            (None, None)
        };
        let mut breaks = candidate.breakpoints();
        if let Some(c) = &composition {
            breaks.extend(c.breakpoints());
        }
        let pieces = Decomposition::new(a, b, breaks);
        let owners = (0..pieces.len())
            .map(|k| {
                let (lo, hi) = pieces.interval(k);
                let mid = 0.5 * (lo + hi);
                Ok(Owner {
                    q: candidate.piece_index(mid)?,
                    z: composition.as_ref().map(|c| c.piece_index(mid)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, MapError>>()?;
        Ok(Self {
            lagrangian,
            curve: candidate,
            map,
            composition,
            mode,
            boundary: BoundaryData::default(),
            options,
            pieces,
            owners,
        })
    }

    /// Convenience constructor for a candidate given as a map.
    pub fn from_map(
        lagrangian: Lagrangian,
        candidate: &PiecewiseMap,
        mode: CompositionMode,
    ) -> Result<Self, ProblemError> {
        Self::new(lagrangian, candidate.curve().clone(), mode)
    }

    pub fn with_boundary(mut self, boundary: BoundaryData) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    pub fn curve(&self) -> &PiecewiseCurve {
        &self.curve
    }

    /// The candidate as a map; present when the Lagrangian uses `z`.
    pub fn map(&self) -> Option<&PiecewiseMap> {
        self.map.as_ref()
    }

    pub fn composition(&self) -> Option<&SelfComposition> {
        self.composition.as_ref()
    }

    pub fn mode(&self) -> CompositionMode {
        self.mode
    }

    pub fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    pub fn boundary(&self) -> BoundaryData {
        self.boundary
    }

    pub fn options(&self) -> ProblemOptions {
        self.options
    }

    pub fn uses_composition(&self) -> bool {
        self.composition.is_some()
    }

    fn width(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Absolute breakpoint margin.
    pub fn margin(&self) -> f64 {
        self.options.breakpoint_margin * self.width()
    }

    /// Absolute finite-difference step.
    pub fn fd_step(&self) -> f64 {
        self.options.fd_step * self.width()
    }

    /// Interior breakpoints of `q` and `z` together.
    pub fn breakpoints(&self) -> &[f64] {
        self.pieces.breakpoints()
    }

    /// Smooth pieces as `(lo, hi)` pairs.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        (0..self.pieces.len()).map(|k| self.pieces.interval(k)).collect()
    }

    pub(crate) fn decomposition(&self) -> &Decomposition {
        &self.pieces
    }

    /// Index of the smooth piece owning `x`.
    pub fn piece_of(&self, x: f64) -> Result<usize, MapError> {
        self.curve.piece_index(x)?;
        Ok(self.pieces.locate(x))
    }

    /// Boundary values that differ from the candidate by more than
    /// [`BOUNDARY_TOL`]. `z` is evaluated literally as `q(q(·))`.
    pub fn boundary_mismatches(&self) -> Vec<BoundaryMismatch> {
        let (a, b) = self.domain();
        let q = |x: f64| self.curve.eval(x).unwrap_or(f64::NAN);
        let z = |x: f64| {
            let y = q(x);
            if y.is_nan() {
                y
            } else {
                q(y)
            }
        };
        let checks = [
            ("q_a", self.boundary.q_a, q(a)),
            ("q_b", self.boundary.q_b, q(b)),
            ("z_a", self.boundary.z_a, z(a)),
            ("z_b", self.boundary.z_b, z(b)),
        ];
        checks
            .into_iter()
            .filter_map(|(name, want, actual)| {
                let expected = want?;
                let ok = math::abs(actual - expected) <= BOUNDARY_TOL;
                (!ok).then_some(BoundaryMismatch { name, expected, actual })
            })
            .collect()
    }

    /// State at `x` from the formulas of smooth piece `k`, which may be used
    /// slightly outside the piece for difference probes.
    pub(crate) fn state_in(&self, k: usize, x: f64) -> Result<State, EvalError> {
        let owner = self.owners[k];
        let piece = &self.curve.pieces()[owner.q];
        let z = match (owner.z, &self.composition) {
            (Some(j), Some(c)) => c.curve().pieces()[j].eval(x)?,
            _ => 0.0,
        };
        Ok(State {
            x,
            q: piece.eval(x)?,
            qd: piece.deriv(x)?,
            z,
        })
    }

    /// State at `x` under the half-open ownership convention.
    pub fn state(&self, x: f64) -> Result<State, ResidualError> {
        let k = self.piece_of(x)?;
        Ok(self.state_in(k, x)?)
    }

    /// `L` (`index = 0`) or `∂ᵢL` at a state.
    pub(crate) fn lag(&self, index: usize, s: &State) -> Result<f64, EvalError> {
        if index == 0 {
            self.lagrangian.eval(s.x, s.q, s.qd, s.z)
        } else {
            self.lagrangian.eval_partial(index, s.x, s.q, s.qd, s.z)
        }
    }

    /// Admits `x` for a residual that takes differences along the candidate.
    pub(crate) fn admit(&self, x: f64) -> Result<usize, ResidualError> {
        self.curve.piece_index(x)?;
        Ok(self.pieces.admit(x, self.margin(), fd::REACH * self.fd_step())?)
    }

    /// Total derivative of `g(state(s))` at `x`, within smooth piece `k`.
    pub(crate) fn total_derivative(
        &self,
        k: usize,
        x: f64,
        mut g: impl FnMut(&State) -> Result<f64, EvalError>,
    ) -> Result<f64, EvalError> {
        fd::central(|s| g(&self.state_in(k, s)?), x, self.fd_step())
    }

    /// `q'` of the branch applied second, evaluated at `q(x)`: the branch
    /// owning `q(x)` in `actual` mode, branch `i` itself in `per_branch`.
    pub(crate) fn outer_slope(&self, k: usize, q: f64) -> Result<f64, EvalError> {
        match (self.owners[k].z, &self.composition, &self.map) {
            (Some(j), Some(c), Some(m)) => m.branches()[c.outer_branch(j)].deriv(q),
            _ => Ok(0.0),
        }
    }

    /// Smooth piece for a preimage `t` found on `branch`, picking the side of
    /// a breakpoint that belongs to that branch.
    fn piece_for_branch(&self, t: f64, branch: usize) -> usize {
        let k = self.pieces.locate(t);
        if self.owners[k].q != branch && k > 0 && self.owners[k - 1].q == branch {
            k - 1
        } else {
            k
        }
    }

    /// `Σ_{t ∈ q⁻¹(x)} ∂₄L(t, q(t), q'(t), z(t)) / |q'(t)|`. With `strict`,
    /// a preimage inside the breakpoint margin excludes the point.
    pub(crate) fn preimage_sum(&self, x: f64, strict: bool) -> Result<f64, ResidualError> {
        let Some(map) = &self.map else {
            return Ok(0.0);
        };
        let mut sum = 0.0;
        for p in map.preimages(x)? {
            if strict {
                if let Some(bp) = self
                    .pieces
                    .nearest_breakpoint(p.t)
                    .filter(|bp| math::abs(p.t - bp) <= self.margin())
                {
                    return Err(ExclusionReason::PreimageNearBreakpoint {
                        preimage: p.t,
                        breakpoint: bp,
                    }
                    .into());
                }
            }
            let s = self.state_in(self.piece_for_branch(p.t, p.branch), p.t)?;
            sum += self.lag(4, &s)? / math::abs(s.qd);
        }
        Ok(sum)
    }
}

/// `∂₂L − d/dx ∂₃L + ∂₄L·q'(q(x)) + Σ_{t ∈ q⁻¹(x)} ∂₄L(t, ...)/|q'(t)|`.
pub fn el_residual(p: &Problem, x: f64) -> Result<f64, ResidualError> {
    let k = p.admit(x)?;
    let s = p.state_in(k, x)?;
    let d3 = p.total_derivative(k, x, |s| p.lag(3, s))?;
    let mut r = p.lag(2, &s)? - d3;
    if p.uses_composition() {
        r += p.lag(4, &s)? * p.outer_slope(k, s.q)? + p.preimage_sum(x, true)?;
    }
    Ok(r)
}

/// `d/dx[L − ∂₃L·q'] − ∂₁L + q'(x)·Σ_{t ∈ q⁻¹(x)} ∂₄L(t, ...)/|q'(t)|`.
pub fn dbr_residual(p: &Problem, x: f64) -> Result<f64, ResidualError> {
    let k = p.admit(x)?;
    let s = p.state_in(k, x)?;
    let dh = p.total_derivative(k, x, |s| Ok(p.lag(0, s)? - p.lag(3, s)? * s.qd))?;
    let mut r = dh - p.lag(1, &s)?;
    if p.uses_composition() {
        r += s.qd * p.preimage_sum(x, true)?;
    }
    Ok(r)
}

/// Which identity [`scan_residuals`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualKind {
    EulerLagrange,
    DuBoisReymond,
}

impl ResidualKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::EulerLagrange => "el",
            Self::DuBoisReymond => "dbr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub value: f64,
    pub piece: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Excluded {
    pub x: f64,
    pub reason: ExclusionReason,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PieceSummary {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub sup: f64,
}

/// Residual values at the admitted sample points with summary norms.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub samples: Vec<Sample>,
    pub excluded: Vec<Excluded>,
    pub pieces: Vec<PieceSummary>,
    pub sup: f64,
    pub rms: f64,
}

impl ResidualReport {
    /// Collects residuals over `xs`; exclusions are recorded, every other
    /// error aborts the scan.
    pub(crate) fn collect(
        p: &Problem,
        xs: impl IntoIterator<Item = f64>,
        mut residual: impl FnMut(f64) -> Result<f64, ResidualError>,
    ) -> Result<Self, ResidualError> {
        let mut pieces: Vec<PieceSummary> = p
            .pieces()
            .into_iter()
            .map(|(lo, hi)| PieceSummary {
                lo,
                hi,
                samples: 0,
                sup: 0.0,
            })
            .collect();
        let mut samples = Vec::new();
        let mut excluded = Vec::new();
        for x in xs {
            match residual(x) {
                Ok(value) => {
                    let piece = p.decomposition().locate(x);
                    let s = &mut pieces[piece];
                    s.samples += 1;
                    s.sup = s.sup.max(math::abs(value));
                    samples.push(Sample { x, value, piece });
                }
                Err(ResidualError::Excluded(reason)) => excluded.push(Excluded { x, reason }),
                Err(e) => return Err(e),
            }
        }
        let sup = math::max_abs(samples.iter().map(|s| s.value));
        let rms = if samples.is_empty() {
            0.0
        } else {
            math::sqrt(samples.iter().map(|s| s.value * s.value).sum::<f64>() / samples.len() as f64)
        };
        Ok(Self {
            samples,
            excluded,
            pieces,
            sup,
            rms,
        })
    }
}

/// Smallest sample count accepted by the scans.
pub const MIN_SAMPLES: usize = 10;

/// Residuals at the `n` midpoints `a + (k + 1/2)(b - a)/n`.
pub fn scan_residuals(p: &Problem, which: ResidualKind, n: usize) -> Result<ResidualReport, ResidualError> {
    if n < MIN_SAMPLES {
        return Err(ResidualError::InvalidArgument("a scan needs at least 10 samples"));
    }
    let (a, b) = p.domain();
    ResidualReport::collect(p, midpoints(a, b, n), |x| match which {
        ResidualKind::EulerLagrange => el_residual(p, x),
        ResidualKind::DuBoisReymond => dbr_residual(p, x),
    })
}

/// `∫_a^b L(x, q, q', z) dx`, Simpson on every smooth piece.
pub fn eval_functional(p: &Problem, spec: QuadratureSpec) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for (k, (lo, hi)) in p.pieces().into_iter().enumerate() {
        total += simpson_refined(&mut |x| p.lag(0, &p.state_in(k, x)?), lo, hi, spec)?;
    }
    Ok(total)
}

/// `∫ (q(t) − t)² f(t) dt`, split at the map's breakpoints and at the grid
/// nodes of `f`, where its interpolant has kinks.
pub fn chaos_functional(m: &PiecewiseMap, f: &DensityFn, spec: QuadratureSpec) -> Result<f64, FpError> {
    let (a, b) = m.domain();
    if f.domain() != (a, b) {
        let (fa, fb) = f.domain();
        return Err(FpError::DomainMismatch(fa, fb));
    }
    let edges = Decomposition::new(
        a,
        b,
        m.breakpoints().into_iter().chain((1..f.cells()).map(|i| f.node(i))),
    );
    let mut total = 0.0;
    for k in 0..edges.len() {
        let (lo, hi) = edges.interval(k);
        let branch = &m.branches()[m.branch_index(0.5 * (lo + hi))?];
        let mut g = |t: f64| -> Result<f64, EvalError> {
            let d = branch.eval(t)? - t;
            Ok(d * d * f.interp(t))
        };
        total += simpson_refined(&mut g, lo, hi, spec).map_err(MapError::from)?;
    }
    Ok(total)
}

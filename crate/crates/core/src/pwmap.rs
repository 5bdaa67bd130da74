//! Piecewise-smooth curves and piecewise-monotone interval maps.
//!
//! Pieces are half-open `[lo, hi)` except the last, which is closed at the
//! right endpoint of the domain. The same types represent dynamical maps and
//! candidate extremals `q(·)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{EvalError, Expr, ExprError, ParseError};
use crate::math;

/// Variable list of every map or curve body.
pub const MAP_VARS: [&str; 1] = ["x"];

/// Points evaluated per branch to verify strict monotonicity.
const MONOTONE_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("{x} lies outside the domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error("{x} is within the breakpoint margin of {breakpoint}")]
    BreakpointProximity { x: f64, breakpoint: f64 },
    #[error("map is not self-composable: branch {branch} leaves the domain")]
    NotSelfComposable { branch: usize },
    #[error("branch {branch} is not strictly monotone near {x} (derivative {derivative})")]
    NotMonotone { branch: usize, x: f64, derivative: f64 },
    #[error("pieces do not partition the domain: {0}")]
    Partition(String),
    #[error("at least one piece is required")]
    Empty,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// One smooth piece: `body(x)` on `[lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub body: Expr,
    pub deriv: Expr,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, body: Expr) -> Result<Self, MapError> {
        let body = if body.vars() == MAP_VARS {
            body
        } else {
            body.rebind(&MAP_VARS)?
        };
        let deriv = body.differentiate(0)?;
        Ok(Self { lo, hi, body, deriv })
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.body.eval(&[x])
    }

    pub fn deriv(&self, x: f64) -> Result<f64, EvalError> {
        self.deriv.eval(&[x])
    }

    /// The slope when the piece is affine.
    pub fn slope(&self) -> Option<f64> {
        self.deriv.as_const()
    }
}

/// A piecewise-smooth function on `[a, b]`. No monotonicity is assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseCurve {
    a: f64,
    b: f64,
    pieces: Vec<Piece>,
}

impl PiecewiseCurve {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, MapError> {
        let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
            return Err(MapError::Empty);
        };
        let (a, b) = (first.lo, last.hi);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(MapError::Partition(alloc::format!("bad domain [{a}, {b}]")));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.lo.is_nan() || p.hi.is_nan() || p.lo >= p.hi {
                return Err(MapError::Partition(alloc::format!(
                    "piece {i} has empty interval [{}, {}]",
                    p.lo,
                    p.hi
                )));
            }
            if i > 0 && pieces[i - 1].hi != p.lo {
                return Err(MapError::Partition(alloc::format!(
                    "gap or overlap between {} and {}",
                    pieces[i - 1].hi,
                    p.lo
                )));
            }
        }
        Ok(Self { a, b, pieces })
    }

    pub fn from_sources(pieces: &[(f64, f64, &str)]) -> Result<Self, MapError> {
        let pieces = pieces
            .iter()
            .map(|&(lo, hi, src)| Piece::new(lo, hi, Expr::parse(src, &MAP_VARS)?))
            .collect::<Result<Vec<_>, MapError>>()?;
        Self::new(pieces)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// Index of the piece owning `x` under the half-open convention.
    pub fn piece_index(&self, x: f64) -> Result<usize, MapError> {
        if !self.contains(x) {
            return Err(MapError::OutsideDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        // last piece whose left end is <= x
        Ok(self.pieces.partition_point(|p| p.lo <= x).saturating_sub(1))
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        let i = self.piece_index(x)?;
        Ok(self.pieces[i].eval(x)?)
    }

    /// Derivative of the owning piece; fails within `margin` of a breakpoint.
    pub fn deriv(&self, x: f64, margin: f64) -> Result<f64, MapError> {
        let i = self.piece_index(x)?;
        if let Some(bp) = self.nearest_breakpoint(x).filter(|bp| math::abs(x - bp) <= margin) {
            return Err(MapError::BreakpointProximity { x, breakpoint: bp });
        }
        Ok(self.pieces[i].deriv(x)?)
    }

    pub fn nearest_breakpoint(&self, x: f64) -> Option<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).min_by(|u, v| {
            math::abs(x - u)
                .partial_cmp(&math::abs(x - v))
                .unwrap_or(core::cmp::Ordering::Equal)
        })
    }
}

/// Tolerance knobs of a [`PiecewiseMap`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapTolerances {
    /// Minimum admissible `|q'|` on a branch.
    pub delta_min: f64,
    /// Breakpoint exclusion margin, relative to the domain width.
    pub breakpoint_margin: f64,
}

impl Default for MapTolerances {
    fn default() -> Self {
        Self {
            delta_min: 1e-9,
            breakpoint_margin: 1e-6,
        }
    }
}

/// A root of `branch(t) = y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preimage {
    pub t: f64,
    pub branch: usize,
}

/// How `z = q∘q` is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CompositionMode {
    /// Literal composition: the outer branch is whichever owns `q(x)`.
    #[default]
    Actual,
    /// Branch `i` composed with itself over its whole sub-interval.
    PerBranch,
}

impl CompositionMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Actual => "actual",
            Self::PerBranch => "per_branch",
        }
    }
}

/// A piecewise-monotone map with validated branches.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseMap {
    curve: PiecewiseCurve,
    self_composable: bool,
    tolerances: MapTolerances,
}

impl PiecewiseMap {
    pub fn new(curve: PiecewiseCurve) -> Result<Self, MapError> {
        Self::with_tolerances(curve, MapTolerances::default())
    }

    pub fn with_tolerances(curve: PiecewiseCurve, tolerances: MapTolerances) -> Result<Self, MapError> {
        for (i, p) in curve.pieces.iter().enumerate() {
            check_monotone(i, p, tolerances.delta_min)?;
        }
        let (a, b) = curve.domain();
        let slack = 1e-12 * (b - a);
        let mut self_composable = true;
        for p in &curve.pieces {
            for end in [p.lo, p.hi] {
                let v = p.eval(end)?;
                if v < a - slack || v > b + slack {
                    self_composable = false;
                }
            }
        }
        Ok(Self {
            curve,
            self_composable,
            tolerances,
        })
    }

    pub fn from_sources(branches: &[(f64, f64, &str)]) -> Result<Self, MapError> {
        Self::new(PiecewiseCurve::from_sources(branches)?)
    }

    pub fn identity(a: f64, b: f64) -> Self {
        Self::from_sources(&[(a, b, "x")]).expect("identity map is valid")
    }

    /// `2x` on `[0, 1/2)`, `2 - 2x` on `[1/2, 1]`.
    pub fn tent() -> Self {
        Self::from_sources(&[(0.0, 0.5, "2*x"), (0.5, 1.0, "2 - 2*x")]).expect("tent map is valid")
    }

    /// `1 - 2x` on `[0, 1/2)`, `2 - 2x` on `[1/2, 1]`.
    pub fn reflected_doubling() -> Self {
        Self::from_sources(&[(0.0, 0.5, "-2*x + 1"), (0.5, 1.0, "-2*x + 2")]).expect("reflected doubling map is valid")
    }

    /// `4x(1 - x)`, split at its critical point.
    pub fn logistic() -> Self {
        Self::from_sources(&[(0.0, 0.5, "4*x*(1 - x)"), (0.5, 1.0, "4*x*(1 - x)")]).expect("logistic map is valid")
    }

    pub fn curve(&self) -> &PiecewiseCurve {
        &self.curve
    }

    pub fn branches(&self) -> &[Piece] {
        &self.curve.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.curve.breakpoints()
    }

    pub fn is_self_composable(&self) -> bool {
        self.self_composable
    }

    pub fn tolerances(&self) -> MapTolerances {
        self.tolerances
    }

    /// Breakpoint exclusion margin in absolute units.
    pub fn breakpoint_margin(&self) -> f64 {
        let (a, b) = self.domain();
        self.tolerances.breakpoint_margin * (b - a)
    }

    pub fn branch_index(&self, x: f64) -> Result<usize, MapError> {
        self.curve.piece_index(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        self.curve.eval(x)
    }

    pub fn deriv(&self, x: f64) -> Result<f64, MapError> {
        self.curve.deriv(x, self.breakpoint_margin())
    }

    /// Solutions of `q(t) = y`, at most one per branch, under the half-open
    /// branch convention.
    pub fn preimages(&self, y: f64) -> Result<Vec<Preimage>, MapError> {
        self.collect_preimages(y, false)
    }

    /// Like [`PiecewiseMap::preimages`] but each branch is taken on its closed
    /// interval, so branch endpoints count as one-sided limits.
    pub fn preimages_closed(&self, y: f64) -> Result<Vec<Preimage>, MapError> {
        self.collect_preimages(y, true)
    }

    fn collect_preimages(&self, y: f64, closed: bool) -> Result<Vec<Preimage>, MapError> {
        let n = self.curve.pieces.len();
        let mut out = Vec::new();
        for (i, p) in self.curve.pieces.iter().enumerate() {
            let close_right = closed || i + 1 == n;
            if let Some(t) = solve_on_branch(p, y, close_right)? {
                out.push(Preimage { t, branch: i });
            }
        }
        Ok(out)
    }

    /// Builds `z = q∘q` as a piecewise curve.
    pub fn self_compose(&self, mode: CompositionMode) -> Result<SelfComposition, MapError> {
        if !self.self_composable {
            let branch = self
                .curve
                .pieces
                .iter()
                .position(|p| {
                    let (a, b) = self.domain();
                    [p.lo, p.hi].iter().any(|&e| p.eval(e).map_or(true, |v| v < a || v > b))
                })
                .unwrap_or(0);
            return Err(MapError::NotSelfComposable { branch });
        }
        let mut pieces = Vec::new();
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        match mode {
            CompositionMode::PerBranch => {
                for (i, p) in self.curve.pieces.iter().enumerate() {
                    pieces.push(Piece::new(p.lo, p.hi, p.body.substitute(0, &p.body))?);
                    inner.push(i);
                    outer.push(i);
                }
            }
            CompositionMode::Actual => {
                let breaks = self.breakpoints();
                for (i, p) in self.curve.pieces.iter().enumerate() {
                    let mut cuts = Vec::new();
                    for &c in &breaks {
                        if let Some(t) = solve_on_branch(p, c, true)? {
                            if p.lo < t && t < p.hi {
                                cuts.push(t);
                            }
                        }
                    }
                    cuts.sort_by(f64::total_cmp);
                    cuts.dedup();
                    let mut edges = Vec::with_capacity(cuts.len() + 2);
                    edges.push(p.lo);
                    edges.extend(cuts);
                    edges.push(p.hi);
                    for w in edges.windows(2) {
                        let mid = 0.5 * (w[0] + w[1]);
                        let j = self.curve.piece_index(clamp(p.eval(mid)?, self.domain()))?;
                        let outer_body = &self.curve.pieces[j].body;
                        pieces.push(Piece::new(w[0], w[1], outer_body.substitute(0, &p.body))?);
                        inner.push(i);
                        outer.push(j);
                    }
                }
            }
        }
        Ok(SelfComposition {
            curve: PiecewiseCurve::new(pieces)?,
            inner,
            outer,
            mode,
        })
    }

    /// `[x0, q(x0), ..., q^n(x0)]`.
    pub fn orbit(&self, x0: f64, n: usize) -> Result<Orbit, MapError> {
        if !self.self_composable {
            return Err(MapError::NotSelfComposable { branch: 0 });
        }
        let dom = self.domain();
        self.curve.piece_index(x0)?;
        let mut points = Vec::with_capacity(n + 1);
        let mut clamped = false;
        let mut x = x0;
        points.push(x);
        for _ in 0..n {
            let next = self.eval(x)?;
            let c = clamp(next, dom);
            clamped |= c != next;
            x = c;
            points.push(x);
        }
        Ok(Orbit { points, clamped })
    }
}

/// Sequence of iterates; `clamped` records whether rounding pushed an iterate
/// out of the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<f64>,
    pub clamped: bool,
}

/// `z = q∘q`, with the branches of `q` used on each piece.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfComposition {
    curve: PiecewiseCurve,
    inner: Vec<usize>,
    outer: Vec<usize>,
    mode: CompositionMode,
}

impl SelfComposition {
    pub fn curve(&self) -> &PiecewiseCurve {
        &self.curve
    }

    pub fn mode(&self) -> CompositionMode {
        self.mode
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        self.curve.eval(x)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.curve.breakpoints()
    }

    pub fn piece_index(&self, x: f64) -> Result<usize, MapError> {
        self.curve.piece_index(x)
    }

    /// Branch of `q` applied first on piece `j`.
    pub fn inner_branch(&self, j: usize) -> usize {
        self.inner[j]
    }

    /// Branch of `q` applied second on piece `j`.
    pub fn outer_branch(&self, j: usize) -> usize {
        self.outer[j]
    }
}

fn clamp(v: f64, (a, b): (f64, f64)) -> f64 {
    v.clamp(a, b)
}

fn check_monotone(index: usize, p: &Piece, delta_min: f64) -> Result<(), MapError> {
    let mut sign = 0.0;
    for k in 0..MONOTONE_GRID {
        let x = p.lo + (k as f64 + 0.5) / MONOTONE_GRID as f64 * (p.hi - p.lo);
        let d = p.deriv(x)?;
        let s = if d > 0.0 { 1.0 } else { -1.0 };
        if math::abs(d) < delta_min || (sign != 0.0 && s != sign) {
            return Err(MapError::NotMonotone {
                branch: index,
                x,
                derivative: d,
            });
        }
        sign = s;
    }
    Ok(())
}

/// Solves `p(t) = y` on `[lo, hi)` (or `[lo, hi]` when `close_right`).
fn solve_on_branch(p: &Piece, y: f64, close_right: bool) -> Result<Option<f64>, MapError> {
    let width = p.hi - p.lo;
    let snap = 4.0 * f64::EPSILON * (math::abs(p.lo) + math::abs(p.hi) + width);
    let inside = |t: f64| p.lo <= t && (t < p.hi || (close_right && t <= p.hi));

    if let Some(slope) = p.slope() {
        let t = p.lo + (y - p.eval(p.lo)?) / slope;
        let t = if t < p.lo && p.lo - t <= snap {
            p.lo
        } else if close_right && t > p.hi && t - p.hi <= snap {
            p.hi
        } else {
            t
        };
        return Ok(inside(t).then_some(t));
    }

    let (mut lo, mut hi) = (p.lo, p.hi);
    let (flo, fhi) = (p.eval(lo)? - y, p.eval(hi)? - y);
    if flo == 0.0 {
        return Ok(Some(lo));
    }
    if fhi == 0.0 {
        return Ok(close_right.then_some(hi));
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Ok(None);
    }
    let increasing = fhi > 0.0;
    let mut best = (math::abs(flo), lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid)? - y;
        if math::abs(fm) < best.0 {
            best = (math::abs(fm), mid);
        }
        if fm == 0.0 {
            break;
        }
        if (fm > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if math::abs(p.eval(hi)? - y) < best.0 {
        best = (math::abs(p.eval(hi)? - y), hi);
    }
    let t = best.1;
    Ok(inside(t).then_some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn evaluation_on_the_reflected_doubling_map() {
        let m = PiecewiseMap::reflected_doubling();
        assert_eq!(m.eval(0.0).unwrap(), 1.0);
        assert_eq!(m.eval(1.0).unwrap(), 0.0);
        // 1/2 belongs to the second branch
        assert_eq!(m.eval(0.5).unwrap(), 1.0);
        assert!(matches!(m.eval(1.5), Err(MapError::OutsideDomain { .. })));
        let id = PiecewiseMap::identity(0.0, 1.0);
        assert_eq!(id.eval(0.37).unwrap(), 0.37);
    }

    #[test]
    fn derivatives_and_breakpoint_proximity() {
        let m = PiecewiseMap::reflected_doubling();
        assert_eq!(m.deriv(0.3).unwrap(), -2.0);
        assert!(matches!(
            m.deriv(0.5 + 1e-7),
            Err(MapError::BreakpointProximity { breakpoint, .. }) if breakpoint == 0.5
        ));
        assert_eq!(PiecewiseMap::tent().deriv(0.7).unwrap(), -2.0);
        assert_eq!(PiecewiseMap::identity(0.0, 1.0).deriv(0.9).unwrap(), 1.0);
    }

    #[test]
    fn preimage_examples() {
        let m = PiecewiseMap::reflected_doubling();
        let pre: Vec<f64> = m.preimages(0.4).unwrap().iter().map(|p| p.t).collect();
        assert_eq!(pre.len(), 2);
        assert!((pre[0] - 0.3).abs() < 1e-15);
        assert!((pre[1] - 0.8).abs() < 1e-15);
        for k in 1..100 {
            let y = k as f64 / 100.0;
            assert_eq!(m.preimages(y).unwrap().len(), 2, "y = {y}");
        }
        // the left branch never attains 0 on its half-open interval
        assert_eq!(m.preimages(0.0).unwrap().len(), 1);
        assert_eq!(m.preimages_closed(0.0).unwrap().len(), 2);

        let id = PiecewiseMap::identity(0.0, 1.0);
        let pre = id.preimages(0.25).unwrap();
        assert_eq!(pre, vec![Preimage { t: 0.25, branch: 0 }]);
    }

    #[test]
    fn nonlinear_preimages_by_bisection() {
        let m = PiecewiseMap::logistic();
        let pre = m.preimages(0.64).unwrap();
        assert_eq!(pre.len(), 2);
        assert!((pre[0].t - 0.2).abs() < 1e-12);
        assert!((pre[1].t - 0.8).abs() < 1e-12);
        // the critical value has only the right branch under the half-open rule
        assert_eq!(m.preimages(1.0).unwrap().len(), 1);
    }

    #[test]
    fn self_composition_examples() {
        let m = PiecewiseMap::reflected_doubling();
        let z = m.self_compose(CompositionMode::Actual).unwrap();
        assert!((z.eval(0.3).unwrap() - 0.2).abs() < 1e-15);
        assert!((z.eval(0.1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(z.breakpoints(), vec![0.25, 0.5, 0.75]);
        assert_eq!((z.inner_branch(0), z.outer_branch(0)), (0, 1));
        assert_eq!((z.inner_branch(3), z.outer_branch(3)), (1, 0));

        let zb = m.self_compose(CompositionMode::PerBranch).unwrap();
        assert!((zb.eval(0.1).unwrap() - (4.0 * 0.1 - 1.0)).abs() < 1e-15);
        assert_eq!(zb.breakpoints(), vec![0.5]);

        let id = PiecewiseMap::identity(0.0, 1.0);
        let zi = id.self_compose(CompositionMode::Actual).unwrap();
        assert_eq!(zi.curve().pieces().len(), 1);
        assert_eq!(zi.eval(0.42).unwrap(), 0.42);
    }

    #[test]
    fn non_self_maps_cannot_compose() {
        let m = PiecewiseMap::from_sources(&[(0.0, 0.5, "-1.9*x + 1.05"), (0.5, 1.0, "-2*x + 2")]).unwrap();
        assert!(!m.is_self_composable());
        assert!(matches!(
            m.self_compose(CompositionMode::Actual),
            Err(MapError::NotSelfComposable { branch: 0 })
        ));
    }

    #[test]
    fn orbits() {
        let m = PiecewiseMap::reflected_doubling();
        let o = m.orbit(0.3, 3).unwrap();
        let expected = [0.3, 0.4, 0.2, 0.6];
        assert_eq!(o.points.len(), 4);
        for (a, b) in o.points.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let o = m.orbit(2.0 / 3.0, 5).unwrap();
        assert!(o.points.iter().all(|p| (p - 2.0 / 3.0).abs() < 1e-12));
        let o = PiecewiseMap::identity(0.0, 1.0).orbit(0.7, 4).unwrap();
        assert!(o.points.iter().all(|&p| p == 0.7));
        assert!(!o.clamped);
    }

    #[test]
    fn validation_rejects_bad_maps() {
        assert!(matches!(
            PiecewiseMap::from_sources(&[(0.0, 1.0, "4*x*(1 - x)")]),
            Err(MapError::NotMonotone { .. })
        ));
        assert!(matches!(
            PiecewiseMap::from_sources(&[(0.0, 0.4, "x"), (0.5, 1.0, "x")]),
            Err(MapError::Partition(_))
        ));
        assert!(matches!(
            PiecewiseMap::from_sources(&[(0.0, 1.0, "0*x + 0.5")]),
            Err(MapError::NotMonotone { .. })
        ));
        assert!(matches!(PiecewiseCurve::from_sources(&[]), Err(MapError::Empty)));
        assert!(matches!(
            PiecewiseCurve::from_sources(&[(0.0, 1.0, "q")]),
            Err(MapError::Parse(_))
        ));
    }

    fn random_map() -> impl Strategy<Value = PiecewiseMap> {
        prop_oneof![
            Just(PiecewiseMap::reflected_doubling()),
            Just(PiecewiseMap::tent()),
            Just(PiecewiseMap::logistic()),
            Just(PiecewiseMap::identity(0.0, 1.0)),
            Just(
                PiecewiseMap::from_sources(&[(0.0, 0.5, "2*x^2 + x"), (0.5, 1.0, "2*(x - 0.5)^2 + (x - 0.5)")])
                    .unwrap()
            ),
            Just(
                PiecewiseMap::from_sources(&[
                    (0.0, 0.3, "0.9 - 2*x"),
                    (0.3, 0.7, "0.25*(x - 0.3)/0.4 + 0.6"),
                    (0.7, 1.0, "sqrt(x - 0.7)/sqrt(0.3)")
                ])
                .unwrap()
            ),
        ]
    }

    #[test]
    fn partition_property() {
        let m = PiecewiseMap::from_sources(&[(0.0, 0.3, "x"), (0.3, 0.7, "x"), (0.7, 1.0, "x")]).unwrap();
        for k in 0..1000 {
            let x = k as f64 / 999.0;
            let owners = m
                .branches()
                .iter()
                .enumerate()
                .filter(|(i, p)| p.lo <= x && (x < p.hi || *i == 2))
                .count();
            assert_eq!(owners, 1);
            let i = m.branch_index(x).unwrap();
            let p = &m.branches()[i];
            assert!(p.lo <= x && (x < p.hi || i == 2));
        }
    }

    proptest! {
        #[test]
        fn preimages_are_roots(m in random_map(), y in 0.0..=1.0f64) {
            let pre = m.preimages(y).unwrap();
            prop_assert!(pre.len() <= m.branches().len());
            for p in pre {
                prop_assert_eq!(m.branch_index(p.t).unwrap(), p.branch);
                prop_assert!((m.eval(p.t).unwrap() - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn actual_composition_matches_two_step_evaluation(m in random_map()) {
            let z = m.self_compose(CompositionMode::Actual).unwrap();
            let margin = m.breakpoint_margin();
            let breaks = z.breakpoints();
            for k in 0..1000 {
                let x = (k as f64 + 0.5) / 1000.0;
                if breaks.iter().any(|b| (x - b).abs() <= margin) {
                    continue;
                }
                let direct = m.eval(m.eval(x).unwrap()).unwrap();
                prop_assert!((z.eval(x).unwrap() - direct).abs() <= 1e-12);
            }
        }
    }
}

//! Smooth-piece decomposition of an interval and sample admission.

use alloc::vec::Vec;

use crate::math;

/// Why a sample point was left out of a residual scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExclusionReason {
    /// The point lies within the breakpoint margin.
    NearBreakpoint { breakpoint: f64 },
    /// A finite-difference probe would leave the smooth piece.
    ProbeLeavesPiece { edge: f64 },
    /// A preimage of the point lies within the margin of a breakpoint.
    PreimageNearBreakpoint { preimage: f64, breakpoint: f64 },
    /// The symmetry generator cannot be evaluated at the shifted argument
    /// `(q(x), z(x))`.
    GeneratorUndefined { at: f64 },
}

impl core::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match *self {
            Self::NearBreakpoint { breakpoint } => write!(f, "near breakpoint {breakpoint}"),
            Self::ProbeLeavesPiece { edge } => write!(f, "difference probe crosses {edge}"),
            Self::PreimageNearBreakpoint { preimage, breakpoint } => {
                write!(f, "preimage {preimage} near breakpoint {breakpoint}")
            }
            Self::GeneratorUndefined { at } => write!(f, "generator undefined at {at}"),
        }
    }
}

/// Sorted edges `a = e_0 < ... < e_n = b`; piece `k` is `[e_k, e_{k+1})`,
/// the last one closed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Decomposition {
    edges: Vec<f64>,
}

impl Decomposition {
    /// Breakpoints closer than `1e-12 (b - a)` are merged; points outside
    /// `(a, b)` are dropped.
    pub(crate) fn new(a: f64, b: f64, breaks: impl IntoIterator<Item = f64>) -> Self {
        let merge = 1e-12 * (b - a);
        let mut inner: Vec<f64> = breaks.into_iter().filter(|&t| a + merge < t && t < b - merge).collect();
        inner.sort_by(f64::total_cmp);
        let mut edges = Vec::with_capacity(inner.len() + 2);
        edges.push(a);
        for t in inner {
            if t - edges[edges.len() - 1] > merge {
                edges.push(t);
            }
        }
        edges.push(b);
        Self { edges }
    }

    pub(crate) fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub(crate) fn interval(&self, k: usize) -> (f64, f64) {
        (self.edges[k], self.edges[k + 1])
    }

    pub(crate) fn breakpoints(&self) -> &[f64] {
        &self.edges[1..self.edges.len() - 1]
    }

    /// Piece owning `x`; `x` is assumed inside the domain.
    pub(crate) fn locate(&self, x: f64) -> usize {
        self.edges[1..].partition_point(|&e| e <= x).min(self.len() - 1)
    }

    pub(crate) fn nearest_breakpoint(&self, x: f64) -> Option<f64> {
        let bps = self.breakpoints();
        let i = bps.partition_point(|&e| e < x);
        let mut best: Option<f64> = None;
        for j in [i.wrapping_sub(1), i] {
            if let Some(&e) = bps.get(j) {
                if best.is_none_or(|b| math::abs(x - e) < math::abs(x - b)) {
                    best = Some(e);
                }
            }
        }
        best
    }

    /// Checks the breakpoint margin and, when `reach > 0`, that
    /// `[x - reach, x + reach]` stays inside the owning piece.
    pub(crate) fn admit(&self, x: f64, margin: f64, reach: f64) -> Result<usize, ExclusionReason> {
        if let Some(bp) = self.nearest_breakpoint(x).filter(|bp| math::abs(x - bp) <= margin) {
            return Err(ExclusionReason::NearBreakpoint { breakpoint: bp });
        }
        let k = self.locate(x);
        let (lo, hi) = self.interval(k);
        if reach > 0.0 {
            if x - reach < lo {
                return Err(ExclusionReason::ProbeLeavesPiece { edge: lo });
            }
            if x + reach > hi {
                return Err(ExclusionReason::ProbeLeavesPiece { edge: hi });
            }
        }
        Ok(k)
    }
}

/// `n` midpoint samples `a + (k + 1/2)(b - a)/n`.
pub(crate) fn midpoints(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| a + (k as f64 + 0.5) * (b - a) / n as f64)
}

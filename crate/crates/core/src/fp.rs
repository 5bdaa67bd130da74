//! Frobenius-Perron operator on grid densities.
//!
//! For a piecewise-monotone map `q`,
//! `P[f](t) = Σ_{v ∈ q⁻¹(t)} f(v) / |q'(v)|`. Densities live on a uniform
//! grid and are linearly interpolated between nodes, so the discrete operator
//! stays linear and positive.

use alloc::vec::Vec;

use crate::math;
use crate::pwmap::{MapError, PiecewiseMap};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FpError {
    #[error("density domain [{0}, {1}] differs from the map domain")]
    DomainMismatch(f64, f64),
    #[error("preimage {v} of grid node {t} has |q'| below the admissible minimum")]
    CriticalPreimage { t: f64, v: f64 },
    #[error("density has zero mass and cannot be normalized")]
    ZeroMass,
    #[error("{0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Nonnegative function sampled at `N + 1` uniform nodes on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityFn {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl DensityFn {
    /// `cells` is the number of grid cells `N`.
    pub fn constant(a: f64, b: f64, cells: usize, value: f64) -> Self {
        Self {
            a,
            b,
            values: alloc::vec![value; cells + 1],
        }
    }

    pub fn from_fn(a: f64, b: f64, cells: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut d = Self::constant(a, b, cells, 0.0);
        for i in 0..=cells {
            d.values[i] = f(d.node(i));
        }
        d
    }

    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Result<Self, FpError> {
        if values.len() < 2 {
            return Err(FpError::InvalidArgument("a density needs at least two nodes"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(FpError::InvalidArgument(
                "density values must be finite and nonnegative",
            ));
        }
        Ok(Self { a, b, values })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.cells() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells() {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation; arguments are clamped into the domain.
    pub fn interp(&self, x: f64) -> f64 {
        let (i, w) = self.locate(x);
        if w == 0.0 {
            self.values[i]
        } else {
            self.values[i] + w * (self.values[i + 1] - self.values[i])
        }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let s = ((x - self.a) / self.step()).clamp(0.0, self.cells() as f64);
        let i = (math::floor(s) as usize).min(self.cells() - 1);
        let w = s - i as f64;
        if w >= 1.0 {
            (i + 1, 0.0)
        } else {
            (i, w)
        }
    }

    /// Trapezoid rule over the grid.
    pub fn integral(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        self.step() * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }

    pub fn normalize(&mut self) -> Result<(), FpError> {
        let mass = self.integral();
        if mass.is_nan() || mass <= 0.0 {
            return Err(FpError::ZeroMass);
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self, FpError> {
        self.normalize()?;
        Ok(self)
    }

    /// Pointwise `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &DensityFn, beta: f64) -> DensityFn {
        debug_assert_eq!(self.values.len(), other.values.len());
        DensityFn {
            a: self.a,
            b: self.b,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| alpha * u + beta * v)
                .collect(),
        }
    }
}

/// One contribution `weight * f(v)` to a grid node, with `f(v)` interpolated
/// from nodes `cell` and `cell + 1`.
#[derive(Clone, Copy, Debug)]
struct Contribution {
    cell: usize,
    frac: f64,
    weight: f64,
}

/// The discretized operator for a fixed map and grid. Preimages are found
/// once; each application is then a sparse sum.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    a: f64,
    b: f64,
    rows: Vec<Vec<Contribution>>,
    /// Boundary nodes whose preimage is a critical point, with the neighbour
    /// their value is derived from.
    singular: Vec<(usize, usize)>,
}

impl TransferOperator {
    /// Builds the operator on a grid of `cells` cells over the map's domain.
    ///
    /// Branches are taken on their closed intervals, so branch endpoints
    /// contribute through one-sided limits and one-sided derivatives. A
    /// boundary node whose preimage is critical (`|q'| < delta_min`) sits on
    /// a square-root singularity `c / sqrt(d)`. It gets [`SINGULAR_NODE_FACTOR`]
    /// times its neighbour's value, which makes the trapezoid mass of the end
    /// cell exact for that profile. An interior node in that situation is an
    /// error.
    pub fn new(m: &PiecewiseMap, cells: usize) -> Result<Self, FpError> {
        if cells < 2 {
            return Err(FpError::InvalidArgument("grid needs at least two cells"));
        }
        let (a, b) = m.domain();
        let grid = DensityFn::constant(a, b, cells, 0.0);
        let delta_min = m.tolerances().delta_min;
        let mut rows = Vec::with_capacity(cells + 1);
        let mut singular = Vec::new();
        for i in 0..=cells {
            let t = grid.node(i);
            let mut row = Vec::new();
            let mut critical = None;
            for p in m.preimages_closed(t)? {
                let d = m.branches()[p.branch].deriv(p.t).map_err(MapError::from)?;
                if math::abs(d) < delta_min {
                    critical = Some(p.t);
                    continue;
                }
                let (cell, frac) = grid.locate(p.t);
                row.push(Contribution {
                    cell,
                    frac,
                    weight: 1.0 / math::abs(d),
                });
            }
            if let Some(v) = critical {
                if i == 0 {
                    singular.push((0, 1));
                } else if i == cells {
                    singular.push((cells, cells - 1));
                } else {
                    return Err(FpError::CriticalPreimage { t, v });
                }
                row.clear();
            }
            rows.push(row);
        }
        Ok(Self { a, b, rows, singular })
    }

    pub fn cells(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn apply(&self, f: &DensityFn) -> Result<DensityFn, FpError> {
        if f.domain() != (self.a, self.b) || f.cells() != self.cells() {
            return Err(FpError::DomainMismatch(f.a, f.b));
        }
        let mut values: Vec<f64> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        let fv = if c.frac == 0.0 {
                            f.values[c.cell]
                        } else {
                            f.values[c.cell] + c.frac * (f.values[c.cell + 1] - f.values[c.cell])
                        };
                        c.weight * fv
                    })
                    .sum()
            })
            .collect();
        for &(node, from) in &self.singular {
            values[node] = SINGULAR_NODE_FACTOR * values[from];
        }
        Ok(DensityFn {
            a: self.a,
            b: self.b,
            values,
        })
    }
}

/// A profile `c / sqrt(d)` has mass `2 c sqrt(h)` on `[0, h]`; the trapezoid
/// rule reproduces it when the end value is three times the value at `d = h`.
pub const SINGULAR_NODE_FACTOR: f64 = 3.0;

/// `P_q[f]` on the grid of `f`.
pub fn fp_apply(m: &PiecewiseMap, f: &DensityFn) -> Result<DensityFn, FpError> {
    if f.domain() != m.domain() {
        return Err(FpError::DomainMismatch(f.a, f.b));
    }
    TransferOperator::new(m, f.cells())?.apply(f)
}

/// How the iterates `P^i[1]` are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DensityMode {
    /// `Σ_{i<n} P^i[1]`, unnormalized.
    Plain,
    /// `(1/n) Σ_{i<n} P^i[1]`, then normalized.
    #[default]
    Cesaro,
}

impl DensityMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Cesaro => "cesaro",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantDensity {
    pub density: DensityFn,
    /// `‖P[f] − f‖∞` over interior nodes.
    pub residual: f64,
    pub mode: DensityMode,
    pub iterations: usize,
}

/// Default number of boundary cells skipped by residual norms.
pub const BOUNDARY_MARGIN_CELLS: usize = 2;

/// Invariant density from `n` iterates of the operator applied to `1`.
pub fn invariant_density(
    m: &PiecewiseMap,
    cells: usize,
    n: usize,
    mode: DensityMode,
) -> Result<InvariantDensity, FpError> {
    if n == 0 {
        return Err(FpError::InvalidArgument("at least one iteration is required"));
    }
    let (a, b) = m.domain();
    let op = TransferOperator::new(m, cells)?;
    let mut iterate = DensityFn::constant(a, b, cells, 1.0);
    let mut sum = DensityFn::constant(a, b, cells, 0.0);
    for i in 0..n {
        sum = sum.combine(1.0, &iterate, 1.0);
        if i + 1 < n {
            iterate = op.apply(&iterate)?;
        }
    }
    let density = match mode {
        DensityMode::Plain => sum,
        DensityMode::Cesaro => sum.combine(1.0 / n as f64, &sum, 0.0).normalized()?,
    };
    let residual = residual_with(&op, &density, BOUNDARY_MARGIN_CELLS)?;
    Ok(InvariantDensity {
        density,
        residual,
        mode,
        iterations: n,
    })
}

/// `‖P[f] − f‖∞` over nodes at least `margin_cells` away from the boundary.
pub fn fixed_point_residual(m: &PiecewiseMap, f: &DensityFn, margin_cells: usize) -> Result<f64, FpError> {
    if f.domain() != m.domain() {
        return Err(FpError::DomainMismatch(f.a, f.b));
    }
    residual_with(&TransferOperator::new(m, f.cells())?, f, margin_cells)
}

fn residual_with(op: &TransferOperator, f: &DensityFn, margin: usize) -> Result<f64, FpError> {
    let pf = op.apply(f)?;
    let n = f.cells();
    let hi = n.saturating_sub(margin);
    Ok(math::max_abs((margin..=hi).map(|i| pf.values[i] - f.values[i])))
}

/// Normalized histogram of an orbit over `bins` equal bins of the domain.
pub fn orbit_histogram(m: &PiecewiseMap, x0: f64, points: usize, bins: usize) -> Result<Vec<f64>, FpError> {
    let (a, b) = m.domain();
    let width = (b - a) / bins as f64;
    let mut counts = alloc::vec![0usize; bins];
    let mut x = x0;
    for _ in 0..points {
        x = m.eval(x)?.clamp(a, b);
        let k = (((x - a) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / (points as f64 * width)).collect())
}

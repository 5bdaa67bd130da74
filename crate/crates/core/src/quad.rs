//! Quadrature rules.
//!
//! Composite Simpson with successive doubling is used for functionals whose
//! integrand is smooth up to the panel ends. Cumulative integrals (gauge
//! function, symmetry ODE) use a globally adaptive Gauss-Kronrod 7/15 rule: it
//! never samples the interval ends, so integrable endpoint singularities and
//! jumps at piece boundaries are handled without special cases.

use alloc::vec::Vec;

use crate::math;

/// Composite Simpson refinement settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Stop once two successive refinements differ by less than this.
    pub tol: f64,
    /// Upper bound on Simpson panels per smooth piece.
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_panels: 1 << 20,
        }
    }
}

/// Composite Simpson with `panels` panels (each panel is two sub-intervals).
pub fn simpson<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, lo: f64, hi: f64, panels: usize) -> Result<f64, E> {
    let n = 2 * panels.max(1);
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo)? + f(hi)?;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Simpson with panel doubling until successive values agree to `spec.tol`.
/// Returns the last estimate even when the panel budget runs out.
pub fn simpson_refined<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    spec: QuadratureSpec,
) -> Result<f64, E> {
    let mut panels = 4;
    let mut prev = simpson(f, lo, hi, panels)?;
    while panels < spec.max_panels {
        panels *= 2;
        let next = simpson(f, lo, hi, panels)?;
        if math::abs(next - prev) < spec.tol {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn gauss_kronrod_15<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, lo: f64, hi: f64) -> Result<(f64, f64), E> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kronrod * h, math::abs((kronrod - gauss) * h)))
}

/// Adaptive integration settings for [`integrate_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_segments: 400,
        }
    }
}

/// Globally adaptive Gauss-Kronrod: repeatedly bisects the segment with the
/// largest error estimate until the total estimate meets the tolerance.
pub fn integrate_adaptive<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    spec: AdaptiveSpec,
) -> Result<f64, E> {
    if lo == hi {
        return Ok(0.0);
    }
    let (v, e) = gauss_kronrod_15(f, lo, hi)?;
    let mut segments: Vec<(f64, f64, f64, f64)> = alloc::vec![(lo, hi, v, e)];
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * math::abs(total)) || segments.len() >= spec.max_segments {
            return Ok(total);
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, s)| if s.3 > be { (i, s.3) } else { (bi, be) });
        let (a, b, _, _) = segments.swap_remove(worst);
        let m = 0.5 * (a + b);
        if !(a < m && m < b) {
            // cannot bisect further in floating point
            return Ok(total);
        }
        let (v1, e1) = gauss_kronrod_15(f, a, m)?;
        let (v2, e2) = gauss_kronrod_15(f, m, b)?;
        segments.push((a, m, v1, e1));
        segments.push((m, b, v2, e2));
    }
}

/// Integral over `[lo, hi]` split at every `breaks` point strictly inside.
pub fn integrate_split<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    spec: AdaptiveSpec,
) -> Result<f64, E> {
    let (sign, lo, hi) = if lo <= hi { (1.0, lo, hi) } else { (-1.0, hi, lo) };
    let mut acc = 0.0;
    let mut left = lo;
    for &b in breaks.iter().filter(|&&b| lo < b && b < hi) {
        acc += integrate_adaptive(f, left, b, spec)?;
        left = b;
    }
    acc += integrate_adaptive(f, left, hi, spec)?;
    Ok(sign * acc)
}

/// `F(nodes[k]) = ∫_{nodes[0]}^{nodes[k]} f`, with each cell split at
/// `breaks` (which must be sorted).
pub fn cumulative<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    nodes: &[f64],
    breaks: &[f64],
    spec: AdaptiveSpec,
) -> Result<Vec<f64>, E> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in nodes.windows(2) {
        acc += integrate_split(f, w[0], w[1], breaks, spec)?;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let mut f = ok(|x| 2.0 * x * x * x - x * x + 3.0 * x - 1.0);
        let exact = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 1.5 * x * x - x;
        for panels in [1, 2, 7] {
            let v = simpson(&mut f, -0.3, 1.7, panels).unwrap();
            assert!((v - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_refinement_converges() {
        let v = simpson_refined(
            &mut ok(libm::sin),
            0.0,
            core::f64::consts::PI,
            QuadratureSpec::default(),
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn kronrod_rule_exactness() {
        // the 15-point Kronrod rule is exact to degree 22, the 7-point Gauss
        // rule to degree 13, so their difference vanishes up to degree 13
        for deg in 0..=22 {
            let mut f = ok(|x: f64| x.powi(deg));
            let (k, e) = gauss_kronrod_15(&mut f, -1.0, 1.0).unwrap();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((k - exact).abs() < 1e-14, "degree {deg}: {k} vs {exact}");
            if deg <= 13 {
                assert!(e < 1e-14, "degree {deg}: gauss mismatch {e}");
            }
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^(-1/3) dx = 3/2, never evaluating x = 0
        let mut f = |x: f64| -> Result<f64, &'static str> {
            if x == 0.0 {
                return Err("sampled the singular endpoint");
            }
            Ok(libm::pow(x, -1.0 / 3.0))
        };
        let v = integrate_adaptive(&mut f, 0.0, 1.0, AdaptiveSpec::default()).unwrap();
        assert!((v - 1.5).abs() < 1e-11, "{v}");
    }

    #[test]
    fn split_integration_handles_jumps() {
        let mut f = ok(|x| if x < 0.3 { 1.0 } else { 5.0 });
        let v = integrate_split(&mut f, 0.0, 1.0, &[0.3], AdaptiveSpec::default()).unwrap();
        assert!((v - (0.3 + 3.5)).abs() < 1e-13);
        let back = integrate_split(&mut f, 1.0, 0.0, &[0.3], AdaptiveSpec::default()).unwrap();
        assert!((back + v).abs() < 1e-13);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let nodes: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let vals = cumulative(
            &mut ok(|x| libm::pow(x, -1.0 / 3.0)),
            &nodes,
            &[],
            AdaptiveSpec::default(),
        )
        .unwrap();
        for (x, v) in nodes.iter().zip(vals) {
            assert!((v - 1.5 * libm::pow(*x, 2.0 / 3.0)).abs() < 1e-11);
        }
    }
}

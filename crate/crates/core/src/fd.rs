//! Central finite differences for total derivatives along a candidate.

/// Five-point central difference `f'(x)` with step `h`; every probe lies in
/// `[x - 2h, x + 2h]`.
pub(crate) fn central<E>(mut f: impl FnMut(f64) -> Result<f64, E>, x: f64, h: f64) -> Result<f64, E> {
    let (m2, m1, p1, p2) = (f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h))
}

/// Probe reach of [`central`] in units of `h`.
pub(crate) const REACH: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;

    #[test]
    fn exact_for_quartics() {
        let f = |x: f64| Ok::<_, Infallible>(x.powi(4) - 3.0 * x * x + x);
        let d = central(f, 0.7, 1e-2).unwrap();
        let exact = 4.0 * 0.343 - 6.0 * 0.7 + 1.0;
        assert!((d - exact).abs() < 1e-10);
    }
}

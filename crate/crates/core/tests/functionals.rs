use compvar::fp::{invariant_density, DensityFn, DensityMode};
use compvar::pwmap::{CompositionMode, PiecewiseCurve, PiecewiseMap};
use compvar::quad::QuadratureSpec;
use compvar::varcalc::{chaos_functional, eval_functional, scan_residuals, Problem, ResidualKind};
use compvar::Lagrangian;

fn uniform(cells: usize) -> DensityFn {
    DensityFn::constant(0.0, 1.0, cells, 1.0)
}

#[test]
fn chaos_functional_hand_values() {
    let spec = QuadratureSpec::default();
    let tent = chaos_functional(&PiecewiseMap::tent(), &uniform(100), spec).unwrap();
    assert!((tent - 1.0 / 6.0).abs() <= 1e-8, "{tent}");
    let folded = chaos_functional(&PiecewiseMap::reflected_doubling(), &uniform(100), spec).unwrap();
    assert!((folded - 0.25).abs() <= 1e-8, "{folded}");
    let id = chaos_functional(&PiecewiseMap::identity(0.0, 1.0), &uniform(10), spec).unwrap();
    assert_eq!(id, 0.0);
}

#[test]
fn chaos_functional_with_the_logistic_density() {
    // (q - x)² = (3t - 4t²)², integrated against the arcsine law via its
    // moments E[t^k]; the exact value is 1/4
    let m = PiecewiseMap::logistic();
    let f = invariant_density(&m, 2000, 200, DensityMode::Cesaro).unwrap().density;
    let moments = [1.0, 0.5, 0.375, 0.3125, 0.2734375];
    let exact = 9.0 * moments[2] - 24.0 * moments[3] + 16.0 * moments[4];
    let v = chaos_functional(&m, &f, QuadratureSpec::default()).unwrap();
    assert!((v - exact).abs() / exact <= 5e-2, "{v} vs {exact}");
}

#[test]
fn functional_with_z_free_integrands() {
    let tent = PiecewiseMap::tent();
    let p = Problem::from_map(Lagrangian::parse("(q - x)^2").unwrap(), &tent, CompositionMode::Actual).unwrap();
    assert!((eval_functional(&p, QuadratureSpec::default()).unwrap() - 1.0 / 6.0).abs() <= 1e-12);
    let zero = Problem::from_map(Lagrangian::parse("0").unwrap(), &tent, CompositionMode::Actual).unwrap();
    assert_eq!(eval_functional(&zero, QuadratureSpec::default()).unwrap(), 0.0);
    for kind in [ResidualKind::EulerLagrange, ResidualKind::DuBoisReymond] {
        let r = scan_residuals(&zero, kind, 100).unwrap();
        assert!(r.samples.iter().all(|s| s.value == 0.0));
    }
}

#[test]
fn simpson_is_exact_for_piecewise_cubics() {
    let curve = PiecewiseCurve::from_sources(&[(0.0, 0.4, "x^3 - x"), (0.4, 1.0, "2*x^2 + 1")]).unwrap();
    let p = Problem::new(Lagrangian::parse("q + qd*x").unwrap(), curve, CompositionMode::Actual).unwrap();
    // ∫₀^0.4 (x³ - x + 3x³ - x) dx + ∫_0.4^1 (2x² + 1 + 4x²) dx
    let exact = (0.4f64.powi(4) - 0.4f64.powi(2)) + (2.0 * (1.0 - 0.4f64.powi(3)) + 0.6);
    let v = eval_functional(&p, QuadratureSpec::default()).unwrap();
    assert!((v - exact).abs() <= 1e-12, "{v} vs {exact}");
}

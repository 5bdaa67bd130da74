//! Without `z`, the compositional residuals collapse to the classical ones.

use compvar::classic::{
    classical_dbr_residual, classical_el_residual, classical_invariance_residual, classical_noether_derivative,
    classical_noether_quantity, ClassicalGenerator, ClassicalLagrangian, ClassicalProblem,
};
use compvar::noether::{conserved_quantity, gauge_f, invariance_residual, InvarianceForm, SymmetryGenerator};
use compvar::pwmap::{CompositionMode, PiecewiseCurve};
use compvar::varcalc::{dbr_residual, el_residual, Problem};
use compvar::Lagrangian;

/// `(L, extremal, a, b)`.
const CASES: [(&str, &str, f64, f64); 10] = [
    ("qd^2/2", "x", 0.0, 1.0),
    ("(qd^2 - q^2)/2", "sin(x)", 0.0, 3.0),
    ("x*qd^2", "ln(x)", 1.0, 2.0),
    ("qd^2 + q^2", "exp(x)", 0.0, 1.0),
    ("qd^2/2 - q", "-x^2/2 + 2*x", 0.0, 1.0),
    ("sqrt(1 + qd^2)", "3*x - 1", 0.0, 1.0),
    ("qd^2/2 + x*q", "x^3/6 + x", 0.0, 1.0),
    ("exp(qd)", "2*x", 0.0, 1.0),
    ("q*qd^2", "x^(2/3)", 1.0, 2.0),
    ("x^2*qd^2/2", "-1/x", 1.0, 2.0),
];

const GENERATORS: [(&str, &str); 4] = [("1", "0"), ("0", "1"), ("x", "q/2"), ("q", "x*q")];

fn problems(l: &str, q: &str, a: f64, b: f64) -> (Problem, ClassicalProblem) {
    let curve = PiecewiseCurve::from_sources(&[(a, (a + b) / 2.0, q), ((a + b) / 2.0, b, q)]).unwrap();
    let p = Problem::new(Lagrangian::parse(l).unwrap(), curve.clone(), CompositionMode::Actual).unwrap();
    let cp = ClassicalProblem::new(ClassicalLagrangian::parse(l, 1).unwrap(), vec![curve]).unwrap();
    (p, cp)
}

fn samples(a: f64, b: f64) -> impl Iterator<Item = f64> {
    (0..60).map(move |k| a + (k as f64 + 0.5) * (b - a) / 60.0)
}

#[test]
fn extremals_satisfy_the_classical_equations() {
    for (l, q, a, b) in CASES {
        let (_, cp) = problems(l, q, a, b);
        for x in samples(a, b) {
            let Ok(el) = classical_el_residual(&cp, x) else {
                continue;
            };
            assert!(el[0].abs() <= 1e-6, "{l} along {q} at {x}: {}", el[0]);
        }
    }
}

#[test]
fn residuals_coincide_pointwise() {
    for (l, q, a, b) in CASES {
        let (p, cp) = problems(l, q, a, b);
        let mut shared = 0;
        for x in samples(a, b) {
            let (Ok(el), Ok(cel)) = (el_residual(&p, x), classical_el_residual(&cp, x)) else {
                continue;
            };
            shared += 1;
            assert!((el + cel[0]).abs() <= 1e-10, "{l}: EL at {x}");
            let dbr = dbr_residual(&p, x).unwrap();
            let cdbr = classical_dbr_residual(&cp, x).unwrap();
            assert!((dbr + cdbr).abs() <= 1e-10, "{l}: DBR at {x}");
        }
        assert!(shared >= 50, "{l}: only {shared} shared samples");
    }
}

#[test]
fn noether_terms_coincide_pointwise() {
    for (l, q, a, b) in CASES {
        let (p, cp) = problems(l, q, a, b);
        for (tau, xi) in GENERATORS {
            let g = SymmetryGenerator::parse(tau, xi).unwrap();
            let cg = ClassicalGenerator::parse(tau, &[xi]).unwrap();
            let f = gauge_f(&p, &g, 20).unwrap();
            assert!(f.values().iter().all(|v| *v == 0.0));
            for x in samples(a, b) {
                let c = conserved_quantity(&p, &g, &f, x).unwrap();
                let cc = classical_noether_quantity(&cp, &cg, x).unwrap();
                assert!((c - cc).abs() <= 1e-10, "{l}, ({tau}, {xi}): C at {x}");
                let Ok(inv) = invariance_residual(&p, &g, x, InvarianceForm::Direct) else {
                    continue;
                };
                let cinv = classical_invariance_residual(&cp, &cg, x).unwrap();
                assert!((inv - cinv).abs() <= 1e-10, "{l}, ({tau}, {xi}): invariance at {x}");
            }
        }
    }
}

#[test]
fn classical_noether_chain() {
    // dC/dx is a combination of the EL and invariance residuals
    for (l, q, a, b) in CASES {
        let (_, cp) = problems(l, q, a, b);
        for (tau, xi) in GENERATORS {
            let cg = ClassicalGenerator::parse(tau, &[xi]).unwrap();
            for x in samples(a, b) {
                let (Ok(el), Ok(inv)) = (
                    classical_el_residual(&cp, x),
                    classical_invariance_residual(&cp, &cg, x),
                ) else {
                    continue;
                };
                let eps = el[0].abs().max(inv.abs());
                let dc = classical_noether_derivative(&cp, &cg, x).unwrap();
                let scale = 1.0 + classical_noether_quantity(&cp, &cg, x).unwrap().abs();
                assert!(
                    dc.abs() <= 1e2 * eps + 1e-6 * scale,
                    "{l}, ({tau}, {xi}) at {x}: {dc} vs {eps}"
                );
            }
        }
    }
}

#[test]
fn vector_oscillator_conserves_angular_momentum_and_energy() {
    let l = ClassicalLagrangian::parse("(qd1^2 + qd2^2 - q1^2 - q2^2)/2", 2).unwrap();
    let curves = vec![
        PiecewiseCurve::from_sources(&[(0.0, 6.0, "cos(x)")]).unwrap(),
        PiecewiseCurve::from_sources(&[(0.0, 6.0, "sin(x)")]).unwrap(),
    ];
    let cp = ClassicalProblem::new(l, curves).unwrap();
    let rotation = ClassicalGenerator::parse("0", &["-q2", "q1"]).unwrap();
    let time = ClassicalGenerator::parse("1", &["0", "0"]).unwrap();
    for k in 0..50 {
        let x = 0.06 + 0.117 * k as f64;
        let el = classical_el_residual(&cp, x).unwrap();
        assert!(el.iter().all(|r| r.abs() <= 1e-6));
        assert!(classical_invariance_residual(&cp, &rotation, x).unwrap().abs() <= 1e-9);
        assert!((classical_noether_quantity(&cp, &rotation, x).unwrap() - 1.0).abs() <= 1e-12);
        assert!((classical_noether_quantity(&cp, &time, x).unwrap() + 1.0).abs() <= 1e-12);
    }
}

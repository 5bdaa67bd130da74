//! Exact identities between the residuals, checked on random candidates
//! that need not be extremals.
//!
//! With `z' = q'(q(x)) q'(x)`, the DuBois-Reymond residual is `q'` times
//! the Euler-Lagrange residual, and `dC/dx = τ q' EL + Inv_fp`.

use compvar::noether::{
    conserved_derivative, conserved_quantity, gauge_f, invariance_residual, InvarianceForm, SymmetryGenerator,
};
use compvar::pwmap::{CompositionMode, PiecewiseMap};
use compvar::varcalc::{dbr_residual, el_residual, Problem, ResidualError};
use compvar::Lagrangian;
use proptest::prelude::*;

const LAGRANGIANS: [&str; 4] = ["(x + q + z)/3", "qd^2/2 + z*q", "x*z + q*qd", "z^2/2 + qd*x + sin(q)"];

fn candidate() -> impl Strategy<Value = PiecewiseMap> {
    (-1.8..-0.5f64, -2.0..-0.5f64, 0.0..0.3f64).prop_map(|(s1, s2, c)| {
        let b1 = format!("1 + ({s1})*x - {c}*x^2");
        let b2 = format!("({s2})*(x - 1)");
        PiecewiseMap::from_sources(&[(0.0, 0.5, &b1), (0.5, 1.0, &b2)]).unwrap()
    })
}

fn problem() -> impl Strategy<Value = Problem> {
    (candidate(), 0..LAGRANGIANS.len(), prop::bool::ANY).prop_map(|(m, l, per_branch)| {
        let mode = if per_branch {
            CompositionMode::PerBranch
        } else {
            CompositionMode::Actual
        };
        Problem::from_map(Lagrangian::parse(LAGRANGIANS[l]).unwrap(), &m, mode).unwrap()
    })
}

fn generator() -> impl Strategy<Value = SymmetryGenerator> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(a, b, c)| SymmetryGenerator::parse(&format!("{a} + ({b})*x*x"), &format!("({c})*q + x")).unwrap())
}

fn admitted<T>(r: Result<T, ResidualError>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(ResidualError::Excluded(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dubois_reymond_is_velocity_times_euler_lagrange(p in problem(), x in 0.01..0.99f64) {
        let (Some(el), Some(dbr)) = (admitted(el_residual(&p, x)), admitted(dbr_residual(&p, x))) else {
            return Ok(());
        };
        let qd = p.state(x).unwrap().qd;
        prop_assert!((dbr - qd * el).abs() <= 1e-6 * (1.0 + el.abs()), "{dbr} vs {qd} * {el}");
        prop_assert!(dbr.abs() <= (1.0 + qd.abs()) * el.abs() + 1e-6);
    }

    #[test]
    fn noether_chain(p in problem(), g in generator(), x in 0.01..0.99f64) {
        let (Some(el), Some(inv)) = (
            admitted(el_residual(&p, x)),
            admitted(invariance_residual(&p, &g, x, InvarianceForm::FrobeniusPerron)),
        ) else {
            return Ok(());
        };
        let s = p.state(x).unwrap();
        let tau = g.tau.eval(x, s.q).unwrap();
        let dc = conserved_derivative(&p, &g, x).unwrap();
        let predicted = tau * s.qd * el + inv;
        prop_assert!((dc - predicted).abs() <= 1e-6 * (1.0 + predicted.abs()), "{dc} vs {predicted}");
    }

    #[test]
    fn gauge_is_linear_in_tau(p in problem(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g1 = SymmetryGenerator::parse("1 + x", "0").unwrap();
        let g2 = SymmetryGenerator::parse("x*q", "0").unwrap();
        let mix = SymmetryGenerator::parse(&format!("({a})*(1 + x) + ({b})*(x*q)"), "0").unwrap();
        let (f1, f2, f) = (gauge_f(&p, &g1, 40).unwrap(), gauge_f(&p, &g2, 40).unwrap(), gauge_f(&p, &mix, 40).unwrap());
        for ((u, v), w) in f1.values().iter().zip(f2.values()).zip(f.values()) {
            prop_assert!((a * u + b * v - w).abs() <= 1e-10);
        }
    }

    #[test]
    fn conserved_quantity_is_scale_equivariant(
        p in problem(),
        g in generator(),
        k in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64],
        x in 0.0..1.0f64,
    ) {
        let f = gauge_f(&p, &g, 40).unwrap();
        let gk = g.scaled(k);
        let c = conserved_quantity(&p, &g, &f, x).unwrap();
        let ck = conserved_quantity(&p, &gk, &f.scaled(k), x).unwrap();
        prop_assert!((ck - k * c).abs() <= 1e-12 * (1.0 + c.abs()), "{ck} vs {k} * {c}");
    }
}

use super::*;
use alloc::string::ToString;
use alloc::vec;
use proptest::prelude::*;

const VARS: [&str; 4] = ["x", "q", "qd", "z"];

fn central_fd(e: &Expr, point: &[f64], var: usize, h: f64) -> f64 {
    let mut hi = point.to_vec();
    let mut lo = point.to_vec();
    hi[var] += h;
    lo[var] -= h;
    (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h)
}

#[test]
fn parses_the_worked_example_lagrangian() {
    let e = Expr::parse("(x + q + z)/3", &VARS).unwrap();
    assert_eq!(e.eval(&[1.0, 1.0, 0.0, 1.0]).unwrap(), 1.0);
    let v = e.eval(&[0.4, 0.2, 0.0, 0.6]).unwrap();
    assert!((v - 0.4).abs() < 1e-15);
}

#[test]
fn zero_and_simple_constants() {
    let e = Expr::parse("0", &["x"]).unwrap();
    assert_eq!(e.eval(&[3.5]).unwrap(), 0.0);
    let e = Expr::parse("x^2 + sin(q)", &["x", "q"]).unwrap();
    assert_eq!(e.eval(&[2.0, 0.0]).unwrap(), 4.0);
    let e = Expr::parse("x", &["x"]).unwrap();
    assert_eq!(e.eval(&[7.0]).unwrap(), 7.0);
}

#[test]
fn precedence() {
    let e = Expr::parse("-x^2", &["x"]).unwrap();
    assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
    let e = Expr::parse("2^3^2", &["x"]).unwrap();
    assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
    let e = Expr::parse("1 - 2 * 3 / 4 + x", &["x"]).unwrap();
    assert_eq!(e.eval(&[0.5]).unwrap(), 0.0);
    let e = Expr::parse("x^-2", &["x"]).unwrap();
    assert_eq!(e.eval(&[2.0]).unwrap(), 0.25);
    let e = Expr::parse("-2*x", &["x"]).unwrap();
    assert_eq!(e.eval(&[1.5]).unwrap(), -3.0);
    let e = Expr::parse("1.5e-1 * 2E1", &["x"]).unwrap();
    assert!((e.eval(&[0.0]).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn parse_errors_carry_positions() {
    let err = Expr::parse("x + * q", &["x", "q"]).unwrap_err();
    assert_eq!(err.position(), 4);
    assert!(matches!(err, ParseError::Syntax { .. }));

    let err = Expr::parse("x + y", &["x"]).unwrap_err();
    assert_eq!(
        err,
        ParseError::UnknownVariable {
            name: "y".into(),
            position: 4
        }
    );

    let err = Expr::parse("tan(x)", &["x"]).unwrap_err();
    assert!(matches!(err, ParseError::UnknownFunction { position: 0, .. }));

    assert!(Expr::parse("(x + 1", &["x"]).is_err());
    assert!(Expr::parse("2x", &["x"]).is_err());
    assert!(Expr::parse("", &["x"]).is_err());
    assert!(Expr::parse("x $ 2", &["x"]).is_err());
    assert!(Expr::parse("1e999", &["x"]).is_err());
}

#[test]
fn domain_errors_are_reported() {
    let e = Expr::parse("1/x", &["x"]).unwrap();
    let err = e.eval(&[0.0]).unwrap_err();
    assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
    assert_eq!(err.subexpr, "(1 / x)");

    let e = Expr::parse("q + ln(x)", &["x", "q"]).unwrap();
    let err = e.eval(&[-1.0, 0.0]).unwrap_err();
    assert_eq!(err.kind, DomainErrorKind::LogOfNonPositive);
    assert_eq!(err.subexpr, "ln(x)");

    let e = Expr::parse("sqrt(x - 1)", &["x"]).unwrap();
    assert_eq!(e.eval(&[0.0]).unwrap_err().kind, DomainErrorKind::SqrtOfNegative);

    let e = Expr::parse("x^(-1/3)", &["x"]).unwrap();
    assert_eq!(e.eval(&[0.0]).unwrap_err().kind, DomainErrorKind::Power);
    assert_eq!(e.eval(&[-1.0]).unwrap_err().kind, DomainErrorKind::Power);

    let e = Expr::parse("exp(x)", &["x"]).unwrap();
    assert_eq!(e.eval(&[1e4]).unwrap_err().kind, DomainErrorKind::NonFinite);
}

#[test]
fn arity_is_checked() {
    let e = Expr::parse("x", &["x", "q"]).unwrap();
    assert_eq!(e.try_eval(&[1.0]), Err(ExprError::Arity { expected: 2, got: 1 }));
}

#[test]
fn derivative_examples() {
    let e = Expr::parse("(x + q + z)/3", &VARS).unwrap();
    let dz = e.differentiate(3).unwrap();
    assert_eq!(dz.as_const(), Some(1.0 / 3.0));

    let c = Expr::parse("2.5", &VARS).unwrap();
    assert_eq!(c.differentiate(0).unwrap().as_const(), Some(0.0));

    let e = Expr::parse("qd^2/2", &VARS).unwrap();
    let d = e.differentiate(2).unwrap();
    let p = [0.1, 0.2, 3.0, 0.4];
    assert!((d.eval(&p).unwrap() - 3.0).abs() < 1e-14);
    assert!((d.eval(&p).unwrap() - central_fd(&e, &p, 2, 1e-5)).abs() < 1e-8);

    let map = Expr::parse("-2*x + 1", &["x"]).unwrap();
    assert_eq!(map.differentiate(0).unwrap().as_const(), Some(-2.0));
}

#[test]
fn abs_is_evaluable_but_not_differentiable() {
    let e = Expr::parse("abs(x) + q", &["x", "q"]).unwrap();
    assert_eq!(e.eval(&[-2.0, 1.0]).unwrap(), 3.0);
    assert_eq!(e.differentiate(1), Err(ExprError::NonDifferentiable));
    assert_eq!(e.differentiate(0), Err(ExprError::NonDifferentiable));
}

#[test]
fn lagrangian_partials() {
    let l = Lagrangian::parse("(x + q + z)/3").unwrap();
    for i in 1..=4 {
        let v = l.eval_partial(i, 0.3, 0.4, -2.0, 0.2).unwrap();
        let expected = if i == 3 { 0.0 } else { 1.0 / 3.0 };
        assert!((v - expected).abs() < 1e-15, "partial {i}");
    }
    assert!(l.uses_composition());
    assert!(!Lagrangian::parse("qd^2/2").unwrap().uses_composition());
    assert_eq!(Lagrangian::parse("abs(qd)"), Err(LagrangianError::ContainsAbs));
    let wrong = Expr::parse("x", &["x", "q"]).unwrap();
    assert_eq!(Lagrangian::new(wrong), Err(LagrangianError::WrongVariables));
}

#[test]
fn substitution_composes() {
    let outer = Expr::parse("-2*x + 2", &["x"]).unwrap();
    let inner = Expr::parse("-2*x + 1", &["x"]).unwrap();
    let z = outer.substitute(0, &inner);
    assert!((z.eval(&[0.1]).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(z.differentiate(0).unwrap().as_const(), Some(4.0));
}

#[test]
fn rebind_maps_by_name() {
    let e = Expr::parse("q * x", &["x", "q"]).unwrap();
    let r = e.rebind(&VARS).unwrap();
    assert_eq!(r.eval(&[2.0, 3.0, 0.0, 0.0]).unwrap(), 6.0);
    assert!(e.rebind(&["x"]).is_err());
}

#[test]
fn printing_is_fully_parenthesized() {
    let e = Expr::parse("-x^2 + sin(q)/2", &["x", "q"]).unwrap();
    assert_eq!(e.to_string(), "((-(x ^ 2)) + (sin(q) / 2))");
    let e = Expr::parse("x - -3", &["x"]).unwrap();
    assert_eq!(e.to_string(), "(x - (-3))");
}

// ---- property tests -------------------------------------------------------

/// Trees that are smooth and finite on [-1, 1]^4.
fn smooth_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![(-3.0..3.0f64).prop_map(Node::Const), (0usize..4).prop_map(Node::Var),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Unary(UnaryOp::Neg, a.into())),
            inner.clone().prop_map(|a| Node::Unary(UnaryOp::Sin, a.into())),
            inner.clone().prop_map(|a| Node::Unary(UnaryOp::Cos, a.into())),
            inner
                .clone()
                .prop_map(|a| Node::Unary(UnaryOp::Exp, Node::Unary(UnaryOp::Sin, a.into()).into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Binary(BinaryOp::Add, a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Binary(BinaryOp::Sub, a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Binary(BinaryOp::Mul, a.into(), b.into())),
            // denominator 2 + sin(b) stays in [1, 3]
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Binary(
                BinaryOp::Div,
                a.into(),
                Node::Binary(
                    BinaryOp::Add,
                    Node::Const(2.0).into(),
                    Node::Unary(UnaryOp::Sin, b.into()).into()
                )
                .into()
            )),
            (inner.clone(), 1u8..4).prop_map(|(a, k)| Node::Binary(
                BinaryOp::Pow,
                a.into(),
                Node::Const(k as f64).into()
            )),
            // ln and sqrt of something in [1, 3]
            inner.clone().prop_map(|a| Node::Unary(
                UnaryOp::Ln,
                Node::Binary(
                    BinaryOp::Add,
                    Node::Const(2.0).into(),
                    Node::Unary(UnaryOp::Cos, a.into()).into()
                )
                .into()
            )),
            inner.prop_map(|a| Node::Unary(
                UnaryOp::Sqrt,
                Node::Binary(
                    BinaryOp::Add,
                    Node::Const(2.0).into(),
                    Node::Unary(UnaryOp::Sin, a.into()).into()
                )
                .into()
            )),
        ]
    })
}

fn smooth_expr() -> impl Strategy<Value = Expr> {
    smooth_node().prop_map(|n| Expr::from_node(n, VARS.iter().map(|v| v.to_string()).collect()))
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_central_difference(e in smooth_expr(), p in point(), v in 0usize..4) {
        let d = e.differentiate(v).unwrap().eval(&p).unwrap();
        let fd = central_fd(&e, &p, v, 1e-5);
        prop_assert!(close(d, fd, 1e-6), "{e}: d={d} fd={fd}");
    }

    #[test]
    fn mixed_partials_commute(e in smooth_expr(), p in point(), v in 0usize..4, w in 0usize..4) {
        let dvw = e.differentiate(v).unwrap().differentiate(w).unwrap().eval(&p).unwrap();
        let dwv = e.differentiate(w).unwrap().differentiate(v).unwrap().eval(&p).unwrap();
        prop_assert!(close(dvw, dwv, 1e-9), "{e}: {dvw} vs {dwv}");
    }

    #[test]
    fn differentiation_is_linear(
        e1 in smooth_expr(), e2 in smooth_expr(),
        a in -3.0..3.0f64, b in -3.0..3.0f64,
        p in point(), v in 0usize..4,
    ) {
        let combo = e1.scaled(a).plus(&e2.scaled(b));
        let lhs = combo.differentiate(v).unwrap().eval(&p).unwrap();
        let rhs = a * e1.differentiate(v).unwrap().eval(&p).unwrap()
            + b * e2.differentiate(v).unwrap().eval(&p).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn print_parse_round_trip(e in smooth_expr()) {
        let parsed = Expr::parse(&e.to_string(), &VARS).unwrap();
        let reparsed = Expr::parse(&parsed.to_string(), &VARS).unwrap();
        prop_assert_eq!(&reparsed, &parsed);
        prop_assert_eq!(reparsed.to_string(), parsed.to_string());
    }

    #[test]
    fn printed_form_evaluates_identically(e in smooth_expr(), p in point()) {
        let parsed = Expr::parse(&e.to_string(), &VARS).unwrap();
        prop_assert_eq!(parsed.eval(&p).unwrap(), e.eval(&p).unwrap());
    }
}

#[test]
fn lagrangian_partials_match_finite_differences() {
    let sources = [
        "(x + q + z)/3",
        "qd^2/2 - q^2/2 + x*z",
        "exp(q*z) + sin(x*qd)",
        "sqrt(1 + qd^2) * ln(2 + x^2) + z^3",
    ];
    let pts = vec![[0.3, 0.4, -2.0, 0.2], [0.9, -0.1, 0.5, 0.7], [0.05, 0.6, 1.1, -0.3]];
    for src in sources {
        let l = Lagrangian::parse(src).unwrap();
        for p in &pts {
            for i in 1..=4 {
                let d = l.partial(i).eval(p).unwrap();
                let fd = central_fd(l.body(), p, i - 1, 1e-5);
                assert!(close(d, fd, 1e-6), "{src} ∂{i}: {d} vs {fd}");
            }
        }
    }
}

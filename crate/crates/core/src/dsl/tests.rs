use super::*;
use crate::error::{Error, EvalErrorKind};
use proptest::prelude::*;

fn expr(text: &str) -> Expr {
    parse_expr(text, 4, 4).unwrap()
}

#[test]
fn parses_exam1_model() {
    let model = parse_model("n=1 m=1\nf1 = -w1 + exp(-3*t)*z1 ; g1 = exp(3*t)*w1 + z1").unwrap();
    assert_eq!(model.n, 1);
    assert_eq!(model.m, 1);
    assert_eq!(model.f.len(), 1);
    assert_eq!(model.g.len(), 1);
    assert!(model.uses_time());
    // ẇ at t=0, w=1, z=-1 is -1 + 1*(-1) = -2.
    assert!((eval(&model.f[0], 0.0, &[1.0], &[-1.0]).unwrap() + 2.0).abs() < 1e-15);
}

#[test]
fn parses_constant_system() {
    let model = parse_model("n=1 m=0\nf1 = 0").unwrap();
    assert_eq!((model.n, model.m), (1, 0));
    assert!(!model.uses_time());
}

#[test]
fn rejects_out_of_range_state() {
    match parse_model("n=1 m=1\nf1 = w2\ng1 = z1") {
        Err(Error::DimensionMismatch(msg)) => assert!(msg.contains("w2")),
        other => panic!("expected DimensionMismatch, got {other:?}"),
    }
}

#[test]
fn unknown_identifier_has_position() {
    match parse_model("n=1 m=0\nf1 = 1 + bogus") {
        Err(Error::Syntax { line, col, message }) => {
            assert_eq!(line, 2);
            assert_eq!(col, 10);
            assert!(message.contains("bogus"));
        }
        other => panic!("expected Syntax error, got {other:?}"),
    }
}

#[test]
fn params_substitute_as_literals() {
    let model = parse_model("n=1 m=0\nparam k = -2.5\nf1 = k*w1").unwrap();
    assert!((eval(&model.f[0], 0.0, &[2.0], &[]).unwrap() + 5.0).abs() < 1e-15);
    assert_eq!(model.params, vec![("k".to_string(), -2.5)]);
}

#[test]
fn comments_and_blank_lines_ignored() {
    let model = parse_model("# header comment\nn=2 m=0\n\nf2 = w1 # trailing\nf1 = -w2\n").unwrap();
    assert_eq!(model.n, 2);
    assert!((eval(&model.f[1], 0.0, &[3.0, 0.0], &[]).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn missing_equation_is_rejected() {
    assert!(matches!(
        parse_model("n=2 m=0\nf1 = 0"),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn eval_constraint_at_consistent_point() {
    let e = expr("exp(3*t)*w1+z1");
    assert_eq!(
        eval(&e, 0.0, &[1.0, 0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0, 0.0]).unwrap(),
        0.0
    );
}

#[test]
fn eval_sin_at_zero() {
    assert_eq!(
        eval(&expr("sin(t)"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        0.0
    );
}

#[test]
fn eval_divide_by_zero_is_an_error() {
    match eval(&expr("w1/z1"), 0.0, &[1.0, 0.0, 0.0, 0.0], &[0.0; 4]) {
        Err(Error::Eval { kind, .. }) => assert_eq!(kind, EvalErrorKind::DivideByZero),
        other => panic!("expected DivideByZero, got {other:?}"),
    }
}

#[test]
fn eval_domain_errors() {
    assert!(matches!(
        eval(&expr("ln(w1)"), 0.0, &[-1.0, 0.0, 0.0, 0.0], &[0.0; 4]),
        Err(Error::Eval {
            kind: EvalErrorKind::DomainError,
            ..
        })
    ));
    assert!(matches!(
        eval(&expr("sqrt(w1)"), 0.0, &[-1.0, 0.0, 0.0, 0.0], &[0.0; 4]),
        Err(Error::Eval {
            kind: EvalErrorKind::DomainError,
            ..
        })
    ));
    // Negative base with non-integer exponent.
    assert!(matches!(
        eval(&expr("w1^0.5"), 0.0, &[-2.0, 0.0, 0.0, 0.0], &[0.0; 4]),
        Err(Error::Eval {
            kind: EvalErrorKind::DomainError,
            ..
        })
    ));
    // Negative base with integer exponent is fine.
    assert_eq!(
        eval(&expr("w1^3"), 0.0, &[-2.0, 0.0, 0.0, 0.0], &[0.0; 4]).unwrap(),
        -8.0
    );
}

#[test]
fn dual_derivative_examples() {
    let (v, d) = eval_dual(
        &expr("exp(3*t)*w1"),
        0.0,
        &[0.7, 0.0, 0.0, 0.0],
        &[0.0; 4],
        Seed::W(0),
    )
    .unwrap();
    assert!((v - 0.7).abs() < 1e-15);
    assert!((d - 1.0).abs() < 1e-15);

    // ∂/∂z1 of 4 z1 + 0.5 sin z1 at z1 = 0 is 4 + 0.5 cos 0 = 4.5.
    let (v, d) = eval_dual(
        &expr("4*z1 + 0.5*sin(z1)"),
        0.0,
        &[0.0; 4],
        &[0.0; 4],
        Seed::Z(0),
    )
    .unwrap();
    assert_eq!(v, 0.0);
    assert!((d - 4.5).abs() < 1e-15);

    let (v, d) = eval_dual(&expr("t^2"), 3.0, &[0.0; 4], &[0.0; 4], Seed::T).unwrap();
    assert!((v - 9.0).abs() < 1e-15);
    assert!((d - 6.0).abs() < 1e-15);
}

#[test]
fn precedence_cases() {
    assert_eq!(
        eval(&expr("1+2*3^2"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        19.0
    );
    // Unary minus binds looser than ^.
    assert_eq!(
        eval(&expr("-2^2"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        -4.0
    );
    assert_eq!(
        eval(&expr("(-2)^2"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        4.0
    );
    // ^ is right-associative: 2^3^2 = 2^9.
    assert_eq!(
        eval(&expr("2^3^2"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        512.0
    );
    assert_eq!(eval(&expr("2^-1"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(), 0.5);
    assert_eq!(
        eval(&expr("6-2-3"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        1.0
    );
    assert_eq!(
        eval(&expr("12/2/3"), 0.0, &[0.0; 4], &[0.0; 4]).unwrap(),
        2.0
    );
}

#[test]
fn header_must_come_first() {
    assert!(parse_model("f1 = 0\nn=1 m=0").is_err());
}

// Random AST generation for the round-trip and derivative properties.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        // Positive literals only: a "-1.5" source literal parses as Neg(1.5).
        (0.01f64..100.0).prop_map(|v| Expr::new(ExprKind::Literal(v))),
        Just(Expr::new(ExprKind::Constant(Constant::Pi))),
        Just(Expr::new(ExprKind::Constant(Constant::E))),
        Just(Expr::new(ExprKind::Var(VarRef::T))),
        (0usize..4).prop_map(|i| Expr::new(ExprKind::Var(VarRef::W(i)))),
        (0usize..4).prop_map(|j| Expr::new(ExprKind::Var(VarRef::Z(j)))),
    ];
    leaf.prop_recursive(6, 64, 8, |inner| {
        prop_oneof![
            (any::<u8>(), inner.clone()).prop_map(|(op, a)| {
                let op = match op % 9 {
                    0 => UnaryOp::Neg,
                    1 => UnaryOp::Sin,
                    2 => UnaryOp::Cos,
                    3 => UnaryOp::Tan,
                    4 => UnaryOp::Exp,
                    5 => UnaryOp::Ln,
                    6 => UnaryOp::Sqrt,
                    7 => UnaryOp::Tanh,
                    _ => UnaryOp::Abs,
                };
                Expr::new(ExprKind::Unary(op, Box::new(a)))
            }),
            (any::<u8>(), inner.clone(), inner).prop_map(|(op, a, b)| {
                let op = match op % 5 {
                    0 => BinaryOp::Add,
                    1 => BinaryOp::Sub,
                    2 => BinaryOp::Mul,
                    3 => BinaryOp::Div,
                    _ => BinaryOp::Pow,
                };
                Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)))
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_parse_round_trip(ast in arb_expr()) {
        let text = pretty_print(&ast);
        let reparsed = parse_expr(&text, 4, 4).unwrap();
        prop_assert_eq!(&reparsed, &ast, "source: {}", text);
    }

    #[test]
    fn dual_matches_central_difference(ast in arb_expr(), which in 0usize..9) {
        let t = 0.37;
        let w = [0.9, 1.7, 0.4, 1.2];
        let z = [1.1, 0.6, 1.9, 0.8];
        let seed = match which {
            0 => Seed::T,
            1..=4 => Seed::W(which - 1),
            _ => Seed::Z(which - 5),
        };
        let h = 1e-6;
        let shift = |delta: f64| -> (f64, [f64; 4], [f64; 4]) {
            let mut t2 = t;
            let mut w2 = w;
            let mut z2 = z;
            match seed {
                Seed::T => t2 += delta,
                Seed::W(i) => w2[i] += delta,
                Seed::Z(j) => z2[j] += delta,
            }
            (t2, w2, z2)
        };

        let dual = eval_dual(&ast, t, &w, &z, seed);
        let (tp, wp, zp) = shift(h);
        let (tm, wm, zm) = shift(-h);
        let plus = eval(&ast, tp, &wp, &zp);
        let minus = eval(&ast, tm, &wm, &zm);
        let (Ok((value, deriv)), Ok(plus), Ok(minus)) = (dual, plus, minus) else {
            // Domain edge somewhere in the tree; nothing to compare.
            return Ok(());
        };
        // Keep away from overflow and from violent curvature, where a
        // central difference is not a fair oracle.
        prop_assume!(value.abs() < 1e6 && deriv.abs() < 1e6);
        prop_assume!(plus.is_finite() && minus.is_finite());
        prop_assume!(plus.abs() < 1e6 && minus.abs() < 1e6);
        let fd = (plus - minus) / (2.0 * h);
        let scale = 1.0_f64.max(deriv.abs());
        prop_assert!(
            (deriv - fd).abs() <= 1e-5 * scale,
            "dual {} vs fd {} on {}",
            deriv,
            fd,
            pretty_print(&ast)
        );
    }
}

use hbern::gexpr::{parse_g, Builtin, Constant, DomainKind, Expr, Func, ScalarFn, UniFn};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|d − oracle| ≤ 1e−6(1 + |d|)` for `d1` against central differences of the value
/// and `d2` against central differences of `d1`.
fn check_derivatives(name: &str, f: &dyn UniFn, lo: f64, hi: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    for _ in 0..100 {
        let t = rng.gen_range(lo..hi);
        let d = f.derivs(t).unwrap();
        let (p, m) = (f.derivs(t + h).unwrap(), f.derivs(t - h).unwrap());
        let fd1 = (p[0] - m[0]) / (2.0 * h);
        let fd2 = (p[1] - m[1]) / (2.0 * h);
        let fd3 = (p[2] - m[2]) / (2.0 * h);
        assert!((d[1] - fd1).abs() <= 1e-6 * (1.0 + d[1].abs()), "{name} d1 at {t}: {} vs {fd1}", d[1]);
        assert!((d[2] - fd2).abs() <= 1e-6 * (1.0 + d[2].abs()), "{name} d2 at {t}: {} vs {fd2}", d[2]);
        assert!((d[3] - fd3).abs() <= 1e-6 * (1.0 + d[3].abs()), "{name} d3 at {t}: {} vs {fd3}", d[3]);
    }
}

#[test]
fn builtin_derivatives_match_differences() {
    for (name, params) in [("tan_tanh", vec![]), ("affine", vec![1.5, -0.25]), ("cot_shift", vec![]), ("square_pos", vec![])] {
        let b = Builtin::from_name(name, &params).unwrap();
        let (lo, hi) = b.interval();
        let (lo, hi) = (lo.max(-4.0), hi.min(4.0));
        let pad = 0.05 * (hi - lo);
        check_derivatives(name, &ScalarFn::from_builtin(b), lo + pad, hi - pad);
    }
}

#[test]
fn parsed_derivatives_match_differences() {
    for src in [
        "sin(t)*exp(-t^2)",
        "sqrt(1 + t^2)",
        "atan(t)/cosh(t)",
        "log(2 + sin(t))",
        "tanh(t)^3 - 2*t",
        "tan(tanh(t))",
        "cot(pi/2 - t/2)",
        "e^(t/3) + cos(3*t)",
        "t^2.5",
    ] {
        let lo = if src == "t^2.5" { 0.1 } else { -1.5 };
        check_derivatives(src, &parse_g(src).unwrap(), lo, 1.5);
    }
}

#[test]
fn builtins_agree_with_their_source_text() {
    for (name, params) in [("tan_tanh", vec![]), ("affine", vec![-0.5, 3.0]), ("cot_shift", vec![]), ("square_pos", vec![])] {
        let b = Builtin::from_name(name, &params).unwrap();
        let parsed = parse_g(&b.source()).unwrap();
        for t in [0.1, 0.4, 1.2] {
            let (x, y) = (b.derivs(t).unwrap(), parsed.derivs(t).unwrap());
            for k in 0..4 {
                assert!((x[k] - y[k]).abs() < 1e-12 * (1.0 + x[k].abs()), "{name} order {k} at {t}");
            }
        }
    }
    assert!(Builtin::from_name("affine", &[1.0]).is_err());
    assert!(Builtin::from_name("nonesuch", &[]).is_err());
}

#[test]
fn poles_are_reported_not_returned() {
    let f = parse_g("cot(t)").unwrap();
    for k in -4..=4 {
        let at = k as f64 * std::f64::consts::PI;
        let err = f.eval_jet(at).unwrap_err();
        assert_eq!(err.kind, DomainKind::Pole, "at {at}");
    }
    let g = parse_g("tan(t)").unwrap();
    assert_eq!(g.eval_jet(std::f64::consts::FRAC_PI_2).unwrap_err().kind, DomainKind::Pole);
    // nothing non-finite slips through
    for src in ["log(t)", "sqrt(t - 1)", "1/(t - 0.5)", "exp(t^3)"] {
        let f = parse_g(src).unwrap();
        for t in [0.0, 0.5, 1000.0] {
            if let Ok(j) = f.eval_jet(t) {
                assert!(j.as_array().iter().all(|x| x.is_finite()), "{src} at {t}");
            }
        }
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|n| Expr::Num(n as f64 / 8.0)),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
        (0usize..2).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |a| Expr::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Pow(b(x), b(y))),
            (0usize..Func::ALL.len(), inner).prop_map(move |(i, a)| Expr::Call(Func::ALL[i], b(a))),
        ]
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_the_identity(e in expr()) {
        let vars = ["x".to_string(), "y".to_string()];
        let text = e.display(&vars).to_string();
        let back = ScalarFn::parse(&text, &["x", "y"]).unwrap_or_else(|err| panic!("`{text}`: {err}"));
        prop_assert_eq!(back.to_tree(), e.clone(), "`{}`", text);
        // and printing is idempotent
        prop_assert_eq!(back.to_tree().display(&vars).to_string(), text);
    }
}

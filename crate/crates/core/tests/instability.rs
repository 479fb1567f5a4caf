use std::sync::Arc;

use hbern::domain::{Interval, Rect};
use hbern::error::Error;
use hbern::gexpr::{parse_g, ScalarFn, UniFn};
use hbern::hcalc::QuadratureSpec;
use hbern::instability::{
    certify_instability, hk_deformation, ratio_trend, reverse_inequality_sides, BumpFamily,
};
use hbern::surfaces::{strip_new, Branch, GraphicalStrip, Surface};
use hbern::variation::variations_numeric;

fn strip(name: &str, p: &[f64], i: (f64, f64)) -> GraphicalStrip {
    let g: Arc<dyn UniFn> = Arc::new(ScalarFn::builtin(name, p).unwrap());
    strip_new(g, Interval::new(i.0, i.1).unwrap(), Branch::X).unwrap()
}

#[test]
fn the_four_examples_are_certified() {
    let quad = QuadratureSpec::default();
    for (s, j) in [
        (strip("tan_tanh", &[], (-3.0, 3.0)), (-1.0, 1.0)),
        (strip("cot_shift", &[], (-1.5, 1.5)), (-0.5, 0.7)),
        (strip("affine", &[2.0, 0.5], (-3.0, 3.0)), (-1.0, 1.0)),
        (strip("square_pos", &[], (0.1, 4.0)), (0.5, 1.5)),
    ] {
        let c = certify_instability(&s, Some(Interval::new(j.0, j.1).unwrap()), &quad).unwrap();
        assert!(c.gap < 0.0 && c.v2 < 0.0, "{}: {c:?}", c.g);
        assert!((c.v2 - c.gap).abs() <= 1e-6 * c.gap.abs(), "{}: {} vs {}", c.g, c.v2, c.gap);
        assert_eq!((c.window, c.t0, c.delta), ([j.0, j.1], 0.5 * (j.0 + j.1), (j.1 - j.0) / 8.0));
        assert!(c.k0 >= 2);
        // the accepted k is the last dominated one with LHS < RHS in the trace
        let last = c.trace.iter().find(|s| s.k == c.k0 as f64).unwrap();
        assert!(last.dominated && last.lhs < last.rhs);
        // every smaller k tried failed
        for s in c.trace.iter().filter(|s| s.k < c.k0 as f64) {
            assert!(!(s.dominated && s.lhs < s.rhs), "{}: k = {} also works", c.g, s.k);
        }
    }
}

#[test]
fn certificate_field_has_negative_finite_difference_second_variation() {
    let quad = QuadratureSpec::default();
    let s = strip("tan_tanh", &[], (-3.0, 3.0));
    let c = certify_instability(&s, Some(Interval::new(-1.0, 1.0).unwrap()), &quad).unwrap();
    let def = hk_deformation(&s, &c).unwrap();
    let r = def.support;
    let win = Rect::new(r.u0 - 0.1, r.u1 + 0.1, r.v0 - 0.1, r.v1 + 0.1).unwrap();
    let patch = Surface::Strip(s).patch(win).unwrap();
    let (_, v2) = variations_numeric(&*patch, &def, &quad.with_rel_tol(1e-11), None).unwrap();
    assert!(v2.value < 0.0);
    assert!((v2.value - c.v2).abs() <= 1e-3 * c.v2.abs(), "{v2:?} vs {}", c.v2);
}

#[test]
fn ratio_stays_below_one_past_k0() {
    let quad = QuadratureSpec::default();
    let g: Arc<dyn UniFn> = Arc::new(parse_g("tan(tanh(t))").unwrap());
    let sides = ratio_trend(g, 0.25, &[5.0, 8.0, 32.0, 256.0], &quad).unwrap();
    for w in sides.windows(2) {
        assert!(w[1].ratio() < w[0].ratio(), "{sides:?}");
    }
    for s in &sides {
        assert!(s.ratio() < 1.0 && s.dominated, "{s:?}");
        assert!(s.error < 1e-6 * s.rhs);
    }
}

#[test]
fn inapplicable_inputs_are_refused() {
    let quad = QuadratureSpec::default();
    // G′ vanishes: no strict window
    let flat = strip_new(Arc::new(parse_g("0.5").unwrap()), Interval::real_line(), Branch::X).unwrap();
    assert!(matches!(certify_instability(&flat, None, &quad), Err(Error::Precondition(_))));
    // a window reaching past the strict one
    let sq = strip("square_pos", &[], (0.0, 4.0));
    let j = Interval::new(-1.0, 1.0).unwrap();
    assert!(matches!(certify_instability(&sq, Some(j), &quad), Err(Error::Precondition(_))));
    let g: Arc<dyn UniFn> = Arc::new(parse_g("tan(tanh(t))").unwrap());
    assert!(matches!(reverse_inequality_sides(g.clone(), 0.25, 1.0, &quad), Err(Error::Precondition(_))));
    assert!(BumpFamily::new(0.0).is_err());
    // G′ ≤ 0 somewhere in [−4δ, 4δ]
    let cubic: Arc<dyn UniFn> = Arc::new(parse_g("t^3").unwrap());
    assert!(matches!(reverse_inequality_sides(cubic, 0.25, 8.0, &quad), Err(Error::Precondition(_))));
}

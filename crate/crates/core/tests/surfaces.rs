use std::sync::Arc;

use hbern::domain::{Interval, Rect};
use hbern::gexpr::{parse_g, ScalarFn, UniFn, UniFnExt};
use hbern::hcalc::{characteristic_scan, frame_from_defining, frame_from_patch_unchecked, EPS_CHAR};
use hbern::hgroup::{frame_coefficients, rotate_z, GroupPoint};
use hbern::surfaces::{
    graph_yt_new, seed_surface, strip_defining, strip_new, strip_patch, strip_to_intrinsic, type2_xygraph,
    AnalyticSeed, Branch, GraphicalStrip, Patch, SeedCurve,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn strips() -> Vec<GraphicalStrip> {
    let b = |name: &str, p: &[f64]| -> Arc<dyn UniFn> { Arc::new(ScalarFn::builtin(name, p).unwrap()) };
    vec![
        strip_new(b("tan_tanh", &[]), Interval::new(-3.0, 3.0).unwrap(), Branch::X).unwrap(),
        strip_new(b("affine", &[2.0, -0.5]), Interval::new(-2.0, 2.0).unwrap(), Branch::X).unwrap(),
        strip_new(b("cot_shift", &[]), Interval::new(-1.3, 1.3).unwrap(), Branch::X).unwrap(),
        strip_new(b("square_pos", &[]), Interval::new(0.1, 3.0).unwrap(), Branch::X).unwrap(),
    ]
}

#[test]
fn strip_defining_and_patch_frames_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in strips() {
        let phi = strip_defining(&s);
        let (lo, hi) = (s.interval.lo, s.interval.hi);
        let patch = strip_patch(&s, (-3.0, 3.0), (lo + 1e-3, hi - 1e-3)).unwrap();
        for _ in 0..1000 {
            let (y, t) = (rng.gen_range(-3.0..3.0), rng.gen_range(lo + 1e-3..hi - 1e-3));
            let a = frame_from_patch_unchecked(&patch, y, t).unwrap();
            let b = frame_from_defining(&phi, patch.point(y, t).unwrap()).unwrap();
            for (u, v) in [(a.pbar, b.pbar), (a.qbar, b.qbar), (a.obar, b.obar)] {
                assert!((u - v).abs() < 1e-10 * (1.0 + u.abs()), "{}: {u} vs {v} at ({y}, {t})", s.g.describe());
            }
        }
    }
}

#[test]
fn intrinsic_view_lands_on_the_strip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for s in strips() {
        let ig = strip_to_intrinsic(&s).unwrap();
        let (lo, hi) = (s.interval.lo, s.interval.hi);
        for _ in 0..300 {
            let (y, t) = (rng.gen_range(-3.0..3.0), rng.gen_range(lo + 1e-2..hi - 1e-2));
            let g = s.g.value(t).unwrap();
            // Φ(y, t) = (y, t + ½y²G(t))
            let (u, v) = (y, t + 0.5 * y * y * g);
            let p = ig.point(u, v).unwrap();
            assert!((p.x - p.y * s.g.value(p.t).unwrap()).abs() < 1e-9, "off the strip at ({u}, {v})");
            assert!((p.y - y).abs() < 1e-12 && (p.t - t).abs() < 1e-9 * (1.0 + t.abs()), "{p:?} vs ({y}, {t})");
        }
    }
}

proptest! {
    #[test]
    fn phi_is_injective_on_strict_strips(y1 in -3.0f64..3.0, t1 in -2.9f64..2.9, y2 in -3.0f64..3.0, t2 in -2.9f64..2.9) {
        prop_assume!((y1, t1) != (y2, t2));
        let g = ScalarFn::builtin("tan_tanh", &[]).unwrap();
        let phi = |y: f64, t: f64| (y, t + 0.5 * y * y * UniFnExt::value(&g, t).unwrap());
        prop_assert_ne!(phi(y1, t1), phi(y2, t2));
    }
}

#[test]
fn y_form_is_the_rotated_x_form() {
    let s = strips().remove(0);
    let y = GraphicalStrip { branch: Branch::Y, ..s.clone() };
    let (px, py) = (strip_patch(&s, (-1.0, 1.0), (-1.0, 1.0)).unwrap(), strip_patch(&y, (-1.0, 1.0), (-1.0, 1.0)).unwrap());
    for (a, t) in [(0.7, 0.3), (-0.4, -0.9)] {
        let r = rotate_z(std::f64::consts::FRAC_PI_2, px.point(-a, t).unwrap());
        let b = py.point(a, t).unwrap();
        assert!((r.x - b.x).abs() < 1e-15 && (r.y - b.y).abs() < 1e-15 && r.t == b.t, "{r:?} vs {b:?}");
    }
}

#[test]
fn seed_rules_are_horizontal() {
    let h0: Arc<dyn UniFn> = Arc::new(parse_g("0.3*sin(t) + t^2/5").unwrap());
    let seeds = [
        AnalyticSeed::circle([0.5, -0.2], 1.3, h0.clone(), Interval::real_line()).unwrap(),
        AnalyticSeed::line([0.1, 0.4], [0.6, 0.8], h0, Interval::real_line()).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in seeds {
        let seed = Arc::new(seed);
        let patch = seed_surface(seed.clone(), (-2.0, 2.0), (-3.0, 3.0)).unwrap();
        for _ in 0..200 {
            let (s, r) = (rng.gen_range(-2.0..2.0), rng.gen_range(-3.0..3.0));
            let d = patch.first(s, r).unwrap();
            let g = GroupPoint::new(d[0].v, d[1].v, d[2].v);
            let fv = frame_coefficients(g, [d[0].g[1], d[1].g[1], d[2].g[1]]);
            let tan = seed.jets(s).unwrap().tangent();
            assert!(fv.k.abs() < 1e-10, "T component {}", fv.k);
            assert!((fv.a - tan[1]).abs() < 1e-12 && (fv.b + tan[0]).abs() < 1e-12);
        }
    }
}

#[test]
fn type2_graphs_have_characteristic_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for h0 in ["0", "s^2/3", "sin(s)"] {
        let h0 = ScalarFn::parse(h0, &["s"]).unwrap();
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let g0 = GroupPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = type2_xygraph(ang.cos(), ang.sin(), g0, &h0).unwrap();
        let patch = s.patch(Rect::new(g0.x - 2.0, g0.x + 2.0, g0.y - 2.0, g0.y + 2.0).unwrap()).unwrap();
        let sigma = characteristic_scan(&*patch, 41, EPS_CHAR).unwrap();
        assert!(!sigma.is_empty());
        for c in &sigma {
            assert!(c.w < 1e-8, "{c:?}");
        }
    }
    // t = xy/2: Σ is the x-axis
    let s = type2_xygraph(1.0, 0.0, GroupPoint::IDENTITY, &ScalarFn::parse("0", &["s"]).unwrap()).unwrap();
    let patch = s.patch(Rect::square(-2.0, 2.0).unwrap()).unwrap();
    for c in characteristic_scan(&*patch, 41, EPS_CHAR).unwrap() {
        assert!(c.point.y.abs() < 1e-8);
    }
}

#[test]
fn yt_graph_of_a_strip_is_the_strip() {
    let s = strips().remove(0);
    let g = graph_yt_new(ScalarFn::parse("y*tan(tanh(t))", &["y", "t"]).unwrap()).unwrap();
    let a = g.patch(Rect::square(-1.0, 1.0).unwrap()).unwrap();
    let b = strip_patch(&s, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
    for (y, t) in [(0.3, -0.2), (-0.9, 0.8)] {
        assert_eq!(a.point(y, t).unwrap(), b.point(y, t).unwrap());
    }
}

use std::sync::Arc;

use hbern::domain::{Interval, Rect};
use hbern::gexpr::{ScalarFn, UniFn, UniFnExt};
use hbern::hcalc::quad::{integrate, integrate_real_line};
use hbern::hcalc::{
    bar_jets, h_perimeter, hmean, hmean_defining, hmean_intrinsic, hmean_patch, zyt_derivatives, At, QuadratureSpec,
};
use hbern::hgroup::GroupPoint;
use hbern::surfaces::{
    circle_cylinder, graph_xy_new, graph_yt_new, strip_defining, strip_new, strip_patch, strip_to_intrinsic, Branch, LinearImage,
    SmoothPatch, Surface,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn builtin(name: &str, p: &[f64]) -> Arc<dyn UniFn> {
    Arc::new(ScalarFn::builtin(name, p).unwrap())
}

#[test]
fn three_curvature_routes_agree_on_strict_strips() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (g, i) in [
        (builtin("tan_tanh", &[]), (-3.0, 3.0)),
        (builtin("affine", &[1.5, 0.5]), (-2.0, 2.0)),
        (builtin("cot_shift", &[]), (-1.3, 1.3)),
        (builtin("square_pos", &[]), (0.2, 2.0)),
    ] {
        let s = strip_new(g, Interval::new(i.0, i.1).unwrap(), Branch::X).unwrap();
        assert!(s.is_strict());
        let phi = strip_defining(&s);
        let ig = strip_to_intrinsic(&s).unwrap();
        let surf = Surface::Strip(s.clone());
        let patch = strip_patch(&s, (-2.0, 2.0), (i.0 + 0.05, i.1 - 0.05)).unwrap();
        for _ in 0..200 {
            let (y, t) = (rng.gen_range(-2.0..2.0), rng.gen_range(i.0 + 0.05..i.1 - 0.05));
            let x = y * s.g.value(t).unwrap();
            let g = GroupPoint::new(x, y, t);
            let a = hmean_defining(&phi, g).unwrap();
            let b = hmean_intrinsic(&ig, y, t + 0.5 * y * x).unwrap();
            let c = hmean(&surf, At::Ambient(g)).unwrap();
            let d = hmean_patch(&patch, y, t).unwrap();
            for h in [a, b, c, d] {
                assert!(h.abs() < 1e-8, "{}: {a} {b} {c} {d} at ({y}, {t})", s.g.describe());
            }
            assert!((a - b).abs() < 1e-7);
        }
    }
}

/// Non-minimal test surfaces with their defining functions.
fn bumpy_surfaces() -> Vec<(Surface, Rect)> {
    vec![
        (graph_xy_new(ScalarFn::parse("x^2 + y^2/3 + sin(x*y)", &["x", "y"]).unwrap(), None).unwrap(), Rect::square(-1.5, 1.5).unwrap()),
        (circle_cylinder([0.3, -0.1], 1.7).unwrap(), Rect::new(0.0, 6.0, -2.0, 2.0).unwrap()),
        (graph_yt_new(ScalarFn::parse("y^2 + t*cos(y)", &["y", "t"]).unwrap()).unwrap(), Rect::square(-1.5, 1.5).unwrap()),
    ]
}

#[test]
fn mean_curvature_identity_and_tangential_gradient() {
    let zeta = ScalarFn::parse("sin(x) + y*t - x^2*t/3", &["x", "y", "t"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (s, win) in bumpy_surfaces() {
        let phi = s.defining().unwrap();
        let patch = s.patch(win).unwrap();
        let mut checked = 0;
        for _ in 0..300 {
            let (u, v) = (rng.gen_range(win.u0..win.u1), rng.gen_range(win.v0..win.v1));
            let g = patch.point(u, v).unwrap();
            let Ok(bj) = bar_jets(&phi, g) else { continue };
            if bj.frame.w < 1e-3 {
                continue;
            }
            checked += 1;
            let h = bj.hmean();
            let via_z = bj.frame.qbar * bj.z(&bj.pbar) - bj.frame.pbar * bj.z(&bj.qbar);
            assert!((h - via_z).abs() < 1e-8 * (1.0 + h.abs()), "{}: {h} vs {via_z}", s.describe());
            // Y, Z orthonormal: (Zζ)² + (Yζ)² = |∇^H ζ|²
            let zyt = zyt_derivatives(&phi, g, &zeta).unwrap();
            let gr = hbern::gexpr::Field::<3>::jet(&zeta, g.to_array()).unwrap().g;
            let (x1, x2) = (gr[0] - 0.5 * g.y * gr[2], gr[1] + 0.5 * g.x * gr[2]);
            let lhs = zyt.z * zyt.z + zyt.y * zyt.y;
            assert!((lhs - (x1 * x1 + x2 * x2)).abs() < 1e-12 * (1.0 + lhs));
            // the patch route agrees
            let hp = hmean_patch(&*patch, u, v).unwrap();
            assert!((hp - h).abs() < 1e-7 * (1.0 + h.abs()), "{}: {hp} vs {h}", s.describe());
        }
        assert!(checked > 200);
    }
}

#[test]
fn real_line_integrals_match_closed_form() {
    let spec = QuadratureSpec::default();
    for a in [0.1, 1.0, 10.0] {
        let (v, err) = integrate_real_line(|y| Ok(1.0 / (2.0 + a * y * y).powi(2)), &spec).unwrap();
        let want = std::f64::consts::SQRT_2 * std::f64::consts::PI / (8.0 * a.sqrt());
        assert!((v - want).abs() < 1e-8, "a = {a}: {v} vs {want}");
        // the error estimate covers a tighter rerun
        let (v2, _) = integrate_real_line(|y| Ok(1.0 / (2.0 + a * y * y).powi(2)), &spec.with_rel_tol(1e-13)).unwrap();
        assert!((v - v2).abs() <= err.max(1e-15), "{v} vs {v2}, err {err}");
    }
}

#[test]
fn perimeter_error_estimate_covers_a_tighter_rerun() {
    for (s, win) in bumpy_surfaces() {
        let patch = s.patch(win).unwrap();
        let coarse = h_perimeter(&*patch, &QuadratureSpec::default().with_rel_tol(1e-8)).unwrap();
        let fine = h_perimeter(&*patch, &QuadratureSpec::default().with_rel_tol(1e-12)).unwrap();
        assert!((coarse.value[0] - fine.value[0]).abs() <= coarse.error[0], "{}: {coarse:?} vs {fine:?}", s.describe());
    }
    let (v, e) = integrate(|x| Ok(x.sin().powi(2)), 0.0, std::f64::consts::PI, &QuadratureSpec::default()).unwrap();
    assert!((v - std::f64::consts::FRAC_PI_2).abs() <= e.max(1e-15));
}

#[test]
fn perimeter_scales_with_the_cube_of_dilations() {
    let spec = QuadratureSpec::default();
    for (s, win) in bumpy_surfaces() {
        let base = s.patch(win).unwrap();
        let p0 = h_perimeter(&*base, &spec).unwrap().value[0];
        for lam in [0.5, 2.0, 3.7] {
            let img: Arc<dyn SmoothPatch> = Arc::new(LinearImage::dilation(lam, base.clone()).unwrap());
            let p = h_perimeter(&*img, &spec).unwrap().value[0];
            assert!((p - lam.powi(3) * p0).abs() < 1e-9 * p.abs(), "{}: λ = {lam}", s.describe());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn left_translations_and_rotations_preserve_curvature(
        g0 in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        th in -3.0f64..3.0,
        uv in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let s = graph_xy_new(ScalarFn::parse("x^2 + y^2/3 + sin(x*y)", &["x", "y"]).unwrap(), None).unwrap();
        let base = s.patch(Rect::square(-1.5, 1.5).unwrap()).unwrap();
        let h = hmean_patch(&*base, uv.0, uv.1).unwrap();
        let moved = LinearImage::left_translation(GroupPoint::new(g0.0, g0.1, g0.2), base.clone());
        let turned = LinearImage::rotation(th, base);
        for hm in [hmean_patch(&moved, uv.0, uv.1).unwrap(), hmean_patch(&turned, uv.0, uv.1).unwrap()] {
            prop_assert!((hm - h).abs() < 1e-9 * (1.0 + h.abs()), "{} vs {}", hm, h);
        }
    }
}

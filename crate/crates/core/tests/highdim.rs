use hbern::error::{Error, ErrorClass};
use hbern::gexpr::ScalarFn;
use hbern::highdim::{
    coord_names, cylinder_frame, cylinder_hmean, cylinder_perimeter_check, negative_example_nu, planar_divergence,
    projection_mean_curvature, CylinderPatch, CylinderSurface, GraphCylinder, TensorRule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(n: usize, r: f64) -> CylinderSurface {
    let names = coord_names(n);
    let src = names.iter().map(|v| format!("{v}^2")).collect::<Vec<_>>().join(" + ") + &format!(" - {}", r * r);
    CylinderSurface::parse(n, &src, vec![(-2.0, 2.0); 2 * n], 1e-3).unwrap()
}

/// `|x|² − |y|²`: the cone over a product of equal spheres, minimal away from 0.
fn cone(n: usize) -> CylinderSurface {
    let names = coord_names(n);
    let (xs, ys) = names.split_at(n);
    let sq = |v: &[String]| v.iter().map(|s| format!("{s}^2")).collect::<Vec<_>>().join(" + ");
    let src = format!("{} - ({})", sq(xs), sq(ys));
    CylinderSurface::parse(n, &src, vec![(0.3, 1.5); 2 * n], 1e-3).unwrap()
}

/// Divergence of `∇𝔥/|∇𝔥|` by central differences of an analytic gradient.
fn fd_divergence(grad: impl Fn(&[f64]) -> Vec<f64>, z: &[f64]) -> f64 {
    let unit = |p: &[f64]| {
        let g = grad(p);
        let w = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        g.into_iter().map(|x| x / w).collect::<Vec<_>>()
    };
    let h = 1e-4;
    (0..z.len())
        .map(|k| {
            let mut a = z.to_vec();
            let mut b = z.to_vec();
            a[k] += h;
            b[k] -= h;
            (unit(&a)[k] - unit(&b)[k]) / (2.0 * h)
        })
        .sum()
}

#[test]
fn sphere_cylinders_have_constant_curvature() {
    for n in 1..=3 {
        let r = 1.3;
        let c = sphere(n, r);
        let pts = c.surface_samples(if n == 3 { 3 } else { 5 }).unwrap();
        assert!(pts.len() > 20, "n = {n}: {} samples", pts.len());
        let want = (2 * n - 1) as f64 / r;
        for z in &pts {
            let h = cylinder_hmean(&c, z).unwrap();
            assert!((h - want).abs() < 1e-8, "n = {n}: {h} vs {want}");
            assert!((projection_mean_curvature(&c, z).unwrap() - 1.0 / r).abs() < 1e-8);
        }
        assert!((c.min_gradient(&pts).unwrap() - 2.0 * r).abs() < 1e-8);
    }
}

#[test]
fn sphere_normal_is_twice_the_position() {
    let c = sphere(2, 1.0);
    let z = [0.5, -0.5, 0.5, 0.5];
    let f = cylinder_frame(&c, &z).unwrap();
    for (a, b) in f.horizontal.iter().zip(z) {
        assert!((a - 2.0 * b).abs() < 1e-15);
    }
    assert_eq!(f.t_component, 0.0);
    assert!((f.w - 2.0).abs() < 1e-15);
}

#[test]
fn vertical_hyperplane_has_a_constant_normal() {
    for n in [1, 2, 4] {
        let names = coord_names(n);
        let c = CylinderSurface::parse(n, &names[0], vec![(-1.0, 1.0); 2 * n], 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..20 {
            let z: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = cylinder_frame(&c, &z).unwrap();
            let mut e = vec![0.0; 2 * n];
            e[0] = 1.0;
            assert_eq!(f.horizontal, e);
            assert_eq!(f.t_component, 0.0);
            assert_eq!(cylinder_hmean(&c, &z).unwrap(), 0.0);
        }
    }
}

#[test]
fn product_cones_are_minimal() {
    for n in 2..=3 {
        let c = cone(n);
        let pts = c.surface_samples(3).unwrap();
        assert!(pts.len() > 20);
        for z in &pts {
            let h = cylinder_hmean(&c, z).unwrap();
            assert!(h.abs() < 1e-7, "n = {n}: ℋ = {h} at {z:?}");
            let oracle = fd_divergence(
                |p| p.iter().enumerate().map(|(i, v)| if i < n { 2.0 * v } else { -2.0 * v }).collect(),
                z,
            );
            assert!(oracle.abs() < 1e-6, "{oracle}");
        }
    }
}

#[test]
fn frame_route_matches_a_difference_oracle_off_minimal_surfaces() {
    let c = CylinderSurface::parse(2, "x1^3 + x2*y1 - y2^2 + sin(x1*y2)", vec![(-1.0, 1.0); 4], 1e-6).unwrap();
    let grad = |p: &[f64]| {
        let (x1, x2, y1, y2) = (p[0], p[1], p[2], p[3]);
        vec![3.0 * x1 * x1 + y2 * (x1 * y2).cos(), y1, x2, -2.0 * y2 + x1 * (x1 * y2).cos()]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.9..0.9)).collect();
        let Ok(h) = cylinder_hmean(&c, &z) else { continue };
        let o = fd_divergence(grad, &z);
        assert!((h - o).abs() < 1e-5 * (1.0 + o.abs()), "{h} vs {o}");
    }
}

#[test]
fn floor_and_window_violations() {
    let c = sphere(2, 1.0);
    let e = cylinder_hmean(&c, &[0.0; 4]).unwrap_err();
    assert_eq!(e.class(), ErrorClass::NotApplicable);
    assert!(matches!(cylinder_frame(&c, &[3.0, 0.0, 0.0, 0.0]), Err(Error::OutsideDomain(_))));
    assert!(matches!(CylinderSurface::parse(0, "x", vec![], 1.0), Err(Error::Invalid(_))));
    assert!(matches!(CylinderSurface::parse(9, "x1", vec![(0.0, 1.0); 18], 1.0), Err(Error::Invalid(_))));
    assert!(matches!(CylinderSurface::parse(2, "x + y", vec![(0.0, 1.0); 4], 1.0), Err(Error::Parse(_))));
}

#[test]
fn flat_plane_window_has_unit_measure() {
    let c = CylinderSurface::parse(1, "x", vec![(-1.0, 1.0), (-1.0, 2.0)], 0.5).unwrap();
    let g = ScalarFn::parse("0", &["y"]).unwrap();
    let patch = CylinderPatch::new(1, 0, g, vec![(0.0, 1.0)], (0.0, 1.0)).unwrap();
    let r = cylinder_perimeter_check(&c, &patch, &TensorRule::default()).unwrap();
    assert!((r.sigma_h - 1.0).abs() < 1e-14 && (r.hausdorff - 1.0).abs() < 1e-14, "{r:?}");
}

#[test]
fn circle_arc_window_measures_arclength_times_height() {
    let rad = 1.5;
    let c = sphere(1, rad);
    let a = 0.9;
    let g = ScalarFn::parse(&format!("sqrt({} - x^2)", rad * rad), &["x"]).unwrap();
    let (t0, t1) = (-0.4, 1.1);
    let patch = CylinderPatch::new(1, 1, g, vec![(-a, a)], (t0, t1)).unwrap();
    let r = cylinder_perimeter_check(&c, &patch, &TensorRule { nodes: 20, panels: 4 }).unwrap();
    let want = 2.0 * rad * (a / rad).asin() * (t1 - t0);
    assert!((r.sigma_h - want).abs() < 1e-12 * want, "{} vs {want}", r.sigma_h);
    assert!(r.rel_diff < 1e-12);
    assert!(r.error < 1e-6);
}

#[test]
fn perimeter_equals_hausdorff_measure_on_random_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, nodes) in [(1, 12), (2, 6), (3, 4), (4, 3)] {
        let rad = 2.0;
        let c = CylinderSurface::new(n, sphere(n, rad).h, vec![(-3.0, 3.0); 2 * n], 1e-3).unwrap();
        let names = coord_names(n);
        let others: Vec<&str> = names[..2 * n - 1].iter().map(String::as_str).collect();
        let sum = others.iter().map(|v| format!("{v}^2")).collect::<Vec<_>>().join(" + ");
        let g = ScalarFn::parse(&format!("sqrt(4 - ({sum}))"), &others).unwrap();
        for _ in 0..3 {
            let params: Vec<(f64, f64)> = (0..2 * n - 1)
                .map(|_| {
                    let lo = rng.gen_range(-0.6..0.2);
                    (lo, lo + rng.gen_range(0.1..0.4))
                })
                .collect();
            let t0 = rng.gen_range(-1.0..1.0);
            let patch = CylinderPatch::new(n, 2 * n - 1, g.clone(), params, (t0, t0 + 0.5)).unwrap();
            let r = cylinder_perimeter_check(&c, &patch, &TensorRule { nodes, panels: 1 }).unwrap();
            assert!(r.rel_diff < 1e-9, "n = {n}: {r:?}");
            assert!(r.max_residual < 1e-12);
        }
    }
}

#[test]
fn patch_off_the_cylinder_is_refused() {
    let c = sphere(1, 1.0);
    let g = ScalarFn::parse("x", &["x"]).unwrap();
    let patch = CylinderPatch::new(1, 1, g, vec![(0.1, 0.5)], (0.0, 1.0)).unwrap();
    assert!(matches!(cylinder_perimeter_check(&c, &patch, &TensorRule::default()), Err(Error::Invalid(_))));
}

#[test]
fn affine_graph_gives_a_constant_divergence_free_field() {
    let g = GraphCylinder::parse(2, "0.5*x1 - 2*x2 + 0.25*y1 + 3").unwrap();
    let s = (1.0f64 + 0.25 + 4.0 + 0.0625).sqrt();
    for z in [[0.0, 0.0, 0.0, 0.0], [1.0, -2.0, 0.5, 7.0]] {
        let v = negative_example_nu(&g, &z).unwrap();
        let want = [-0.5 / s, 2.0 / s, -0.25 / s, 1.0 / s];
        for (a, b) in v.nu.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(v.div_h, 0.0);
        assert_eq!(v.t_derivative, 0.0);
    }
}

#[test]
fn minimal_graph_fields_are_divergence_free() {
    // Scherk's surface times a line, and a graph piece of the product cone.
    let cases = [
        (2, "log(cos(y1)) - log(cos(x1))", [(-1.2, 1.2), (-2.0, 2.0), (-1.2, 1.2)]),
        (2, "sqrt(x1^2 + x2^2 - y1^2)", [(0.6, 1.5), (0.6, 1.5), (-0.5, 0.5)]),
    ];
    for (n, src, b) in cases {
        let g = GraphCylinder::parse(n, src).unwrap();
        let k = 9;
        for i in 0..k * k * k {
            let w: Vec<f64> = [i % k, (i / k) % k, i / (k * k)]
                .iter()
                .zip(b)
                .map(|(&j, (lo, hi))| lo + (hi - lo) * j as f64 / (k - 1) as f64)
                .collect();
            let z = [w[0], w[1], w[2], 0.0];
            let v = negative_example_nu(&g, &z).unwrap();
            assert!((v.norm - 1.0).abs() < 1e-14);
            assert_eq!(v.t_derivative, 0.0);
            assert!(v.div_h.abs() < 1e-7, "{src}: {} at {z:?}", v.div_h);
        }
    }
}

#[test]
fn graph_field_divergence_is_the_cylinder_curvature() {
    let g = GraphCylinder::parse(2, "x1^2 + sin(x2*y1)").unwrap();
    let c = g.to_cylinder(vec![(-1.0, 1.0); 4], 1e-6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let mut z: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let yn = c.h.value(&[z[0], z[1], z[2], 0.0]).unwrap();
        z.push(-yn);
        if !c.contains(&z) {
            continue;
        }
        let v = negative_example_nu(&g, &z).unwrap();
        let h = cylinder_hmean(&c, &z).unwrap();
        assert!((v.div_h - h).abs() < 1e-12 * (1.0 + h.abs()), "{} vs {h}", v.div_h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_route_equals_planar_divergence(
        n in 1usize..=4,
        coef in prop::collection::vec(-1.0f64..1.0, 8),
        pt in prop::collection::vec(-0.9f64..0.9, 8),
    ) {
        let names = coord_names(n);
        let lin: Vec<String> = names.iter().zip(&coef).map(|(v, c)| format!("{c}*{v}")).collect();
        let src = format!("{} + {}^2*{} + exp({}*{})", lin.join(" + "), names[0], names[2 * n - 1], coef[0], names[n]);
        let c = CylinderSurface::parse(n, &src, vec![(-1.0, 1.0); 2 * n], 1e-3).unwrap();
        let z = &pt[..2 * n];
        if let (Ok(a), Ok(b)) = (cylinder_hmean(&c, z), planar_divergence(&c, z)) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn sphere_curvature_at_random_points(n in 1usize..=3, dir in prop::collection::vec(-1.0f64..1.0, 6), r in 0.3f64..1.9) {
        let d = &dir[..2 * n];
        let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(len > 1e-3);
        let z: Vec<f64> = d.iter().map(|x| r * x / len).collect();
        let c = sphere(n, r);
        let h = cylinder_hmean(&c, &z).unwrap();
        prop_assert!((h - (2 * n - 1) as f64 / r).abs() < 1e-8);
        let f = cylinder_frame(&c, &z).unwrap();
        prop_assert_eq!(f.t_component, 0.0);
        prop_assert!((f.w - 2.0 * r).abs() < 1e-12);
    }
}

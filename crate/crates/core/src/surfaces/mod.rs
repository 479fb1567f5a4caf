//! Surface representations and their parametric and implicit views.
//!
//! Orientation is fixed per representation: strips use `∇(x − yG(t))`
//! (Y-form `∇(y + xG(t))`), `(x,y)`-graphs `∇(t − f)`, `(y,t)`-graphs
//! `∇(x − ψ)`, and parametric patches `θ_u ∧ θ_v` in the stated `(u,v)` order.

mod defining;
mod intrinsic;
mod patch;
mod seed;
mod strip;

use std::sync::Arc;

pub use defining::{
    CircleDefining, DefiningFn, GraphXyDefining, GraphYtDefining, PlaneDefining, StripDefining,
};
pub use intrinsic::{strip_to_intrinsic, IntrinsicGraph, OmegaScan};
pub use patch::{
    field2, CirclePatch, GraphXyPatch, GraphYtPatch, IntrinsicPatch, LinearImage, Patch, SmoothPatch,
    StripPatch, VerticalPlanePatch,
};
pub use seed::{
    seed_point, seed_surface, unit_speed_defect, AnalyticSeed, SeedCurve, SeedJets, SeedPatch,
    TranslatedSeed,
};
pub use strip::{strip_defining, strip_new, strip_patch, Branch, GraphicalStrip, EPS_STRICT};

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::gexpr::{Expr, Field, ScalarFn};
use crate::hgroup::GroupPoint;

/// `t = f(x, y)` over an optional domain.
#[derive(Clone, Debug)]
pub struct GraphXy {
    pub f: ScalarFn,
    pub omega: Option<Rect>,
}

/// `x = ψ(y, t)`.
#[derive(Clone, Debug)]
pub struct GraphYt {
    pub psi: ScalarFn,
}

/// The vertical plane `ax + by = γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerticalPlane {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

/// The vertical cylinder over a circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleCylinder {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub enum Surface {
    Strip(GraphicalStrip),
    GraphXy(GraphXy),
    GraphYt(GraphYt),
    Intrinsic(Arc<IntrinsicGraph>),
    Seed(Arc<dyn SeedCurve>),
    VerticalPlane(VerticalPlane),
    Cylinder(CircleCylinder),
}

impl Surface {
    /// Ambient defining function, where the representation has one.
    pub fn defining(&self) -> Option<DefiningFn> {
        match self {
            Surface::Strip(s) => Some(strip_defining(s)),
            Surface::GraphXy(g) => {
                Some(DefiningFn::new(Arc::new(GraphXyDefining { f: Arc::new(g.f.clone()) }), None))
            }
            Surface::GraphYt(g) => {
                Some(DefiningFn::new(Arc::new(GraphYtDefining { psi: Arc::new(g.psi.clone()) }), None))
            }
            Surface::VerticalPlane(p) => {
                let n = p.a.hypot(p.b);
                let phi = PlaneDefining { a: p.a / n, b: p.b / n, c: 0.0, gamma: p.gamma / n };
                Some(DefiningFn::new(Arc::new(phi), Some(1.0)))
            }
            Surface::Cylinder(c) => Some(DefiningFn::new(
                Arc::new(CircleDefining { center: c.center, radius: c.radius }),
                Some(1.0),
            )),
            Surface::Intrinsic(_) | Surface::Seed(_) => None,
        }
    }

    /// Parametric patch over `window`, in the representation's natural parameters.
    pub fn patch(&self, window: Rect) -> Result<Arc<dyn SmoothPatch>> {
        Ok(match self {
            Surface::Strip(s) => Arc::new(strip_patch(s, (window.u0, window.u1), (window.v0, window.v1))?),
            Surface::GraphXy(g) => {
                if let Some(o) = g.omega {
                    if !o.contains_rect(&window) {
                        return Err(Error::OutsideDomain("window leaves the graph domain".into()));
                    }
                }
                Arc::new(GraphXyPatch { f: Arc::new(g.f.clone()), domain: window })
            }
            Surface::GraphYt(g) => Arc::new(GraphYtPatch { psi: Arc::new(g.psi.clone()), domain: window }),
            Surface::Intrinsic(i) => Arc::new(IntrinsicPatch { graph: i.clone(), domain: window }),
            Surface::Seed(s) => {
                Arc::new(seed_surface(s.clone(), (window.u0, window.u1), (window.v0, window.v1))?)
            }
            Surface::VerticalPlane(p) => {
                Arc::new(VerticalPlanePatch { a: p.a, b: p.b, gamma: p.gamma, domain: window })
            }
            Surface::Cylinder(c) => Arc::new(CirclePatch { center: c.center, radius: c.radius, domain: window }),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Surface::Strip(s) => match s.branch {
                Branch::X => format!("x = y*G(t), G = {}", s.g.describe()),
                Branch::Y => format!("y = -x*G(t), G = {}", s.g.describe()),
            },
            Surface::GraphXy(g) => format!("t = {}", g.f),
            Surface::GraphYt(g) => format!("x = {}", g.psi),
            Surface::Intrinsic(_) => "intrinsic X1-graph".into(),
            Surface::Seed(_) => "seed surface".into(),
            Surface::VerticalPlane(p) => format!("{}*x + {}*y = {}", p.a, p.b, p.gamma),
            Surface::Cylinder(c) => format!("circle cylinder, center {:?}, radius {}", c.center, c.radius),
        }
    }
}

fn check_arity(f: &ScalarFn, want: usize) -> Result<()> {
    if f.arity() != want {
        return Err(Error::invalid(format!("`{f}` takes {} variables, expected {want}", f.arity())));
    }
    Ok(())
}

pub fn graph_xy_new(f: ScalarFn, omega: Option<Rect>) -> Result<Surface> {
    check_arity(&f, 2)?;
    Ok(Surface::GraphXy(GraphXy { f, omega }))
}

pub fn graph_yt_new(psi: ScalarFn) -> Result<Surface> {
    check_arity(&psi, 2)?;
    Ok(Surface::GraphYt(GraphYt { psi }))
}

pub fn vertical_plane(a: f64, b: f64, gamma: f64) -> Result<Surface> {
    if !(a * a + b * b > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("vertical plane needs (a, b) ≠ 0"));
    }
    Ok(Surface::VerticalPlane(VerticalPlane { a, b, gamma }))
}

pub fn circle_cylinder(center: [f64; 2], radius: f64) -> Result<Surface> {
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(Surface::Cylinder(CircleCylinder { center, radius }))
}

impl VerticalPlane {
    /// `φ(u, v) = −(b/a)u + γ/a` for `a ≠ 0`.
    pub fn intrinsic(&self) -> Result<IntrinsicGraph> {
        if self.a == 0.0 {
            return Err(Error::invalid("the plane y = const is not an intrinsic X1-graph"));
        }
        let tree = Expr::Add(
            Box::new(Expr::Mul(Box::new(Expr::num(-self.b / self.a)), Box::new(Expr::Var(0)))),
            Box::new(Expr::num(self.gamma / self.a)),
        );
        let phi: Arc<dyn Field<2>> = Arc::new(ScalarFn::from_expr(tree, &["u", "v"]));
        Ok(IntrinsicGraph::from_field(phi))
    }
}

/// The entire H-minimal graph
/// `t = t₀ − ½ab(X² − Y²) − ½(b² − a²)XY + h₀(aX + bY) + ½(x₀Y − Xy₀)`,
/// `X = x − x₀`, `Y = y − y₀`, the left translation by `g₀` of the graph with `g₀ = e`.
pub fn type2_xygraph(a: f64, b: f64, g0: GroupPoint, h0: &ScalarFn) -> Result<Surface> {
    if (a * a + b * b - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("(a, b) = ({a}, {b}) is not a unit vector")));
    }
    check_arity(h0, 1)?;
    let n = |c: f64| Box::new(Expr::num(c));
    let bx = |e: Expr| Box::new(e);
    let xx = Expr::Sub(bx(Expr::Var(0)), n(g0.x));
    let yy = Expr::Sub(bx(Expr::Var(1)), n(g0.y));
    let sq = |e: &Expr| Expr::Mul(bx(e.clone()), bx(e.clone()));
    let lin = Expr::Add(bx(Expr::Mul(n(a), bx(xx.clone()))), bx(Expr::Mul(n(b), bx(yy.clone()))));
    let terms = [
        Expr::num(g0.t),
        Expr::Mul(n(-0.5 * a * b), bx(Expr::Sub(bx(sq(&xx)), bx(sq(&yy))))),
        Expr::Mul(n(-0.5 * (b * b - a * a)), bx(Expr::Mul(bx(xx.clone()), bx(yy.clone())))),
        h0.to_tree().substitute(&[lin]),
        Expr::Mul(n(0.5 * g0.x), bx(yy)),
        Expr::Mul(n(-0.5 * g0.y), bx(xx)),
    ];
    let mut it = terms.into_iter();
    let first = it.next().expect("nonempty");
    let tree = it.fold(first, |acc, t| Expr::Add(bx(acc), bx(t)));
    graph_xy_new(ScalarFn::from_expr(tree, &["x", "y"]), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use crate::gexpr::{parse_g, FieldExt, UniFn};

    fn strip(src: &str, lo: f64, hi: f64) -> Result<GraphicalStrip> {
        strip_new(Arc::new(parse_g(src).unwrap()), Interval::new(lo, hi).unwrap(), Branch::X)
    }

    #[test]
    fn strip_scan_examples() {
        let s = strip("tan(tanh(t))", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let j = s.strict_window.unwrap();
        assert_eq!((j.lo, j.hi), (-8.0, 8.0));
        let c = strip("0*t + 0.7", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!(c.strict_window.is_none());
        assert!(matches!(strip("-t", -1.0, 1.0), Err(Error::NotAStrip(_))));
    }

    #[test]
    fn strict_window_endpoints_are_refined() {
        // G′ = 3t² on t > 0, zero for t ≤ 0 (flat then cubic): strict run starts at ~0
        let s = strip("(t + sqrt(t^2 + 1e-30))^3/8", -1.0, 1.0).unwrap();
        let j = s.strict_window.unwrap();
        assert!(j.lo.abs() < 1e-5, "{j:?}");
        assert_eq!(j.hi, 1.0);
    }

    #[test]
    fn strip_patch_examples() {
        let s = strip_new(Arc::new(ScalarFn::builtin("affine", &[1.0, 0.0]).unwrap()), Interval::real_line(), Branch::X)
            .unwrap();
        let p = strip_patch(&s, (-5.0, 5.0), (-5.0, 5.0)).unwrap();
        assert_eq!(p.point(2.0, 3.0).unwrap(), GroupPoint::new(6.0, 2.0, 3.0));
        let y = GraphicalStrip { branch: Branch::Y, ..s.clone() };
        let p = strip_patch(&y, (-5.0, 5.0), (-5.0, 5.0)).unwrap();
        assert_eq!(p.point(2.0, 3.0).unwrap(), GroupPoint::new(2.0, -6.0, 3.0));
        let h = strip("cot(pi/2 - t)", -1.5707963267948966, 1.5707963267948966).unwrap();
        assert!(strip_patch(&h, (0.0, 1.0), (0.0, 2.0)).is_err());
    }

    #[test]
    fn type2_examples() {
        let zero = parse_g("0").unwrap();
        let Surface::GraphXy(g) = type2_xygraph(1.0, 0.0, GroupPoint::IDENTITY, &zero).unwrap() else { panic!() };
        for (x, y) in [(0.3, 2.0), (-1.0, 0.5)] {
            assert!((g.f.value(&[x, y]).unwrap() - x * y / 2.0).abs() < 1e-15);
        }
        let Surface::GraphXy(g) = type2_xygraph(0.0, 1.0, GroupPoint::IDENTITY, &zero).unwrap() else { panic!() };
        assert!((g.f.value(&[0.3, 2.0]).unwrap() + 0.3).abs() < 1e-15);
        assert!(type2_xygraph(1.0, 1.0, GroupPoint::IDENTITY, &zero).is_err());
    }

    #[test]
    fn type2_is_a_left_translation() {
        let h0 = parse_g("sin(t)").unwrap();
        let (a, b) = (0.6, 0.8);
        let g0 = GroupPoint::new(0.4, -1.1, 0.7);
        let Surface::GraphXy(base) = type2_xygraph(a, b, GroupPoint::IDENTITY, &h0).unwrap() else { panic!() };
        let Surface::GraphXy(moved) = type2_xygraph(a, b, g0, &h0).unwrap() else { panic!() };
        for (x, y) in [(0.2, 0.3), (-1.5, 2.0)] {
            let p = GroupPoint::new(x, y, base.f.value(&[x, y]).unwrap());
            let q = crate::hgroup::compose(g0, p);
            assert!((moved.f.value(&[q.x, q.y]).unwrap() - q.t).abs() < 1e-13);
        }
    }

    #[test]
    fn vertical_plane_views() {
        let Surface::VerticalPlane(p) = vertical_plane(2.0, 1.0, 3.0).unwrap() else { panic!() };
        let i = p.intrinsic().unwrap();
        assert!((i.phi_jet(1.5, 0.2).unwrap().v - (-0.5 * 1.5 + 1.5)).abs() < 1e-15);
        let s = vertical_plane(2.0, 1.0, 3.0).unwrap();
        let patch = s.patch(Rect::square(-1.0, 1.0).unwrap()).unwrap();
        let phi = s.defining().unwrap();
        for (u, v) in [(0.0, 0.0), (0.7, -0.2)] {
            let g = patch.point(u, v).unwrap();
            assert!(phi.value(g.to_array()).unwrap().abs() < 1e-15);
        }
        assert!(vertical_plane(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn intrinsic_affine_closed_form() {
        let (al, be) = (0.5, 1.0);
        let s = strip_new(
            Arc::new(ScalarFn::builtin("affine", &[al, be]).unwrap()),
            Interval::real_line(),
            Branch::X,
        )
        .unwrap();
        let i = strip_to_intrinsic(&s).unwrap();
        let exact = ScalarFn::parse("2*u*(0.5*v + 1)/(2 + 0.5*u^2)", &["u", "v"]).unwrap();
        for (u, v) in [(0.3, -0.7), (2.0, 1.5), (-3.0, 4.0)] {
            let got = i.phi_jet(u, v).unwrap();
            let want: crate::gexpr::Jet<2> = Field::<2>::jet(&exact, [u, v]).unwrap();
            assert!((got.v - want.v).abs() < 1e-13);
            for a in 0..2 {
                assert!((got.g[a] - want.g[a]).abs() < 1e-12);
                for b in 0..2 {
                    assert!((got.h[a][b] - want.h[a][b]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn helicoid_domain_excludes_axis_rays() {
        let s = strip_new(Arc::new(ScalarFn::builtin("cot_shift", &[]).unwrap()), crate::domain::Interval::new(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).unwrap(), Branch::X).unwrap();
        let i = strip_to_intrinsic(&s).unwrap();
        assert!(!i.contains(0.0, 2.0));
        assert!(!i.contains(0.0, -1.6));
        assert!(i.contains(0.0, 1.5));
        assert!(i.contains(0.5, 2.0));
        assert!(i.contains(-0.5, -40.0));
        let b = i.omega_boundary([0.0, 0.0], [0.0, 3.0]).unwrap();
        assert!((b[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn seed_surface_examples() {
        let h0: Arc<dyn UniFn> = Arc::new(parse_g("-t").unwrap());
        let c = AnalyticSeed::circle([0.0, 0.0], 1.0, h0, Interval::real_line()).unwrap();
        assert_eq!(seed_point(&c, 0.0, 0.0).unwrap(), GroupPoint::new(1.0, 0.0, 0.0));
        let zero: Arc<dyn UniFn> = Arc::new(parse_g("0").unwrap());
        let l = AnalyticSeed::line([0.0, 0.0], [1.0, 0.0], zero, Interval::real_line()).unwrap();
        for (s, r) in [(0.5, 2.0), (-1.0, 0.3)] {
            let p = seed_point(&l, s, r).unwrap();
            assert_eq!((p.x, p.y), (s, -r));
            assert!((p.t - (-r * s / 2.0)).abs() < 1e-15);
            assert!((p.t - p.x * p.y / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn yt_graph_defining_vanishes_on_patch() {
        let s = graph_yt_new(ScalarFn::parse("y*tan(tanh(t))", &["y", "t"]).unwrap()).unwrap();
        let p = s.patch(Rect::square(-2.0, 2.0).unwrap()).unwrap();
        let phi = s.defining().unwrap();
        let g = p.point(1.3, -0.4).unwrap();
        assert!(phi.value(g.to_array()).unwrap().abs() < 1e-15);
        let f: &dyn Field<3> = &*phi.phi;
        assert!(f.value(g.to_array()).unwrap().abs() < 1e-15);
    }
}

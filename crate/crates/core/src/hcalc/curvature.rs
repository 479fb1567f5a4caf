use super::frame::{frame_derivatives, frame_from_defining, pqw_ambient, pqw_dual, FrameData};
use crate::error::{Error, Result};
use crate::gexpr::{Dual, Field, Scalar};
use crate::hgroup::{frame_ambient, FrameVector, GroupPoint};
use crate::surfaces::{Branch, DefiningFn, IntrinsicGraph, SmoothPatch, Surface};

/// `p̄, q̄, ω̄` of a defining function as first-order jets in `(x, y, t)`.
#[derive(Clone, Copy, Debug)]
pub struct BarJets {
    pub at: GroupPoint,
    pub frame: FrameData,
    pub pbar: Dual<3>,
    pub qbar: Dual<3>,
    pub obar: Dual<3>,
}

impl BarJets {
    pub fn x1(&self, d: &Dual<3>) -> f64 {
        d.g[0] - 0.5 * self.at.y * d.g[2]
    }
    pub fn x2(&self, d: &Dual<3>) -> f64 {
        d.g[1] + 0.5 * self.at.x * d.g[2]
    }
    pub fn t(&self, d: &Dual<3>) -> f64 {
        d.g[2]
    }
    /// `Y = p̄X₁ + q̄X₂`.
    pub fn y(&self, d: &Dual<3>) -> f64 {
        self.frame.pbar * self.x1(d) + self.frame.qbar * self.x2(d)
    }
    /// `Z = q̄X₁ − p̄X₂`, tangent to the surface.
    pub fn z(&self, d: &Dual<3>) -> f64 {
        self.frame.qbar * self.x1(d) - self.frame.pbar * self.x2(d)
    }
    /// `X₁p̄ + X₂q̄`.
    pub fn hmean(&self) -> f64 {
        self.x1(&self.pbar) + self.x2(&self.qbar)
    }
}

pub fn bar_jets(phi: &DefiningFn, g: GroupPoint) -> Result<BarJets> {
    let frame = frame_from_defining(phi, g)?;
    frame.require_regular(g)?;
    let j = phi.jet(g.to_array())?;
    let [p, q, om] = pqw_ambient(&j, g);
    let w = (p * p + q * q).sqrt();
    Ok(BarJets { at: g, frame, pbar: p / w, qbar: q / w, obar: om / w })
}

/// `ℋ = X₁p̄ + X₂q̄` through second derivatives of the defining function.
pub fn hmean_defining(phi: &DefiningFn, g: GroupPoint) -> Result<f64> {
    Ok(bar_jets(phi, g)?.hmean())
}

/// Closed-form `ℋ` on `x = yG(t)` from `[G, G′, G″]`, at any ambient point.
pub fn hmean_strip(gd: [f64; 4], x: f64, y: f64) -> Result<f64> {
    let [g, g1, g2, _] = gd;
    let p = 1.0 + 0.5 * y * y * g1;
    let q = -g - 0.5 * x * y * g1;
    let x1p = -0.25 * y * y * y * g2;
    let x2p = y * g1 + 0.25 * x * y * y * g2;
    let x1q = 0.25 * x * y * y * g2;
    let x2q = -x * g1 - 0.25 * x * x * y * g2;
    let w = p.hypot(q);
    if !(w > 0.0) {
        return Err(Error::Characteristic { at: [x, y, f64::NAN], w });
    }
    let x1w = (p * x1p + q * x1q) / w;
    let x2w = (p * x2p + q * x2q) / w;
    Ok((x1p + x2q) / w - (p * x1w + q * x2w) / (w * w))
}

/// `(B_φ(φ), B_φ(B_φ(φ)))` with `B_φ(f) = f_u + φf_v`.
pub fn burgers(graph: &IntrinsicGraph, u: f64, v: f64) -> Result<(f64, f64)> {
    let j = graph.phi_jet(u, v)?;
    let (phi, pu, pv) = (j.v, j.g[0], j.g[1]);
    let (puu, puv, pvv) = (j.h[0][0], j.h[0][1], j.h[1][1]);
    let b = pu + phi * pv;
    let bu = puu + pu * pv + phi * puv;
    let bv = puv + pv * pv + phi * pvv;
    Ok((b, bu + phi * bv))
}

/// `ℋ = −B_φ(B_φ(φ)) / (1 + B_φ(φ)²)^{3/2}`.
pub fn hmean_intrinsic(graph: &IntrinsicGraph, u: f64, v: f64) -> Result<f64> {
    let (b, bb) = burgers(graph, u, v)?;
    Ok(-bb / (1.0 + b * b).powf(1.5))
}

/// `ℋ = q̄Zp̄ − p̄Zq̄` from the patch alone, `Z` resolved in the `(θ_u, θ_v)` basis.
pub fn hmean_patch(patch: &dyn SmoothPatch, u: f64, v: f64) -> Result<f64> {
    let th = patch.jet(u, v)?;
    let [p, q, om] = pqw_dual(&th);
    let frame = FrameData::from_pqw(p.v, q.v, om.v);
    let pos = GroupPoint::new(th[0].v, th[1].v, th[2].v);
    frame.require_regular(pos)?;
    let w = (p * p + q * q).sqrt();
    let (pb, qb) = (p / w, q / w);
    let z = frame_ambient(pos, FrameVector::new(qb.v, -pb.v, 0.0));
    let a = th.map(|c| c.g[0]);
    let b = th.map(|c| c.g[1]);
    let [alpha, beta] = solve_tangent(a, b, z)?;
    let zd = |d: &Dual<2>| alpha * d.g[0] + beta * d.g[1];
    Ok(qb.v * zd(&pb) - pb.v * zd(&qb))
}

/// Coefficients of `z` in the basis `(a, b)` by the 2×2 normal equations.
pub(crate) fn solve_tangent(a: [f64; 3], b: [f64; 3], z: [f64; 3]) -> Result<[f64; 2]> {
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let (aa, ab, bb) = (dot(a, a), dot(a, b), dot(b, b));
    let (az, bz) = (dot(a, z), dot(b, z));
    let det = aa * bb - ab * ab;
    if !(det > 1e-300) {
        return Err(Error::numeric("patch is not an immersion here"));
    }
    Ok([(az * bb - bz * ab) / det, (bz * aa - az * ab) / det])
}

/// Where to evaluate: an ambient point or patch parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum At {
    Ambient(GroupPoint),
    Params(f64, f64),
}

/// `ℋ` by the natural route of the representation.
pub fn hmean(surface: &Surface, at: At) -> Result<f64> {
    match (surface, at) {
        (Surface::Strip(s), At::Ambient(g)) => {
            let gd = s.g_derivs(g.t)?;
            let (x, y) = match s.branch {
                Branch::X => (g.x, g.y),
                Branch::Y => (g.y, -g.x),
            };
            let f = frame_from_defining(&crate::surfaces::strip_defining(s), g)?;
            f.require_regular(g)?;
            hmean_strip(gd, x, y)
        }
        (Surface::Intrinsic(i), At::Params(u, v)) => hmean_intrinsic(i, u, v),
        (_, At::Ambient(g)) => match surface.defining() {
            Some(phi) => hmean_defining(&phi, g),
            None => Err(Error::invalid("this representation is evaluated at patch parameters")),
        },
        (_, At::Params(u, v)) => {
            let e = 1e-9 * (1.0 + u.abs().max(v.abs()));
            let patch = surface.patch(crate::domain::Rect::new(u - e, u + e, v - e, v + e)?)?;
            hmean_patch(&*patch, u, v)
        }
    }
}

/// `(Zζ, Yζ, Tζ)` of an ambient function on a surface with a defining function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zyt {
    pub z: f64,
    pub y: f64,
    pub t: f64,
}

pub fn zyt_derivatives(phi: &DefiningFn, g: GroupPoint, zeta: &dyn Field<3>) -> Result<Zyt> {
    let f = frame_from_defining(phi, g)?;
    f.require_regular(g)?;
    let grad = zeta.jet(g.to_array())?.g;
    let [x1, x2, t] = frame_derivatives(grad, g);
    Ok(Zyt { z: f.qbar * x1 - f.pbar * x2, y: f.pbar * x1 + f.qbar * x2, t })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{Interval, Rect};
    use crate::gexpr::{parse_g, ScalarFn, UniFn};
    use crate::surfaces::{strip_new, strip_to_intrinsic, IntrinsicPatch};

    #[test]
    fn strip_routes_vanish() {
        let g: Arc<dyn UniFn> = Arc::new(parse_g("tan(tanh(t))").unwrap());
        let s = strip_new(g.clone(), Interval::real_line(), Branch::X).unwrap();
        let phi = crate::surfaces::strip_defining(&s);
        for (y, t) in [(0.4, -0.3), (2.5, 1.2), (-3.0, 0.1)] {
            let p = GroupPoint::new(y * g.derivs(t).unwrap()[0], y, t);
            assert!(hmean_defining(&phi, p).unwrap().abs() < 1e-12);
            assert!(hmean(&Surface::Strip(s.clone()), At::Ambient(p)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn off_surface_closed_form_matches_jets() {
        // Both routes define the same ambient function X₁p̄ + X₂q̄ of φ = x − yG(t).
        let g: Arc<dyn UniFn> = Arc::new(parse_g("t^3 + sin(t)").unwrap());
        let s = strip_new(g.clone(), Interval::new(-1.0, 1.0).unwrap(), Branch::X).unwrap();
        let phi = crate::surfaces::strip_defining(&s);
        for (x, y, t) in [(0.3, 0.4, 0.2), (-1.0, 2.0, -0.5)] {
            let a = hmean_defining(&phi, GroupPoint::new(x, y, t)).unwrap();
            let b = hmean_strip(g.derivs(t).unwrap(), x, y).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} {b}");
            assert!(a.abs() > 1e-3);
        }
    }

    #[test]
    fn patch_and_intrinsic_routes_agree_off_minimality() {
        let phi = ScalarFn::parse("u^2 + 0.3*v + sin(u*v)", &["u", "v"]).unwrap();
        let graph = Arc::new(IntrinsicGraph::from_field(Arc::new(phi)));
        let patch = IntrinsicPatch { graph: graph.clone(), domain: Rect::square(-2.0, 2.0).unwrap() };
        for (u, v) in [(0.3, 0.1), (-1.1, 0.7), (0.9, -1.4)] {
            let a = hmean_patch(&patch, u, v).unwrap();
            let b = hmean_intrinsic(&graph, u, v).unwrap();
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "{a} {b}");
            assert!(a.abs() > 1e-3);
        }
    }

    #[test]
    fn cylinder_curvature_is_inverse_radius() {
        let c = crate::surfaces::circle_cylinder([0.5, -0.2], 2.0).unwrap();
        let phi = c.defining().unwrap();
        let patch = c.patch(Rect::new(0.0, 3.0, -1.0, 1.0).unwrap()).unwrap();
        for a in [0.1f64, 1.3, 2.9] {
            let g = GroupPoint::new(0.5 + 2.0 * a.cos(), -0.2 + 2.0 * a.sin(), 0.4);
            assert!((hmean_defining(&phi, g).unwrap() - 0.5).abs() < 1e-14);
            assert!((hmean_patch(&*patch, a, 0.4).unwrap() - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn vertical_plane_zyt() {
        let s = crate::surfaces::vertical_plane(1.0, 0.0, 0.0).unwrap();
        let phi = s.defining().unwrap();
        let zeta = ScalarFn::parse("y^2*t + sin(x + 2*y)", &["x", "y", "t"]).unwrap();
        let g = GroupPoint::new(0.0, 0.8, -0.3);
        let d = zyt_derivatives(&phi, g, &zeta).unwrap();
        let zy = 2.0 * 0.8 * -0.3 + 2.0 * (1.6f64).cos();
        assert!((d.z + zy).abs() < 1e-14);
    }

    #[test]
    fn converted_strip_burgers_equals_g() {
        let g: Arc<dyn UniFn> = Arc::new(parse_g("tan(tanh(t))").unwrap());
        let s = strip_new(g.clone(), Interval::real_line(), Branch::X).unwrap();
        let i = strip_to_intrinsic(&s).unwrap();
        for (u, v) in [(0.5, 0.5), (-2.0, 3.0), (1.5, -0.2)] {
            let (b, bb) = burgers(&i, u, v).unwrap();
            let t = i.psi2(u, v).unwrap().unwrap();
            assert!((b - g.derivs(t).unwrap()[0]).abs() < 1e-12);
            assert!(bb.abs() < 1e-11);
        }
    }
}

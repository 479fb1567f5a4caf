use serde::Serialize;

use crate::error::{Error, Result};
use crate::gexpr::{Dual, Jet, Scalar};
use crate::hgroup::GroupPoint;
use crate::surfaces::{DefiningFn, Patch};

/// Relative threshold on `W` below which a point counts as characteristic.
pub const EPS_CHAR: f64 = 1e-9;

/// Frame components of the Riemannian normal at one surface point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameData {
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub w: f64,
    pub n_norm: f64,
    pub pbar: f64,
    pub qbar: f64,
    pub obar: f64,
    pub characteristic: bool,
}

impl FrameData {
    pub fn from_pqw(p: f64, q: f64, omega: f64) -> FrameData {
        let w = p.hypot(q);
        let n_norm = w.hypot(omega);
        let characteristic = !(w > EPS_CHAR * (1.0 + n_norm));
        let (pbar, qbar, obar) = if w > 0.0 { (p / w, q / w, omega / w) } else { (0.0, 0.0, 0.0) };
        FrameData { p, q, omega, w, n_norm, pbar, qbar, obar, characteristic }
    }

    /// Horizontal Gauss map `ν^H = (p̄, q̄)`.
    pub fn nu_h(&self) -> [f64; 2] {
        [self.pbar, self.qbar]
    }

    /// `e₁ = (ν^H)^⊥ = (q̄, −p̄)`, spanning the horizontal tangent line.
    pub fn e1(&self) -> [f64; 2] {
        [self.qbar, -self.pbar]
    }

    /// Cosine of the angle between `N` and its horizontal part.
    pub fn cosine(&self) -> f64 {
        self.w / self.n_norm
    }

    pub fn require_regular(&self, at: GroupPoint) -> Result<()> {
        if self.characteristic {
            return Err(Error::Characteristic { at: at.to_array(), w: self.w });
        }
        Ok(())
    }
}

/// `(p, q, ω)` of `θ_u ∧ θ_v` from a point and its two tangent vectors.
pub fn pqw<S: Scalar>(pos: [S; 3], du: [S; 3], dv: [S; 3]) -> [S; 3] {
    let [x, y, _] = pos;
    let omega = du[0] * dv[1] - dv[0] * du[1];
    let p = du[1] * dv[2] - dv[1] * du[2] - y * omega * 0.5;
    let q = dv[0] * du[2] - du[0] * dv[2] + x * omega * 0.5;
    [p, q, omega]
}

fn check_domain(patch: &dyn Patch, u: f64, v: f64) -> Result<()> {
    let d = patch.domain();
    let tol = 1e-12 * (1.0 + d.diameter());
    if u < d.u0 - tol || u > d.u1 + tol || v < d.v0 - tol || v > d.v1 + tol {
        return Err(Error::OutsideDomain(format!(
            "({u}, {v}) is outside [{}, {}] x [{}, {}]",
            d.u0, d.u1, d.v0, d.v1
        )));
    }
    Ok(())
}

pub fn frame_from_patch(patch: &dyn Patch, u: f64, v: f64) -> Result<FrameData> {
    check_domain(patch, u, v)?;
    frame_from_patch_unchecked(patch, u, v)
}

/// As [`frame_from_patch`], without the parameter-domain check.
pub fn frame_from_patch_unchecked(patch: &dyn Patch, u: f64, v: f64) -> Result<FrameData> {
    let d = patch.first(u, v)?;
    let [p, q, w] = pqw([d[0].v, d[1].v, d[2].v], d.map(|c| c.g[0]), d.map(|c| c.g[1]));
    Ok(FrameData::from_pqw(p, q, w))
}

/// `(p, q, ω)` of a patch together with their first partials in `(u, v)`.
pub fn pqw_dual(theta: &[Jet<2>; 3]) -> [Dual<2>; 3] {
    let pos = theta.map(|c| c.first());
    let du = theta.map(|c| c.d(0));
    let dv = theta.map(|c| c.d(1));
    pqw(pos, du, dv)
}

/// `(X₁φ, X₂φ, Tφ)` carried as first-order jets in `(x, y, t)`.
pub fn pqw_ambient(j: &Jet<3>, g: GroupPoint) -> [Dual<3>; 3] {
    let x = Dual::<3>::var(g.x, 0);
    let y = Dual::<3>::var(g.y, 1);
    let (fx, fy, ft) = (j.d(0), j.d(1), j.d(2));
    [fx - y * ft * 0.5, fy + x * ft * 0.5, ft]
}

pub fn frame_from_defining(phi: &DefiningFn, g: GroupPoint) -> Result<FrameData> {
    let j = phi.jet(g.to_array())?;
    let [fx, fy, ft] = j.g;
    if fx == 0.0 && fy == 0.0 && ft == 0.0 {
        return Err(Error::precondition(format!("defining function has vanishing gradient at {:?}", g.to_array())));
    }
    Ok(FrameData::from_pqw(fx - 0.5 * g.y * ft, fy + 0.5 * g.x * ft, ft))
}

/// `X₁ζ, X₂ζ, Tζ` from the ambient gradient of `ζ` at `g`.
pub fn frame_derivatives(grad: [f64; 3], g: GroupPoint) -> [f64; 3] {
    [grad[0] - 0.5 * g.y * grad[2], grad[1] + 0.5 * g.x * grad[2], grad[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_patch_frame() {
        let patch = crate::surfaces::vertical_plane(1.0, 0.0, 0.0)
            .unwrap()
            .patch(crate::domain::Rect::square(-1.0, 1.0).unwrap())
            .unwrap();
        let f = frame_from_patch(&*patch, 0.3, -0.6).unwrap();
        assert_eq!((f.p, f.q, f.omega), (1.0, 0.0, 0.0));
        assert!(matches!(frame_from_patch(&*patch, 2.0, 0.0), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn saddle_graph_frame() {
        let s = crate::surfaces::graph_xy_new(
            crate::gexpr::ScalarFn::parse("x*y/2", &["x", "y"]).unwrap(),
            None,
        )
        .unwrap();
        let phi = s.defining().unwrap();
        let f = frame_from_defining(&phi, GroupPoint::new(0.7, -1.3, 0.7 * -1.3 / 2.0)).unwrap();
        assert!((f.p - 1.3).abs() < 1e-15 && f.q.abs() < 1e-15);
        let f = frame_from_defining(&phi, GroupPoint::new(0.7, 0.0, 0.0)).unwrap();
        assert!(f.characteristic);
    }
}

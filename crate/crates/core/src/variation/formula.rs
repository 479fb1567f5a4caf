use serde::{Deserialize, Serialize};

use super::{Deformation, ScalarOnPatch};
use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::gexpr::{Dual, Field, Jet};
use crate::hcalc::quad::integrate_rect;
use crate::hcalc::{bar_jets, hmean_patch, pqw, solve_tangent, BarJets, QuadratureSpec};
use crate::hgroup::{frame_ambient, FrameVector, GroupPoint};
use crate::surfaces::{DefiningFn, GraphicalStrip, SmoothPatch};

fn angle(th: &[Jet<2>; 3]) -> [f64; 3] {
    pqw(th.map(|c| c.v), th.map(|c| c.g[0]), th.map(|c| c.g[1]))
}

fn point(th: &[Jet<2>; 3]) -> GroupPoint {
    GroupPoint::new(th[0].v, th[1].v, th[2].v)
}

/// `∫∫ ℋ(ap + bq + kω) du dv` over the support, with the patch orientation.
pub fn first_variation_formula(
    patch: &dyn SmoothPatch,
    def: &dyn Deformation,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let spec = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * def.support().area()));
    integrate_rect(
        |u, v| {
            let th = patch.jet(u, v)?;
            let [a, b, k] = def.fields(&th, u, v)?;
            if a.v == 0.0 && b.v == 0.0 && k.v == 0.0 {
                return Ok(0.0);
            }
            let [p, q, om] = angle(&th);
            Ok(hmean_patch(patch, u, v)? * (a.v * p + b.v * q + k.v * om))
        },
        def.support(),
        &spec,
    )
}

/// `2(p̄Tq̄ − q̄Tp̄) + 2ω̄(q̄Yp̄ − p̄Yq̄) + ω̄²`.
pub fn normal_bracket(bj: &BarJets) -> f64 {
    let (pb, qb, ob) = (bj.frame.pbar, bj.frame.qbar, bj.frame.obar);
    2.0 * (pb * bj.t(&bj.qbar) - qb * bj.t(&bj.pbar)) + 2.0 * ob * (qb * bj.y(&bj.pbar) - pb * bj.y(&bj.qbar))
        + ob * ob
}

/// `Zf` for `f` known through its `(u, v)`-gradient on the patch.
fn z_on_patch(th: &[Jet<2>; 3], bj: &BarJets, f: &Dual<2>) -> Result<f64> {
    let z = frame_ambient(bj.at, FrameVector::new(bj.frame.qbar, -bj.frame.pbar, 0.0));
    let [al, be] = solve_tangent(th.map(|c| c.g[0]), th.map(|c| c.g[1]), z)?;
    Ok(al * f.g[0] + be * f.g[1])
}

/// `∫_S {(Zh)² + h²[2(p̄Tq̄ − q̄Tp̄) + 2ω̄(q̄Yp̄ − p̄Yq̄) + ω̄²]} dσ_H`.
pub fn second_variation_normal_formula(
    phi: &DefiningFn,
    patch: &dyn SmoothPatch,
    h: &ScalarOnPatch,
    support: Rect,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let spec = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * support.area()));
    integrate_rect(
        |u, v| {
            let th = patch.jet(u, v)?;
            let hd = h.eval(&th, u, v)?;
            if hd.v == 0.0 && hd.g == [0.0; 2] {
                return Ok(0.0);
            }
            let bj = bar_jets(phi, point(&th))?;
            let zh = z_on_patch(&th, &bj, &hd)?;
            let [p, q, _] = angle(&th);
            Ok((zh * zh + hd.v * hd.v * normal_bracket(&bj)) * p.hypot(q))
        },
        support,
        &spec,
    )
}

/// `∫_S {p̄²(Za)² + p̄²ω̄²a² + ω̄Z(a²) − p̄q̄(T(a²) − ω̄Y(a²))} dσ_H` for ambient `a`.
pub fn second_variation_x1_formula(
    phi: &DefiningFn,
    patch: &dyn SmoothPatch,
    a: &dyn Field<3>,
    support: Rect,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let spec = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * support.area()));
    integrate_rect(
        |u, v| {
            let th = patch.jet(u, v)?;
            let g = point(&th);
            let aj = a.jet(g.to_array())?.first();
            if aj.v == 0.0 && aj.g == [0.0; 3] {
                return Ok(0.0);
            }
            let bj = bar_jets(phi, g)?;
            let (pb, qb, ob) = (bj.frame.pbar, bj.frame.qbar, bj.frame.obar);
            let (za, ya, ta) = (bj.z(&aj), bj.y(&aj), bj.t(&aj));
            let av = aj.v;
            let f = pb * pb * za * za + pb * pb * ob * ob * av * av + ob * 2.0 * av * za
                - pb * qb * (2.0 * av * ta - ob * 2.0 * av * ya);
            let [p, q, _] = angle(&th);
            Ok(f * p.hypot(q))
        },
        support,
        &spec,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripMode {
    /// `𝒳 = hν^H`, `u = h∘θ`.
    Normal,
    /// `𝒳 = aX₁`, `u = a∘θ`.
    X1,
}

/// Second variation on a strip projected to the `(y, t)` plane:
/// `∫∫ (1 + y²G′/2)u_y²/(1+G²)^{e/2} − 2∫∫ u²G′/((1 + y²G′/2)(1+G²)^{e/2})`,
/// `e = 1` for [`StripMode::Normal`], `e = 3` for [`StripMode::X1`].
pub fn strip_second_variation(
    s: &GraphicalStrip,
    u: &dyn Field<2>,
    support: Rect,
    mode: StripMode,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !(s.interval.contains(support.v0) && s.interval.contains(support.v1)) {
        return Err(Error::OutsideDomain(format!(
            "t-support [{}, {}] is not inside I = ({}, {})",
            support.v0, support.v1, s.interval.lo, s.interval.hi
        )));
    }
    let e = match mode {
        StripMode::Normal => 0.5,
        StripMode::X1 => 1.5,
    };
    let spec = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * support.area()));
    integrate_rect(
        |y, t| {
            let j = u.jet([y, t])?;
            if j.v == 0.0 && j.g == [0.0; 2] {
                return Ok(0.0);
            }
            let [g, g1, _, _] = s.g_derivs(t)?;
            let w1 = 1.0 + 0.5 * y * y * g1;
            let den = (1.0 + g * g).powf(e);
            Ok((w1 * j.g[0] * j.g[0] - 2.0 * j.v * j.v * g1 / w1) / den)
        },
        support,
        &spec,
    )
}

use serde::Serialize;

use super::frame::{frame_from_patch_unchecked, pqw_dual, FrameData};
use super::quad::{integrate_2d, QuadResult, QuadratureSpec};
use crate::error::Result;
use crate::hgroup::GroupPoint;
use crate::surfaces::{Patch, SmoothPatch};

/// `∫∫_D F(u, v) W(u, v) du dv`.
pub fn sigma_h_integral(
    patch: &dyn Patch,
    f: impl Fn(f64, f64, &FrameData) -> Result<f64> + Sync,
    spec: &QuadratureSpec,
) -> Result<QuadResult<1>> {
    integrate_2d(
        |u, v| {
            let fr = frame_from_patch_unchecked(patch, u, v)?;
            Ok([f(u, v, &fr)? * fr.w])
        },
        patch.domain(),
        spec,
    )
}

/// H-perimeter of the patch.
pub fn h_perimeter(patch: &dyn Patch, spec: &QuadratureSpec) -> Result<QuadResult<1>> {
    sigma_h_integral(patch, |_, _, _| Ok(1.0), spec)
}

/// A refined zero of `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharPoint {
    pub u: f64,
    pub v: f64,
    pub point: GroupPoint,
    pub w: f64,
}

/// Grid local minima of `W` on an `n × n` grid, refined by damped Gauss–Newton
/// on `(p, q) = 0`; kept when `W ≤ eps_char·(1 + |N|)`.
pub fn characteristic_scan(patch: &dyn SmoothPatch, n: usize, eps_char: f64) -> Result<Vec<CharPoint>> {
    let d = patch.domain();
    let n = n.max(3);
    let mut w = vec![f64::INFINITY; n * n];
    let at = |i: usize, j: usize| d.lerp(i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
    for i in 0..n {
        for j in 0..n {
            let (u, v) = at(i, j);
            if let Ok(f) = frame_from_patch_unchecked(patch, u, v) {
                w[i * n + j] = f.w;
            }
        }
    }
    let mut found: Vec<CharPoint> = Vec::new();
    let sep = 0.5 * d.diameter() / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            let c = w[i * n + j];
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    if w[a as usize * n + b as usize] < c {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let (u, v) = at(i, j);
            let Some(cp) = refine(patch, u, v)? else { continue };
            let f = frame_from_patch_unchecked(patch, cp.u, cp.v)?;
            if cp.w <= eps_char * (1.0 + f.n_norm)
                && !found.iter().any(|o| (o.u - cp.u).hypot(o.v - cp.v) < sep)
            {
                found.push(cp);
            }
        }
    }
    Ok(found)
}

fn refine(patch: &dyn SmoothPatch, mut u: f64, mut v: f64) -> Result<Option<CharPoint>> {
    let d = patch.domain();
    let eval = |u: f64, v: f64| -> Result<_> {
        let th = patch.jet(u, v)?;
        let [p, q, _] = pqw_dual(&th);
        Ok((p, q, GroupPoint::new(th[0].v, th[1].v, th[2].v)))
    };
    let (mut p, mut q, mut g) = eval(u, v)?;
    let mut mu = 1e-3;
    for _ in 0..100 {
        let r2 = p.v * p.v + q.v * q.v;
        if r2 == 0.0 {
            break;
        }
        let (a, b, c) = (
            p.g[0] * p.g[0] + q.g[0] * q.g[0],
            p.g[0] * p.g[1] + q.g[0] * q.g[1],
            p.g[1] * p.g[1] + q.g[1] * q.g[1],
        );
        let (ru, rv) = (p.g[0] * p.v + q.g[0] * q.v, p.g[1] * p.v + q.g[1] * q.v);
        let mut improved = false;
        for _ in 0..30 {
            let (aa, cc) = (a * (1.0 + mu) + 1e-300, c * (1.0 + mu) + 1e-300);
            let det = aa * cc - b * b;
            if !(det.abs() > 0.0) {
                mu *= 10.0;
                continue;
            }
            let du = -(cc * ru - b * rv) / det;
            let dv = -(aa * rv - b * ru) / det;
            let (nu, nv) = ((u + du).clamp(d.u0, d.u1), (v + dv).clamp(d.v0, d.v1));
            let Ok((np, nq, ng)) = eval(nu, nv) else {
                mu *= 10.0;
                continue;
            };
            if np.v * np.v + nq.v * nq.v < r2 {
                (u, v, p, q, g) = (nu, nv, np, nq, ng);
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(Some(CharPoint { u, v, point: g, w: p.v.hypot(q.v) }))
}

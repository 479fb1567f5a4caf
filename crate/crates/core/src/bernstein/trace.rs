use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::gexpr::{Field, Jet, Jet3};
use crate::hcalc::EPS_CHAR;
use crate::surfaces::{SeedCurve, SeedJets};

/// Local error target of the integrator, per unit arc length.
pub const TRACE_TOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 14;
/// Spacing of the difference quotient that supplies third derivatives.
const D3_STEP: f64 = 1e-4;

/// `ν̃^H = (p, q)/W` of `t = f(x, y)`, `p = −f_x − y/2`, `q = −f_y + x/2`, with its Jacobian.
#[derive(Clone, Copy, Debug)]
struct Direction {
    nu: [f64; 2],
    jac: [[f64; 2]; 2],
    f: Jet<2>,
}

fn direction(f: &dyn Field<2>, omega: Option<Rect>, z: [f64; 2]) -> Result<Direction> {
    if let Some(o) = omega {
        if !o.contains(z[0], z[1]) {
            return Err(Error::OutsideDomain(format!("seed left the graph domain at ({}, {})", z[0], z[1])));
        }
    }
    let j = f.jet(z).map_err(|e| Error::OutsideDomain(format!("seed left the graph domain: {e}")))?;
    let [x, y] = z;
    let n = [-j.g[0] - 0.5 * y, -j.g[1] + 0.5 * x];
    let w = n[0].hypot(n[1]);
    if !(w > EPS_CHAR * (1.0 + w.hypot(1.0))) {
        return Err(Error::Characteristic { at: [x, y, j.v], w });
    }
    let dn = [[-j.h[0][0], -j.h[0][1] - 0.5], [-j.h[1][0] + 0.5, -j.h[1][1]]];
    let nu = [n[0] / w, n[1] / w];
    // D(n/|n|) = (I − νν^T) Dn / |n|
    let mut jac = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            let mut s = 0.0;
            for m in 0..2 {
                let proj = if i == m { 1.0 } else { 0.0 } - nu[i] * nu[m];
                s += proj * dn[m][k];
            }
            jac[i][k] = s / w;
        }
    }
    Ok(Direction { nu, jac, f: j })
}

fn rk4(f: &dyn Field<2>, omega: Option<Rect>, z: [f64; 2], h: f64) -> Result<[f64; 2]> {
    let v = |p: [f64; 2]| direction(f, omega, p).map(|d| d.nu);
    let add = |p: [f64; 2], k: [f64; 2], c: f64| [p[0] + c * k[0], p[1] + c * k[1]];
    let k1 = v(z)?;
    let k2 = v(add(z, k1, 0.5 * h))?;
    let k3 = v(add(z, k2, 0.5 * h))?;
    let k4 = v(add(z, k3, h))?;
    Ok([
        z[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        z[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// One step of length `h`, compared against two half steps and subdivided until they agree.
fn controlled_step(f: &dyn Field<2>, omega: Option<Rect>, z: [f64; 2], h: f64, depth: u32) -> Result<[f64; 2]> {
    let full = rk4(f, omega, z, h)?;
    let mid = rk4(f, omega, z, 0.5 * h)?;
    let half = rk4(f, omega, mid, 0.5 * h)?;
    let err = (full[0] - half[0]).abs().max((full[1] - half[1]).abs());
    if err <= TRACE_TOL * h.abs() {
        return Ok(half);
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::numeric(format!("seed integrator cannot meet its tolerance near ({}, {})", z[0], z[1])));
    }
    let m = controlled_step(f, omega, z, 0.5 * h, depth + 1)?;
    controlled_step(f, omega, m, 0.5 * h, depth + 1)
}

/// One node of a traced seed curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedSample {
    pub s: f64,
    pub gamma: [f64; 2],
    pub tangent: [f64; 2],
    pub h0: f64,
    pub w: f64,
}

/// A seed curve of `t = f(x, y)` traced from `γ(0) = z`.
#[derive(Clone)]
pub struct SeedData {
    pub f: Arc<dyn Field<2>>,
    pub omega: Option<Rect>,
    pub step: f64,
    /// Nodes at `s = kh`, increasing in `s`, including `s = 0`.
    pub samples: Vec<SeedSample>,
}

impl fmt::Debug for SeedData {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("SeedData")
            .field("f", &self.f.describe())
            .field("step", &self.step)
            .field("nodes", &self.samples.len())
            .finish()
    }
}

fn sample(f: &dyn Field<2>, omega: Option<Rect>, s: f64, z: [f64; 2]) -> Result<SeedSample> {
    let d = direction(f, omega, z)?;
    let [x, y] = z;
    let w = (-d.f.g[0] - 0.5 * y).hypot(-d.f.g[1] + 0.5 * x);
    Ok(SeedSample { s, gamma: z, tangent: d.nu, h0: d.f.v, w })
}

/// Integrates `γ′ = ν̃^H(γ)` from `γ(0) = z` over `s_range ∋ 0` with nominal step `step`.
///
/// Each nominal step is checked against two half steps and subdivided until
/// the two agree to `TRACE_TOL` per unit arc. The field is unit length by
/// construction, so `|γ′| = 1` holds at every stage.
pub fn seed_trace(
    f: Arc<dyn Field<2>>,
    omega: Option<Rect>,
    z: [f64; 2],
    s_range: (f64, f64),
    step: f64,
) -> Result<SeedData> {
    let (a, b) = s_range;
    if !(a <= 0.0 && 0.0 <= b && a < b) {
        return Err(Error::invalid(format!("s-range [{a}, {b}] must contain 0")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("trace step must be positive"));
    }
    let first = sample(&*f, omega, 0.0, z)?;
    let mut fwd = vec![first];
    let mut bwd = Vec::new();
    for (end, dir, out) in [(b, 1.0, &mut fwd), (a, -1.0, &mut bwd)] {
        let n = (end.abs() / step).ceil() as usize;
        let mut cur = z;
        for k in 1..=n {
            let s = dir * (k as f64 * step).min(end.abs());
            let h = s - dir * ((k - 1) as f64 * step);
            cur = controlled_step(&*f, omega, cur, h, 0)?;
            out.push(sample(&*f, omega, s, cur)?);
        }
    }
    bwd.reverse();
    bwd.extend(fwd);
    Ok(SeedData { f, omega, step, samples: bwd })
}

impl SeedData {
    pub fn s_range(&self) -> (f64, f64) {
        (self.samples[0].s, self.samples[self.samples.len() - 1].s)
    }

    pub fn max_sup(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, p| m.max(p.gamma[0].abs()).max(p.gamma[1].abs()))
    }

    /// `γ(s)` by integrating from the nearest node.
    pub fn gamma_at(&self, s: f64) -> Result<[f64; 2]> {
        let (a, b) = self.s_range();
        if !(s >= a && s <= b) {
            return Err(Error::OutsideDomain(format!("s = {s} is outside the trace [{a}, {b}]")));
        }
        let i = self
            .samples
            .binary_search_by(|p| p.s.total_cmp(&s))
            .unwrap_or_else(|i| if i == 0 { 0 } else if i >= self.samples.len() { i - 1 } else if (self.samples[i].s - s).abs() < (s - self.samples[i - 1].s).abs() { i } else { i - 1 });
        let node = self.samples[i];
        let h = s - node.s;
        if h == 0.0 {
            return Ok(node.gamma);
        }
        controlled_step(&*self.f, self.omega, node.gamma, h, 0)
    }

    /// `(γ, γ′, γ″)` and `(h₀, h₀′, h₀″)` at a point of the trace.
    fn second_order(&self, z: [f64; 2]) -> Result<([[f64; 2]; 3], [f64; 3])> {
        let d = direction(&*self.f, self.omega, z)?;
        let t = d.nu;
        let acc = [d.jac[0][0] * t[0] + d.jac[0][1] * t[1], d.jac[1][0] * t[0] + d.jac[1][1] * t[1]];
        let j = d.f;
        let h1 = j.g[0] * t[0] + j.g[1] * t[1];
        let hess = j.h[0][0] * t[0] * t[0] + 2.0 * j.h[0][1] * t[0] * t[1] + j.h[1][1] * t[1] * t[1];
        let h2 = hess + j.g[0] * acc[0] + j.g[1] * acc[1];
        Ok(([z, t, acc], [j.v, h1, h2]))
    }
}

impl SeedCurve for SeedData {
    fn interval(&self) -> Interval {
        let (a, b) = self.s_range();
        Interval { lo: a, hi: b }
    }

    /// Third derivatives come from a central difference of the second ones.
    fn jets(&self, s: f64) -> Result<SeedJets> {
        let z = self.gamma_at(s)?;
        let (g, h) = self.second_order(z)?;
        let e = D3_STEP;
        let zp = controlled_step(&*self.f, self.omega, z, e, 0)?;
        let zm = controlled_step(&*self.f, self.omega, z, -e, 0)?;
        let (gp, hp) = self.second_order(zp)?;
        let (gm, hm) = self.second_order(zm)?;
        let d3 = |p: f64, m: f64| (p - m) / (2.0 * e);
        Ok(SeedJets {
            g1: Jet3::new(g[0][0], g[1][0], g[2][0], d3(gp[2][0], gm[2][0])),
            g2: Jet3::new(g[0][1], g[1][1], g[2][1], d3(gp[2][1], gm[2][1])),
            h0: Jet3::new(h[0], h[1], h[2], d3(hp[2], hm[2])),
        })
    }
}

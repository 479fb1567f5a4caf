//! Destabilizing deformations of strict graphical strips.
//!
//! For `G′ > 0` on `[−4δ, 4δ]` the family
//! `f_k(y, t) = χ_k(y)χ(t)/√(1 + (y²/2)G_k′(t))`, `G_k = G ⋆ χ̃_k`,
//! eventually satisfies `LHS_k < RHS_k`, i.e. the second variation of the
//! perimeter along `h_kν^H` with `h_k∘θ = f_k` is negative.

mod bumps;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

pub use bumps::{smoothstep, BumpFamily};

use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::gexpr::{Dual, EvalError, Field, FnUni, Jet, Scalar, UniFn};
use crate::hcalc::quad::integrate_1d_with_breaks;
use crate::hcalc::QuadratureSpec;
use crate::surfaces::{strip_new, GraphicalStrip};
use crate::variation::{strip_second_variation, NormalField, ScalarOnPatch, StripMode};

/// Largest `k` tried by [`find_k0`].
pub const K_MAX: u64 = 1 << 20;

/// Tolerance of the convolution quadrature.
pub const CONV_TOL: f64 = 1e-12;

/// `G_k = G ⋆ χ̃_k` with `[G_k, G_k′, G_k″, G_k‴]` by quadrature,
/// `G_k‴ = G″ ⋆ χ̃_k′`.
#[derive(Debug)]
pub struct MollifiedG {
    pub base: Arc<dyn UniFn>,
    pub bumps: BumpFamily,
    pub k: f64,
    cache: Mutex<HashMap<u64, [f64; 4]>>,
}

impl MollifiedG {
    pub fn new(base: Arc<dyn UniFn>, bumps: BumpFamily, k: f64) -> Self {
        Self { base, bumps, k, cache: Mutex::new(HashMap::new()) }
    }

    fn compute(&self, t: f64) -> Result<[f64; 4]> {
        let d = self.bumps.delta;
        let k = self.k;
        let g = self.base.derivs(t)?;
        let floor = CONV_TOL * (g[0].abs() + g[1].abs() + g[2].abs()).max(1e-300);
        let spec = QuadratureSpec::default().with_rel_tol(CONV_TOL).with_abs_tol(floor);
        // s = σ/k, σ ∈ supp χ̂ = [−2δ, 2δ]
        let mut r = integrate_1d_with_breaks(
            |sig| {
                let g = self.base.derivs(t - sig / k)?;
                let kh = self.bumps.chi_hat(Dual::<1>::var(sig, 0));
                Ok([g[0] * kh.v, g[1] * kh.v, g[2] * kh.v, g[2] * kh.g[0]])
            },
            -2.0 * d,
            2.0 * d,
            &[-d, 0.0, d],
            &spec,
        )?;
        r.value[3] *= k;
        Ok(r.value)
    }
}

impl UniFn for MollifiedG {
    fn derivs(&self, t: f64) -> std::result::Result<[f64; 4], EvalError> {
        if let Some(v) = self.cache.lock().map_err(|_| poisoned(t))?.get(&t.to_bits()) {
            return Ok(*v);
        }
        let v = self.compute(t).map_err(|e| match e {
            Error::Eval(e) => e,
            other => EvalError::new(crate::gexpr::DomainKind::NonFinite, other.to_string(), &[t]),
        })?;
        self.cache.lock().map_err(|_| poisoned(t))?.insert(t.to_bits(), v);
        Ok(v)
    }
    fn describe(&self) -> String {
        format!("({}) * chi~_{}", self.base.describe(), self.k)
    }
}

fn poisoned(t: f64) -> EvalError {
    EvalError::new(crate::gexpr::DomainKind::NonFinite, "mollifier cache", &[t])
}

/// `f_k` as a field on `(y, t)`.
#[derive(Debug, Clone)]
pub struct FkField {
    pub bumps: BumpFamily,
    pub k: f64,
    pub gk: Arc<MollifiedG>,
}

impl FkField {
    pub fn eval<S: Scalar>(&self, y: S, t: S) -> std::result::Result<S, EvalError> {
        if y.value().abs() >= 2.0 * self.bumps.delta * self.k || t.value().abs() >= 2.0 * self.bumps.delta {
            return Ok(S::cst(0.0));
        }
        let c = self.bumps.chi_k(y, self.k) * self.bumps.chi(t);
        let d = self.gk.derivs(t.value())?;
        let g1 = t.lift([d[1], d[2], d[3], 0.0]);
        Ok(c / (y * y * g1 * 0.5 + 1.0).sqrt())
    }

    /// Support in `(y, t)`.
    pub fn support(&self) -> Rect {
        let (a, b) = (2.0 * self.bumps.delta * self.k, 2.0 * self.bumps.delta);
        Rect { u0: -a, u1: a, v0: -b, v1: b }
    }
}

impl Field<2> for FkField {
    fn jet(&self, p: [f64; 2]) -> std::result::Result<Jet<2>, EvalError> {
        let [y, t] = Jet::<2>::vars(p);
        self.eval(y, t)
    }
    fn describe(&self) -> String {
        format!("f_k, k = {}, delta = {}", self.k, self.bumps.delta)
    }
}

fn require_strict(g: &dyn UniFn, delta: f64) -> Result<()> {
    let n = 512;
    for i in 0..=n {
        let t = -4.0 * delta + 8.0 * delta * i as f64 / n as f64;
        let t = t.clamp(-4.0 * delta * (1.0 - 1e-12), 4.0 * delta * (1.0 - 1e-12));
        let g1 = g.derivs(t)?[1];
        if !(g1 > 0.0) {
            return Err(Error::precondition(format!("G' = {g1:e} is not positive at t = {t}")));
        }
    }
    Ok(())
}

/// Both sides of the reverse inequality at one `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sides {
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    /// Whether `½G′ ≤ G_k′ ≤ 2G′` held on `[−2δ, 2δ]`.
    pub dominated: bool,
}

impl Sides {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// `½G′ ≤ G_k′ ≤ 2G′` on a grid of `[−2δ, 2δ]`; returns the worst ratio `G_k′/G′` pair.
pub fn dominate_check(gk: &MollifiedG, n: usize) -> Result<(f64, f64)> {
    let d = gk.bumps.delta;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..=n {
        let t = -2.0 * d + 4.0 * d * i as f64 / n as f64;
        let r = gk.derivs(t)?[1] / gk.base.derivs(t)?[1];
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `LHS = ∫∫ (1 + y²G′/2)(∂_y f_k)²/√(1+G²)`, `RHS = 2∫∫ G′f_k²/((1 + y²G′/2)√(1+G²))`,
/// iterated: `y` inner on `[−2δk, 2δk]`, `t` outer on `[−2δ, 2δ]`.
pub fn reverse_inequality_sides(g: Arc<dyn UniFn>, delta: f64, k: f64, quad: &QuadratureSpec) -> Result<Sides> {
    if !(k >= 2.0) {
        return Err(Error::precondition(format!("k = {k} is below 2")));
    }
    require_strict(&*g, delta)?;
    let bumps = BumpFamily::new(delta)?;
    let gk = Arc::new(MollifiedG::new(g.clone(), bumps, k));
    let fk = FkField { bumps, k, gk: gk.clone() };
    let (lo, hi) = dominate_check(&gk, 256)?;
    let dominated = lo >= 0.5 && hi <= 2.0;
    let inner_spec = quad.with_rel_tol(quad.rel_tol * 1e-2);
    let ymax = 2.0 * delta * k;
    let inner_err = std::cell::Cell::new(0.0f64);
    let r = integrate_1d_with_breaks(
        |t| {
            let gd = g.derivs(t)?;
            let (g0, g1) = (gd[0], gd[1]);
            let s = (1.0 + g0 * g0).sqrt();
            let scale = (2.0 / g1).sqrt();
            let mut breaks = vec![0.0, -delta * k, delta * k];
            let mut b = scale;
            while b < ymax {
                breaks.push(b);
                breaks.push(-b);
                b *= 4.0;
            }
            let tt = Dual::<1>::constant(t);
            let inner = integrate_1d_with_breaks(
                |y| {
                    let f = fk.eval(Dual::<1>::var(y, 0), tt)?;
                    let w1 = 1.0 + 0.5 * y * y * g1;
                    Ok([w1 * f.g[0] * f.g[0] / s, 2.0 * g1 * f.v * f.v / (w1 * s)])
                },
                -ymax,
                ymax,
                &breaks,
                &inner_spec,
            )?;
            inner_err.set(inner_err.get().max(inner.error[0] + inner.error[1]));
            Ok(inner.value)
        },
        -2.0 * delta,
        2.0 * delta,
        &[-delta, 0.0, delta],
        quad,
    )?;
    Ok(Sides {
        k,
        lhs: r.value[0],
        rhs: r.value[1],
        error: r.error[0] + r.error[1] + 4.0 * delta * inner_err.get(),
        dominated,
    })
}

/// Outcome of the `k` search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct K0Search {
    pub k0: u64,
    pub sides: Sides,
    /// Every evaluated `k`, in evaluation order.
    pub trace: Vec<Sides>,
}

/// Smallest `k` found by doubling from 2 and bisecting the last bracket with
/// `LHS < RHS` and the domination bracket satisfied.
pub fn find_k0(g: Arc<dyn UniFn>, delta: f64, k_max: u64, quad: &QuadratureSpec) -> Result<K0Search> {
    let k_max = k_max.min(K_MAX).max(2);
    let mut trace = Vec::new();
    let ok = |s: &Sides| s.dominated && s.lhs < s.rhs;
    let mut prev = 1u64;
    let mut k = 2u64;
    let hit = loop {
        let s = reverse_inequality_sides(g.clone(), delta, k as f64, quad)?;
        trace.push(s);
        if ok(&s) {
            break s;
        }
        if k >= k_max {
            return Err(Error::KNotFound { k_max, lhs: s.lhs, rhs: s.rhs });
        }
        prev = k;
        k = (2 * k).min(k_max);
    };
    let (mut lo, mut hi, mut best) = (prev, k, hit);
    while hi - lo > 1 && lo >= 2 {
        let mid = lo + (hi - lo) / 2;
        let s = reverse_inequality_sides(g.clone(), delta, mid as f64, quad)?;
        trace.push(s);
        if ok(&s) {
            hi = mid;
            best = s;
        } else {
            lo = mid;
        }
    }
    Ok(K0Search { k0: hi, sides: best, trace })
}

/// `LHS_k/RHS_k` at the given `k`, evaluated concurrently.
pub fn ratio_trend(g: Arc<dyn UniFn>, delta: f64, ks: &[f64], quad: &QuadratureSpec) -> Result<Vec<Sides>> {
    ks.par_iter().map(|&k| reverse_inequality_sides(g.clone(), delta, k, quad)).collect()
}

/// `√2π∫χ(t)²√(G′/(1+G²)) dt`, the `k → ∞` limit of `RHS_k`.
pub fn rhs_limit(g: &dyn UniFn, delta: f64, quad: &QuadratureSpec) -> Result<f64> {
    let b = BumpFamily::new(delta)?;
    let r = integrate_1d_with_breaks(
        |t| {
            let d = g.derivs(t)?;
            let c = b.chi(t);
            Ok([c * c * (d[1] / (1.0 + d[0] * d[0])).sqrt()])
        },
        -2.0 * delta,
        2.0 * delta,
        &[-delta, delta],
        quad,
    )?;
    Ok(std::f64::consts::SQRT_2 * std::f64::consts::PI * r.value[0])
}

/// `G(t₀ + t)`.
pub fn recentered(g: Arc<dyn UniFn>, t0: f64) -> Arc<dyn UniFn> {
    if t0 == 0.0 {
        return g;
    }
    let name = format!("G({t0} + t) with G = {}", g.describe());
    Arc::new(FnUni::new(name, move |t| g.derivs(t0 + t)))
}

/// Witness of a negative second variation on a strict strip.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstabilityCertificate {
    #[serde(rename = "G")]
    pub g: String,
    #[serde(rename = "I")]
    pub interval: [f64; 2],
    #[serde(rename = "J")]
    pub window: [f64; 2],
    pub t0: f64,
    pub delta: f64,
    pub k0: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub v2: f64,
    pub quad_err: f64,
    pub c_delta: f64,
    pub h_k: String,
    pub trace: Vec<Sides>,
}

/// Recenters `J = (a, b)` at `t₀ = (a+b)/2`, sets `δ = (b − a)/8`, finds `k₀`
/// and recomputes the second variation on the `(y, t)` plane at `k₀`.
///
/// `window` defaults to the strip's strict window; it must lie inside it.
pub fn certify_instability(
    s: &GraphicalStrip,
    window: Option<Interval>,
    quad: &QuadratureSpec,
) -> Result<InstabilityCertificate> {
    let strict = s
        .strict_window
        .ok_or_else(|| Error::precondition("the strip has no strict window (G' vanishes on the scanned I)"))?;
    let j = window.unwrap_or(strict);
    if !(j.is_bounded() && j.lo >= strict.lo && j.hi <= strict.hi) {
        return Err(Error::precondition(format!(
            "window ({}, {}) is not a bounded part of the strict window ({}, {})",
            j.lo, j.hi, strict.lo, strict.hi
        )));
    }
    let t0 = 0.5 * (j.lo + j.hi);
    let delta = (j.hi - j.lo) / 8.0;
    let g = recentered(s.g.clone(), t0);
    let search = find_k0(g.clone(), delta, K_MAX, quad)?;
    let k = search.k0 as f64;
    let bumps = BumpFamily::new(delta)?;
    let fk = FkField { bumps, k, gk: Arc::new(MollifiedG::new(g.clone(), bumps, k)) };
    let shifted = strip_new(g, Interval::new(s.interval.lo - t0, s.interval.hi - t0)?, s.branch)?;
    let (v2, v2_err) = strip_second_variation(&shifted, &fk, fk.support(), StripMode::Normal, quad)?;
    let sd = search.sides;
    let gap = sd.lhs - sd.rhs;
    let tol = 1e3 * (sd.error + v2_err) + 1e-8 * sd.rhs.abs();
    if (v2 - gap).abs() > tol {
        return Err(Error::numeric(format!(
            "second variation {v2:e} disagrees with LHS - RHS = {gap:e} beyond {tol:e}"
        )));
    }
    Ok(InstabilityCertificate {
        g: s.g.describe(),
        interval: [s.interval.lo, s.interval.hi],
        window: [j.lo, j.hi],
        t0,
        delta,
        k0: search.k0,
        lhs: sd.lhs,
        rhs: sd.rhs,
        gap,
        v2,
        quad_err: sd.error + v2_err,
        c_delta: bumps.c_delta,
        h_k: format!(
            "h_k(x, y, t) = chi_k(y) chi(t - {t0}) chi_k(x - y G(t)) / sqrt(1 + y^2 G_k'(t - {t0}) / 2), G_k = G(. + {t0}) * chi~_k, k = {}",
            search.k0
        ),
        trace: search.trace,
    })
}

/// `f_k(y, t − t₀)`: the certificate's field on the original strip's `(y, t)`.
#[derive(Debug, Clone)]
pub struct ShiftedFk {
    pub fk: FkField,
    pub t0: f64,
}

impl Field<2> for ShiftedFk {
    fn jet(&self, p: [f64; 2]) -> std::result::Result<Jet<2>, EvalError> {
        let [y, t] = Jet::<2>::vars([p[0], p[1] - self.t0]);
        self.fk.eval(y, t)
    }
    fn describe(&self) -> String {
        format!("f_k(y, t - {}), k = {}, delta = {}", self.t0, self.fk.k, self.fk.bumps.delta)
    }
}

/// The deformation `h_kν^H` of a certificate, on the X-form patch `θ(y, t) = (yG(t), y, t)`.
pub fn hk_deformation(s: &GraphicalStrip, cert: &InstabilityCertificate) -> Result<NormalField> {
    let bumps = BumpFamily::new(cert.delta)?;
    let k = cert.k0 as f64;
    let g = recentered(s.g.clone(), cert.t0);
    let fk = FkField { bumps, k, gk: Arc::new(MollifiedG::new(g, bumps, k)) };
    let r = fk.support();
    let support = Rect { u0: r.u0, u1: r.u1, v0: r.v0 + cert.t0, v1: r.v1 + cert.t0 };
    Ok(NormalField { h: ScalarOnPatch::Params(Arc::new(ShiftedFk { fk, t0: cert.t0 })), support })
}

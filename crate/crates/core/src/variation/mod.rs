//! Deformations `S^λ = S + λ𝒳` of parameterized surfaces and the first and
//! second variation of the H-perimeter along them.
//!
//! Numeric variations differentiate `λ ↦ W_λ(u, v)` under the integral sign:
//! all stencil points share one adaptive mesh, so the finite differences see
//! no quadrature noise from mesh changes between values of `λ`.

mod fields;
mod formula;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use fields::{smooth_bump, AmbientBump, BumpField, NormalField, ParamBump, ScalarOnPatch, X1Field};
pub use formula::{
    first_variation_formula, normal_bracket, second_variation_normal_formula, second_variation_x1_formula,
    strip_second_variation, StripMode,
};

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::gexpr::{Dual, Jet};
use crate::hcalc::{h_perimeter, pqw, QuadResult, QuadratureSpec};
use crate::surfaces::{Patch, SmoothPatch};

/// A compactly supported field `𝒳 = aX₁ + bX₂ + kT` on a patch.
pub trait Deformation: Send + Sync + fmt::Debug {
    /// Closed parameter rectangle outside which `a = b = k = 0`.
    fn support(&self) -> Rect;

    /// `(a, b, k)` with first partials in `(u, v)`; `base` is the patch jet at `(u, v)`.
    fn fields(&self, base: &[Jet<2>; 3], u: f64, v: f64) -> Result<[Dual<2>; 3]>;

    fn describe(&self) -> String;
}

impl<T: Deformation + ?Sized> Deformation for Arc<T> {
    fn support(&self) -> Rect {
        (**self).support()
    }
    fn fields(&self, base: &[Jet<2>; 3], u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        (**self).fields(base, u, v)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// `θ + λ(a, b, k − ay/2 + bx/2)` as a first-order jet.
fn displaced(base: &[Jet<2>; 3], f: &[Dual<2>; 3], lambda: f64) -> [Dual<2>; 3] {
    let [x, y, t] = base.map(|c| c.first());
    let [a, b, k] = *f;
    [x + a * lambda, y + b * lambda, t + (k - a * y * 0.5 + b * x * 0.5) * lambda]
}

/// `S^λ`, as a patch with first derivatives.
#[derive(Clone, Debug)]
pub struct DeformedPatch {
    pub base: Arc<dyn SmoothPatch>,
    pub deformation: Arc<dyn Deformation>,
    pub lambda: f64,
}

impl Patch for DeformedPatch {
    fn domain(&self) -> Rect {
        self.base.domain()
    }
    fn first(&self, u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        let j = self.base.jet(u, v)?;
        let f = self.deformation.fields(&j, u, v)?;
        Ok(displaced(&j, &f, self.lambda))
    }
}

/// Largest `|a|, |b|, |k|` on a ring of `n` points per side of the support boundary.
pub fn support_leak(base: &dyn SmoothPatch, def: &dyn Deformation, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for (u, v) in def.support().boundary_ring(n) {
        let f = def.fields(&base.jet(u, v)?, u, v)?;
        for c in f {
            worst = worst.max(c.v.abs());
        }
    }
    Ok(worst)
}

fn check_support(base: &dyn SmoothPatch, def: &dyn Deformation) -> Result<Rect> {
    let (d, s) = (base.domain(), def.support());
    if !d.contains_rect(&s) {
        return Err(Error::precondition(format!(
            "deformation support [{}, {}] x [{}, {}] leaves the patch domain",
            s.u0, s.u1, s.v0, s.v1
        )));
    }
    let leak = support_leak(base, def, 16)?;
    if leak >= 1e-14 {
        return Err(Error::precondition(format!("deformation does not vanish on its support boundary ({leak:e})")));
    }
    Ok(s)
}

pub fn deform(base: Arc<dyn SmoothPatch>, def: Arc<dyn Deformation>, lambda: f64) -> Result<DeformedPatch> {
    check_support(&*base, &*def)?;
    Ok(DeformedPatch { base, deformation: def, lambda })
}

/// One row of a perimeter profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub perimeter: f64,
    pub error: f64,
}

/// `P_H(S^λ)` for each `λ`.
pub fn perimeter_profile(
    base: Arc<dyn SmoothPatch>,
    def: Arc<dyn Deformation>,
    lambdas: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<ProfilePoint>> {
    check_support(&*base, &*def)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let p = DeformedPatch { base: base.clone(), deformation: def.clone(), lambda };
            let r: QuadResult<1> = h_perimeter(&p, quad)?;
            Ok(ProfilePoint { lambda, perimeter: r.value[0], error: r.error[0] })
        })
        .collect()
}

/// A finite-difference derivative with its Richardson pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdEstimate {
    pub value: f64,
    pub uncertainty: f64,
    /// Stencil spacing `h`; the pair uses `h` and `h/2`.
    pub step: f64,
    pub coarse: f64,
    pub fine: f64,
    pub quad_error: f64,
}

impl FdEstimate {
    fn richardson(coarse: (f64, f64), fine: (f64, f64), step: f64) -> Self {
        let value = (16.0 * fine.0 - coarse.0) / 15.0;
        let quad_error = (16.0 * fine.1 + coarse.1) / 15.0;
        FdEstimate {
            value,
            uncertainty: (value - fine.0).abs() + quad_error,
            step,
            coarse: coarse.0,
            fine: fine.0,
            quad_error,
        }
    }
}

/// `(V_I, V_II)` by five-point stencils at spacings `h` and `h/2` with Richardson extrapolation.
///
/// `h` defaults to `1e-2` times the support diameter. The quadrature floor is
/// `quad.rel_tol` times the H-perimeter of the support.
pub fn variations_numeric(
    base: &dyn SmoothPatch,
    def: &dyn Deformation,
    quad: &QuadratureSpec,
    step: Option<f64>,
) -> Result<(FdEstimate, FdEstimate)> {
    let rect = check_support(base, def)?;
    let h = step.unwrap_or(1e-2 * rect.diameter());
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let w_at = |u: f64, v: f64, lambdas: &[f64]| -> Result<Vec<f64>> {
        let j = base.jet(u, v)?;
        let f = def.fields(&j, u, v)?;
        Ok(lambdas
            .iter()
            .map(|&l| {
                let d = displaced(&j, &f, l);
                let [p, q, _] = pqw(d.map(|c| c.v), d.map(|c| c.g[0]), d.map(|c| c.g[1]));
                p.hypot(q)
            })
            .collect())
    };
    let sigma = crate::hcalc::quad::integrate_2d(|u, v| Ok([w_at(u, v, &[0.0])?[0]]), rect, quad)?.value[0];
    let spec = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * sigma.abs()));
    let ls = [-2.0 * h, -h, -0.5 * h, 0.0, 0.5 * h, h, 2.0 * h];
    let r = crate::hcalc::quad::integrate_2d(
        |u, v| {
            let w = w_at(u, v, &ls)?;
            let [m2, m1, mh, w0, ph, p1, p2] = [w[0], w[1], w[2], w[3], w[4], w[5], w[6]];
            Ok([
                (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
                (m1 - 8.0 * mh + 8.0 * ph - p1) / (6.0 * h),
                (-p2 + 16.0 * p1 - 30.0 * w0 + 16.0 * m1 - m2) / (12.0 * h * h),
                (-p1 + 16.0 * ph - 30.0 * w0 + 16.0 * mh - m1) / (3.0 * h * h),
            ])
        },
        rect,
        &spec,
    )?;
    let v1 = FdEstimate::richardson((r.value[0], r.error[0]), (r.value[1], r.error[1]), h);
    let v2 = FdEstimate::richardson((r.value[2], r.error[2]), (r.value[3], r.error[3]), h);
    Ok((v1, v2))
}

pub fn first_variation_numeric(
    base: &dyn SmoothPatch,
    def: &dyn Deformation,
    quad: &QuadratureSpec,
) -> Result<FdEstimate> {
    Ok(variations_numeric(base, def, quad, None)?.0)
}

pub fn second_variation_numeric(
    base: &dyn SmoothPatch,
    def: &dyn Deformation,
    quad: &QuadratureSpec,
) -> Result<FdEstimate> {
    Ok(variations_numeric(base, def, quad, None)?.1)
}

/// First and second variation by both routes, where a formula applies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    pub deformation: String,
    pub support_perimeter: f64,
    pub v1_numeric: FdEstimate,
    pub v1_formula: Option<(f64, f64)>,
    pub v2_numeric: FdEstimate,
    pub v2_formula: Option<(f64, f64)>,
}

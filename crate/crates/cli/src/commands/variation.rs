use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hbern::domain::Rect;
use hbern::error::{Error, Result};
use hbern::hcalc::QuadratureSpec;
use hbern::instability::{certify_instability, hk_deformation};
use hbern::surfaces::{Branch, Surface};
use hbern::variation::{
    first_variation_formula, perimeter_profile, second_variation_normal_formula, second_variation_x1_formula,
    strip_second_variation, variations_numeric, AmbientBump, BumpField, Deformation, FdEstimate, NormalField,
    ParamBump, ScalarOnPatch, StripMode, X1Field,
};

use super::{quad_spec, Report};
use crate::config::RunConfig;
use crate::surface::{build_surface, param_window};

/// A value from a closed formula with its quadrature error estimate.
#[derive(Serialize)]
struct Quadrature {
    value: f64,
    error: f64,
}

impl From<(f64, f64)> for Quadrature {
    fn from((value, error): (f64, f64)) -> Self {
        Self { value, error }
    }
}

#[derive(Serialize)]
struct Entry {
    deformation: String,
    v1_numeric: FdEstimate,
    v1_formula: Quadrature,
    v2_numeric: FdEstimate,
    v2_formula: Option<Quadrature>,
    /// The same second variation through the strip's `(y, t)` closed form.
    v2_strip: Option<Quadrature>,
}

#[derive(Serialize)]
struct VariationReport {
    command: &'static str,
    surface: String,
    window: Rect,
    support: Rect,
    family: String,
    fd_step: Option<f64>,
    entries: Vec<Entry>,
    min_v2: f64,
    max_abs_v1: f64,
}

const PROFILE_POINTS: i32 = 4;

pub fn run(rc: &RunConfig) -> Result<Report> {
    let built = build_surface(rc)?;
    let window = param_window(rc, &built)?;
    let quad = quad_spec(rc)?;
    let fd_quad = quad.with_rel_tol(quad.rel_tol.min(1e-11));
    let fd_step: Option<f64> = rc.get("fd_step")?;
    let support = match rc.list("support", 4)? {
        Some(v) => Rect::new(v[0], v[1], v[2], v[3])?,
        None => {
            let (cu, cv) = window.center();
            let (hu, hv) = (0.25 * window.width(), 0.25 * window.height());
            Rect::new(cu - hu, cu + hu, cv - hv, cv + hv)?
        }
    };
    let family = rc.raw("family").unwrap_or("normal-bump").to_string();
    let count: usize = rc.get("count")?.unwrap_or(5);
    if family == "hk" {
        return run_hk(&built, &quad, &fd_quad, fd_step);
    }
    let patch = built.surface.patch(window)?;
    let phi = built.surface.defining();

    let mut defs: Vec<(Arc<dyn Deformation>, Option<Quadrature>, Option<Quadrature>)> = Vec::new();
    match family.as_str() {
        "normal-bump" => {
            let bump = ParamBump { rect: support };
            let h = ScalarOnPatch::Params(Arc::new(bump));
            let formula = match &phi {
                Some(phi) => Some(second_variation_normal_formula(phi, &*patch, &h, support, &quad)?.into()),
                None => None,
            };
            let strip = match &built.surface {
                Surface::Strip(s) if s.branch == Branch::X => {
                    Some(strip_second_variation(s, &bump, support, StripMode::Normal, &quad)?.into())
                }
                _ => None,
            };
            defs.push((Arc::new(NormalField { h, support }), formula, strip));
        }
        "x1-bump" => {
            let (cu, cv) = support.center();
            let c = patch.point(cu, cv)?;
            let r = 0.45 * support.width().min(support.height());
            let a = AmbientBump::new(c.to_array(), [r; 3]);
            let formula = match &phi {
                Some(phi) => Some(second_variation_x1_formula(phi, &*patch, &a, support, &quad)?.into()),
                None => None,
            };
            defs.push((Arc::new(X1Field { a: ScalarOnPatch::Ambient(Arc::new(a)), support }), formula, None));
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(rc.seed()?);
            for _ in 0..count {
                let mut poly = [[0.0; 3]; 3];
                for row in &mut poly {
                    for c in row.iter_mut() {
                        *c = rng.gen_range(-1.0..1.0);
                    }
                }
                defs.push((Arc::new(BumpField { rect: support, poly }), None, None));
            }
        }
        f => return Err(Error::invalid(format!("unknown family `{f}` (normal-bump, x1-bump, random, hk)"))),
    }

    let mut entries = Vec::with_capacity(defs.len());
    for (def, v2_formula, v2_strip) in &defs {
        let (v1n, v2n) = variations_numeric(&*patch, &**def, &fd_quad, fd_step)?;
        let v1f = first_variation_formula(&*patch, &**def, &quad)?;
        entries.push(Entry {
            deformation: def.describe(),
            v1_numeric: v1n,
            v1_formula: v1f.into(),
            v2_numeric: v2n,
            v2_formula: v2_formula.as_ref().map(|q| Quadrature { value: q.value, error: q.error }),
            v2_strip: v2_strip.as_ref().map(|q| Quadrature { value: q.value, error: q.error }),
        });
    }

    let csv = if rc.path("csv").is_some() {
        let h = fd_step.unwrap_or(1e-2 * support.diameter());
        let lambdas: Vec<f64> = (-PROFILE_POINTS..=PROFILE_POINTS).map(|k| k as f64 * 5.0 * h).collect();
        let prof = perimeter_profile(patch.clone(), defs[0].0.clone(), &lambdas, &quad)?;
        let mut s = String::from("lambda,P_H,error\n");
        for p in prof {
            s.push_str(&format!("{},{:.15e},{:e}\n", p.lambda, p.perimeter, p.error));
        }
        Some(s)
    } else {
        None
    };

    let report = VariationReport {
        command: "variation",
        surface: built.surface.describe(),
        window,
        support,
        family,
        fd_step,
        min_v2: entries.iter().map(|e| e.v2_numeric.value).fold(f64::INFINITY, f64::min),
        max_abs_v1: entries.iter().map(|e| e.v1_numeric.value.abs()).fold(0.0, f64::max),
        entries,
    };
    Report::new(&report, csv)
}

/// The certificate's own deformation `h_kν^H` on an X-form strip, over a window just covering its support.
fn run_hk(
    built: &crate::surface::BuiltSurface,
    quad: &QuadratureSpec,
    fd_quad: &QuadratureSpec,
    fd_step: Option<f64>,
) -> Result<Report> {
    let Surface::Strip(strip) = &built.surface else {
        return Err(Error::invalid("family hk needs a strip (--strip)"));
    };
    let strip = strip.to_x_form();
    let cert = certify_instability(&strip, None, quad)?;
    let def = hk_deformation(&strip, &cert)?;
    let support = def.support;
    let pad = |lo: f64, hi: f64| (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo));
    let (u0, u1) = pad(support.u0, support.u1);
    let (v0, v1) = pad(support.v0, support.v1);
    let window = Rect::new(u0, u1, v0.max(strip.interval.lo), v1.min(strip.interval.hi))?;
    let surface = Surface::Strip(strip.clone());
    let patch = surface.patch(window)?;
    let (v1n, v2n) = variations_numeric(&*patch, &def, fd_quad, fd_step)?;
    let v1f = first_variation_formula(&*patch, &def, quad)?;
    let entry = Entry {
        deformation: def.describe(),
        v1_numeric: v1n,
        v1_formula: v1f.into(),
        v2_numeric: v2n,
        v2_formula: None,
        v2_strip: Some(Quadrature { value: cert.v2, error: cert.quad_err }),
    };
    let report = VariationReport {
        command: "variation",
        surface: surface.describe(),
        window,
        support,
        family: "hk".into(),
        fd_step,
        min_v2: entry.v2_numeric.value,
        max_abs_v1: entry.v1_numeric.value.abs(),
        entries: vec![entry],
    };
    Report::new(&report, None)
}

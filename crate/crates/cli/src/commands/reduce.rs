use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hbern::bernstein::{reduce_graph, ExtractionSummary, StageRecord};
use hbern::domain::{Interval, Rect};
use hbern::error::{Error, Result};
use hbern::gexpr::ScalarFn;
use hbern::instability::{certify_instability, InstabilityCertificate};
use hbern::surfaces::vertical_plane;
use hbern::variation::{variations_numeric, BumpField};

use super::{quad_spec, Report};
use crate::config::RunConfig;

/// Random deformations tried on a vertical plane.
const PLANE_SAMPLES: usize = 8;

#[derive(Serialize)]
struct PlaneStability {
    /// `ax + by = γ` with `(a, b, γ)`.
    plane: [f64; 3],
    /// Largest deviation of `ψ` from the fitted line over the probe.
    fit_residual: f64,
    stable: bool,
    samples: usize,
    min_v2: f64,
    max_abs_v1: f64,
}

#[derive(Serialize)]
struct ReduceReport {
    command: &'static str,
    status: &'static str,
    psi: String,
    probe: Rect,
    stages: Vec<StageRecord>,
    strip: Option<ExtractionSummary>,
    rejection: Option<String>,
    certificate: Option<InstabilityCertificate>,
    stability: Option<PlaneStability>,
}

pub fn run(rc: &RunConfig) -> Result<Report> {
    let src = rc
        .raw("psi")
        .or_else(|| rc.raw("graph_yt"))
        .ok_or_else(|| Error::invalid("reduce needs a graph x = psi(y, t) (--psi)"))?;
    let src = src.trim();
    let src = src.strip_prefix("psi=").unwrap_or(src).trim();
    let psi = ScalarFn::parse(src, &["y", "t"])?;
    let p = rc.list("probe", 4)?.unwrap_or(vec![0.5, 1.5, -0.5, 0.5]);
    let probe = Rect::new(p[0], p[1], p[2], p[3])?;
    let t_domain = match rc.list("t_domain", 2)? {
        Some(v) => Interval::new(v[0], v[1])?,
        None => Interval::real_line(),
    };
    let then_certify = rc.flag("then_certify")?;
    let quad = quad_spec(rc)?;
    let red = reduce_graph(&psi, probe, t_domain);
    let mut report = ReduceReport {
        command: "reduce",
        status: "reduced",
        psi: src.to_string(),
        probe,
        stages: red.stages,
        strip: None,
        rejection: None,
        certificate: None,
        stability: None,
    };
    match red.result {
        Ok(ex) => {
            report.strip = Some(ex.summary());
            if then_certify {
                report.certificate = Some(certify_instability(&ex.strip, None, &quad)?);
                report.status = "unstable";
            }
        }
        Err(Error::Rejected { stage, reason }) if stage == "psi_t" && then_certify => {
            report.rejection = Some(reason.clone());
            report.stability = Some(plane_stability(&psi, probe, rc.seed()?, &quad).map_err(|e| match e {
                Error::Rejected { .. } => Error::rejected(&stage, reason),
                e => e,
            })?);
            report.status = "stable";
        }
        Err(e @ (Error::Rejected { .. } | Error::LineSeed { .. })) => {
            report.rejection = Some(e.to_string());
            report.status = "rejected";
            let mut r = Report::new(&report, None)?;
            r.exit_code = 3;
            return Ok(r);
        }
        Err(e) => return Err(e),
    }
    Report::new(&report, None)
}

/// Fits `ψ = a·y + c` on the probe and samples the second variation of the plane `x − a·y = c`.
fn plane_stability(
    psi: &ScalarFn,
    probe: Rect,
    seed: u64,
    quad: &hbern::hcalc::QuadratureSpec,
) -> Result<PlaneStability> {
    let pts = probe.grid(9, 9);
    let vals: Vec<f64> = pts.iter().map(|&(y, t)| psi.value(&[y, t]).map_err(Error::from)).collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let (sy, sv) = (pts.iter().map(|p| p.0).sum::<f64>(), vals.iter().sum::<f64>());
    let syy = pts.iter().map(|p| p.0 * p.0).sum::<f64>();
    let syv = pts.iter().zip(&vals).map(|(p, v)| p.0 * v).sum::<f64>();
    let a = (m * syv - sy * sv) / (m * syy - sy * sy);
    let c = (sv - a * sy) / m;
    let fit_residual = pts.iter().zip(&vals).map(|(p, v)| (v - a * p.0 - c).abs()).fold(0.0, f64::max);
    let scale = 1.0 + vals.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if fit_residual > 1e-8 * scale {
        return Err(Error::rejected(
            "plane",
            format!("vertical but not a plane over the probe (line fit residual {fit_residual:e})"),
        ));
    }
    let plane = [1.0, -a, c];
    let surface = vertical_plane(plane[0], plane[1], plane[2])?;
    let window = Rect::square(-1.0, 1.0)?;
    let patch = surface.patch(window)?;
    let support = Rect::square(-0.5, 0.5)?;
    let fd_quad = quad.with_rel_tol(quad.rel_tol.min(1e-11));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut min_v2, mut max_abs_v1) = (f64::INFINITY, 0.0f64);
    for _ in 0..PLANE_SAMPLES {
        let mut poly = [[0.0; 3]; 3];
        for c in poly.iter_mut().flatten() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let (v1, v2) = variations_numeric(&*patch, &BumpField { rect: support, poly }, &fd_quad, None)?;
        min_v2 = min_v2.min(v2.value);
        max_abs_v1 = max_abs_v1.max(v1.value.abs());
    }
    Ok(PlaneStability {
        plane,
        fit_residual,
        stable: min_v2 >= -1e-8,
        samples: PLANE_SAMPLES,
        min_v2,
        max_abs_v1,
    })
}

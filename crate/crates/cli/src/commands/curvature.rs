use rayon::prelude::*;
use serde::Serialize;

use hbern::domain::Rect;
use hbern::error::{Error, Result};
use hbern::hcalc::{characteristic_scan, frame_from_patch_unchecked, hmean, hmean_patch, At, CharPoint, EPS_CHAR};

use super::Report;
use crate::config::RunConfig;
use crate::surface::{build_surface, param_window};

#[derive(Serialize)]
struct SigmaSummary {
    count: usize,
    /// Bounding box of the refined points, `[min, max]` per coordinate.
    x: Option<[f64; 2]>,
    y: Option<[f64; 2]>,
    t: Option<[f64; 2]>,
    points: Vec<CharPoint>,
}

#[derive(Serialize)]
struct CurvatureReport {
    command: &'static str,
    surface: String,
    kind: &'static str,
    window: Rect,
    grid: usize,
    points_evaluated: usize,
    points_characteristic: usize,
    max_abs_h: f64,
    /// Largest disagreement between the representation's own route and the patch route.
    error_estimate: f64,
    sigma: SigmaSummary,
}

struct Row {
    u: f64,
    v: f64,
    h: Option<f64>,
    diff: f64,
}

/// Largest number of refined characteristic points listed in the record.
const SIGMA_LIST: usize = 64;

pub fn run(rc: &RunConfig) -> Result<Report> {
    let built = build_surface(rc)?;
    let window = param_window(rc, &built)?;
    let n: usize = rc.get("grid")?.unwrap_or(101);
    let scan: usize = rc.get("scan")?.unwrap_or(41);
    if n < 2 {
        return Err(Error::invalid("grid needs at least 2 points per axis"));
    }
    let patch = built.surface.patch(window)?;
    let has_defining = built.surface.defining().is_some();
    let pts = window.grid(n, n);
    let rows: Vec<Row> = pts
        .par_iter()
        .map(|&(u, v)| -> Result<Row> {
            let fr = frame_from_patch_unchecked(&*patch, u, v)?;
            if fr.characteristic {
                return Ok(Row { u, v, h: None, diff: 0.0 });
            }
            let via_patch = hmean_patch(&*patch, u, v);
            let own = if has_defining { hmean(&built.surface, At::Ambient(patch.point(u, v)?)) } else { via_patch.clone() };
            match (own, via_patch) {
                (Ok(a), Ok(b)) => Ok(Row { u, v, h: Some(a), diff: (a - b).abs() }),
                (Err(Error::Characteristic { .. }), _) | (_, Err(Error::Characteristic { .. })) => {
                    Ok(Row { u, v, h: None, diff: 0.0 })
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let sigma = characteristic_scan(&*patch, scan, EPS_CHAR)?;
    let bbox = |f: fn(&CharPoint) -> f64| {
        sigma.iter().map(f).fold(None, |acc: Option<[f64; 2]>, x| match acc {
            None => Some([x, x]),
            Some([a, b]) => Some([a.min(x), b.max(x)]),
        })
    };
    let summary = SigmaSummary {
        count: sigma.len(),
        x: bbox(|c| c.point.x),
        y: bbox(|c| c.point.y),
        t: bbox(|c| c.point.t),
        points: sigma.iter().take(SIGMA_LIST).copied().collect(),
    };
    let evaluated = rows.iter().filter(|r| r.h.is_some()).count();
    let report = CurvatureReport {
        command: "curvature",
        surface: built.surface.describe(),
        kind: built.kind,
        window,
        grid: n,
        points_evaluated: evaluated,
        points_characteristic: rows.len() - evaluated,
        max_abs_h: rows.iter().filter_map(|r| r.h).fold(0.0, |m, h| m.max(h.abs())),
        error_estimate: rows.iter().fold(0.0, |m, r| m.max(r.diff)),
        sigma: summary,
    };
    let mut csv = String::from("u,v,H\n");
    for r in &rows {
        match r.h {
            Some(h) => csv.push_str(&format!("{},{},{:e}\n", r.u, r.v, h)),
            None => csv.push_str(&format!("{},{},\n", r.u, r.v)),
        }
    }
    Report::new(&report, Some(csv))
}

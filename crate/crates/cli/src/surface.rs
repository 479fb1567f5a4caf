//! Surface specs from the `[surface]` keys.

use std::sync::Arc;

use hbern::domain::{Interval, Rect, DEFAULT_WINDOW};
use hbern::error::{Error, Result};
use hbern::gexpr::{parse_g, ScalarFn, UniFn};
use hbern::hgroup::GroupPoint;
use hbern::surfaces::{
    circle_cylinder, graph_xy_new, graph_yt_new, strip_new, type2_xygraph, vertical_plane, Branch, GraphicalStrip,
    Surface,
};

use crate::config::{parse_list, RunConfig};

/// A built surface with the parameter window its patch uses by default.
#[derive(Clone, Debug)]
pub struct BuiltSurface {
    pub surface: Surface,
    pub kind: &'static str,
    /// Bounds on the second patch parameter imposed by the representation (the strip's `I`).
    pub v_bounds: Option<Interval>,
}

/// `G` from a builtin name (`tan_tanh`, `affine(a, b)`, `cot_shift`, `square_pos`) or an expression in `t`.
pub fn parse_generator(src: &str) -> Result<(Arc<dyn UniFn>, Option<Interval>)> {
    let src = src.trim();
    let src = src.strip_prefix("G=").or_else(|| src.strip_prefix("G =")).unwrap_or(src).trim();
    let (name, params) = match src.split_once('(') {
        Some((n, rest)) if rest.ends_with(')') && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
            (n.trim(), Some(&rest[..rest.len() - 1]))
        }
        _ => (src, None),
    };
    if matches!(name, "tan_tanh" | "affine" | "cot_shift" | "square_pos") {
        let ps = match params {
            Some(p) if !p.trim().is_empty() => {
                let n = p.split(',').count();
                parse_list(p, n).map_err(Error::invalid)?
            }
            _ => Vec::new(),
        };
        let f = ScalarFn::builtin(name, &ps)?;
        let (lo, hi) = f.as_builtin().map(|b| b.interval()).expect("builtin");
        return Ok((Arc::new(f), Some(Interval::new(lo, hi)?)));
    }
    Ok((Arc::new(parse_g(src)?), None))
}

fn strip_expr<'a>(s: &'a str, name: &str) -> &'a str {
    let s = s.trim();
    s.strip_prefix(&format!("{name}=")).map(str::trim).unwrap_or(s)
}

fn interval_of(rc: &RunConfig, default: Option<Interval>) -> Result<Interval> {
    match rc.list("I", 2)? {
        Some(v) => Interval::new(v[0], v[1]),
        None => Ok(default.unwrap_or(Interval::real_line())),
    }
}

/// Builds the surface named by exactly one of the `[surface]` kind keys.
pub fn build_surface(rc: &RunConfig) -> Result<BuiltSurface> {
    let kinds = ["strip", "graph_xy", "graph_yt", "plane", "cylinder", "type2"];
    let given: Vec<&str> = kinds.iter().copied().filter(|k| rc.raw(k).is_some()).collect();
    let kind = match given.as_slice() {
        [k] => *k,
        [] => {
            return Err(Error::invalid(
                "no surface given (use one of --strip, --graph-xy, --graph-yt, --plane, --cylinder, --type2)",
            ))
        }
        many => return Err(Error::invalid(format!("more than one surface given: {}", many.join(", ")))),
    };
    let raw = rc.raw(kind).unwrap_or_default();
    match kind {
        "strip" => {
            let strip = build_strip(rc)?;
            let v_bounds = Some(strip.interval);
            Ok(BuiltSurface { surface: Surface::Strip(strip), kind: "strip", v_bounds })
        }
        "graph_xy" => {
            let f = ScalarFn::parse(strip_expr(raw, "f"), &["x", "y"])?;
            Ok(BuiltSurface { surface: graph_xy_new(f, None)?, kind: "graph_xy", v_bounds: None })
        }
        "graph_yt" => {
            let psi = ScalarFn::parse(strip_expr(raw, "psi"), &["y", "t"])?;
            Ok(BuiltSurface { surface: graph_yt_new(psi)?, kind: "graph_yt", v_bounds: None })
        }
        "plane" => {
            let v = parse_list(raw, 3).map_err(|e| Error::invalid(format!("plane: {e}")))?;
            Ok(BuiltSurface { surface: vertical_plane(v[0], v[1], v[2])?, kind: "plane", v_bounds: None })
        }
        "cylinder" => {
            let v = parse_list(raw, 3).map_err(|e| Error::invalid(format!("cylinder: {e}")))?;
            Ok(BuiltSurface { surface: circle_cylinder([v[0], v[1]], v[2])?, kind: "cylinder", v_bounds: None })
        }
        _ => {
            let ab = parse_list(raw, 2).map_err(|e| Error::invalid(format!("type2: {e}")))?;
            let g0 = rc.list("g0", 3)?.unwrap_or(vec![0.0; 3]);
            let h0 = ScalarFn::parse(rc.raw("h0").unwrap_or("0"), &["s"])?;
            let s = type2_xygraph(ab[0], ab[1], GroupPoint::new(g0[0], g0[1], g0[2]), &h0)?;
            Ok(BuiltSurface { surface: s, kind: "type2", v_bounds: None })
        }
    }
}

/// The strip named by `strip`, `I` and `branch`.
pub fn build_strip(rc: &RunConfig) -> Result<GraphicalStrip> {
    let raw = rc.raw("strip").ok_or_else(|| Error::invalid("this command needs a strip (--strip)"))?;
    let (g, natural) = parse_generator(raw)?;
    let interval = interval_of(rc, natural)?;
    let branch = match rc.raw("branch").unwrap_or("x") {
        "x" | "X" => Branch::X,
        "y" | "Y" => Branch::Y,
        b => return Err(Error::invalid(format!("branch must be x or y, got `{b}`"))),
    };
    strip_new(g, interval, branch)
}

/// The parameter window: `window` on both axes, the second clipped to `v_bounds`.
pub fn param_window(rc: &RunConfig, built: &BuiltSurface) -> Result<Rect> {
    let w = rc.list("window", 2)?.unwrap_or(vec![DEFAULT_WINDOW.0, DEFAULT_WINDOW.1]);
    let (mut v0, mut v1) = (w[0], w[1]);
    if let Some(b) = built.v_bounds {
        // I is open: stay a hair inside a finite end
        if b.lo.is_finite() {
            v0 = v0.max(b.lo + 1e-9 * (1.0 + b.lo.abs()));
        }
        if b.hi.is_finite() {
            v1 = v1.min(b.hi - 1e-9 * (1.0 + b.hi.abs()));
        }
    }
    Rect::new(w[0], w[1], v0, v1)
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::defining::{DefiningFn, StripDefining};
use super::patch::StripPatch;
use crate::domain::{Interval, Rect, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::gexpr::UniFn;

/// Grid size of the monotonicity scan.
pub const SCAN_POINTS: usize = 1024;
/// `G′` below `−NEG_TOL` rejects the strip.
pub const NEG_TOL: f64 = 1e-12;
/// `G′ > EPS_STRICT` counts as strictly increasing.
pub const EPS_STRICT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `x = yG(t)`.
    X,
    /// `y = −xG(t)`.
    Y,
}

/// The surface `x = yG(t)` (or `y = −xG(t)`), `t ∈ I`, with `G′ ≥ 0`.
#[derive(Clone, Debug)]
pub struct GraphicalStrip {
    pub g: Arc<dyn UniFn>,
    pub interval: Interval,
    pub branch: Branch,
    /// A maximal scanned run where `G′ > 0`.
    pub strict_window: Option<Interval>,
}

impl GraphicalStrip {
    pub fn is_strict(&self) -> bool {
        self.strict_window.is_some()
    }

    /// The same generator on the X-form; the rotation `(x, y, t) ↦ (y, −x, t)`
    /// carries the Y-form surface onto it.
    pub fn to_x_form(&self) -> GraphicalStrip {
        GraphicalStrip { branch: Branch::X, ..self.clone() }
    }

    /// `I` truncated to the default window.
    pub fn window(&self) -> Interval {
        self.interval.truncate(DEFAULT_WINDOW.0, DEFAULT_WINDOW.1).unwrap_or(self.interval)
    }

    pub fn g_derivs(&self, t: f64) -> Result<[f64; 4]> {
        Ok(self.g.derivs(t)?)
    }
}

/// Scans `G′` on `I` and builds the strip.
pub fn strip_new(g: Arc<dyn UniFn>, interval: Interval, branch: Branch) -> Result<GraphicalStrip> {
    let w = interval.truncate(DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)?;
    let h = w.length() / SCAN_POINTS as f64;
    let ts: Vec<f64> = (0..SCAN_POINTS).map(|i| w.lo + (i as f64 + 0.5) * h).collect();
    let mut dg = Vec::with_capacity(SCAN_POINTS);
    for &t in &ts {
        let d = g.derivs(t)?;
        if d[1] < -NEG_TOL {
            return Err(Error::NotAStrip(format!(
                "G' = {:e} < 0 at t = {t} for G = {}",
                d[1],
                g.describe()
            )));
        }
        dg.push(d[1]);
    }
    let strict_window = longest_strict_run(&*g, &ts, &dg, w)?;
    Ok(GraphicalStrip { g, interval, branch, strict_window })
}

fn longest_strict_run(g: &dyn UniFn, ts: &[f64], dg: &[f64], w: Interval) -> Result<Option<Interval>> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < ts.len() {
        if dg[i] > EPS_STRICT {
            let start = i;
            while i < ts.len() && dg[i] > EPS_STRICT {
                i += 1;
            }
            let len = ts[i - 1] - ts[start];
            if best.map_or(true, |(a, b)| len > ts[b - 1] - ts[a]) {
                best = Some((start, i));
            }
        } else {
            i += 1;
        }
    }
    let Some((a, b)) = best else { return Ok(None) };
    let lo = if a == 0 { w.lo } else { crossing(g, ts[a - 1], ts[a])? };
    let hi = if b == ts.len() { w.hi } else { crossing(g, ts[b], ts[b - 1])? };
    Ok(Some(Interval::new(lo, hi)?))
}

/// Point between `out` (G′ ≤ ε) and `inn` (G′ > ε) where `G′` crosses ε.
fn crossing(g: &dyn UniFn, mut out: f64, mut inn: f64) -> Result<f64> {
    for _ in 0..80 {
        let mid = 0.5 * (out + inn);
        if mid == out || mid == inn {
            break;
        }
        if g.derivs(mid)?[1] > EPS_STRICT {
            inn = mid;
        } else {
            out = mid;
        }
    }
    Ok(0.5 * (out + inn))
}

/// Parametric view over `a_range × t_range`, where `a` is `y` (X-form) or `x` (Y-form).
pub fn strip_patch(s: &GraphicalStrip, a_range: (f64, f64), t_range: (f64, f64)) -> Result<StripPatch> {
    let inside = |t: f64| s.interval.contains(t);
    if !(inside(t_range.0) && inside(t_range.1)) {
        return Err(Error::OutsideDomain(format!(
            "t-range [{}, {}] is not inside I = ({}, {})",
            t_range.0, t_range.1, s.interval.lo, s.interval.hi
        )));
    }
    let domain = Rect::new(a_range.0, a_range.1, t_range.0, t_range.1)?;
    Ok(StripPatch { g: s.g.clone(), y_form: s.branch == Branch::Y, domain })
}

/// `x − yG(t)` or `y + xG(t)`; `|∇φ| ≥ p ≥ 1` on the X-form surface.
pub fn strip_defining(s: &GraphicalStrip) -> DefiningFn {
    let phi = StripDefining { g: s.g.clone(), y_form: s.branch == Branch::Y };
    DefiningFn::new(Arc::new(phi), Some(1.0))
}

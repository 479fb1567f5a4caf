use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::cheb::PiecewiseChebyshev;
use super::classify::{classify_seed, line_seed_characteristic, translate_seed, SeedKind};
use super::trace::seed_trace;
use crate::domain::{Interval, Rect, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::gexpr::{DomainKind, EvalError, Field, FnUni, Jet, Jet3, Scalar, ScalarFn, UniFn};
use crate::hcalc::{frame_from_patch_unchecked, hmean_defining};
use crate::hgroup::GroupPoint;
use crate::roots::{implicit_jet, increasing_root, safeguarded_newton};
use crate::surfaces::{graph_yt_new, seed_surface, strip_new, AnalyticSeed, Branch, GraphicalStrip, SeedCurve};

/// `max |ℋ|` accepted on the probe grid.
pub const HMIN_TOL: f64 = 1e-6;
/// Distance of the angle window from `{0, ±π}`.
pub const ANGLE_MARGIN: f64 = 1e-3;
/// Grid size of the injectivity scan.
pub const ANGLE_SCAN: usize = 2048;
const PROBE_GRID: usize = 7;

/// `t = f(x, y)` defined by `ψ(y, f) = x` on the sheet where `sign·ψ_t > 0`.
#[derive(Clone, Debug)]
pub struct ImplicitXyGraph {
    pub psi: ScalarFn,
    pub sign: f64,
    pub hint: f64,
    /// The `t`-interval of the sheet; `ψ_t` keeps its sign on it.
    pub t_domain: Interval,
}

impl ImplicitXyGraph {
    fn residual(&self, x: f64, y: f64, tau: f64) -> Result<(f64, f64)> {
        let j = self.psi.eval(&[Jet3::cst(y), Jet3::var(tau)])?;
        Ok((self.sign * (j.v - x), self.sign * j.d1))
    }

    /// The root in `t`, by Newton from `hint` and a bracketing search when that fails.
    pub fn solve(&self, x: f64, y: f64, hint: f64) -> Result<f64> {
        let mut tau = hint;
        for _ in 0..40 {
            let Ok((r, d)) = self.residual(x, y, tau) else { break };
            if !(d > 0.0) || !r.is_finite() {
                break;
            }
            let step = r / d;
            tau -= step;
            if !self.t_domain.contains(tau) {
                break;
            }
            if step.abs() <= 1e-15 * (1.0 + tau.abs()) {
                if matches!(self.residual(x, y, tau), Ok((_, d)) if d > 0.0) {
                    return Ok(tau);
                }
                break;
            }
        }
        let f = |t: f64| self.residual(x, y, t).map(|r| r.0);
        let df = |t: f64| self.residual(x, y, t).map(|r| r.1);
        match increasing_root(f, df, self.t_domain, hint)? {
            Some(t) if matches!(self.residual(x, y, t), Ok((_, d)) if d > 0.0) => Ok(t),
            _ => Err(Error::OutsideDomain(format!("no t with ψ(y, t) = x at (x, y) = ({x}, {y})"))),
        }
    }

    /// Jet of `f` along a curve `(x(s), y(s))`.
    pub fn along(&self, x: Jet3, y: Jet3, hint: f64) -> Result<Jet3> {
        let t0 = self.solve(x.v, y.v, hint)?;
        let slope = self.residual(x.v, y.v, t0)?.1;
        implicit_jet(|tau: Jet3| Ok((self.psi.eval(&[y, tau])? - x) * self.sign), t0, slope, 4)
    }
}

impl Field<2> for ImplicitXyGraph {
    fn jet(&self, p: [f64; 2]) -> std::result::Result<Jet<2>, EvalError> {
        let fail = |_| EvalError::new(DomainKind::OutsideInterval, "implicit graph", &p);
        let t0 = self.solve(p[0], p[1], self.hint).map_err(fail)?;
        let slope = self.residual(p[0], p[1], t0).map_err(fail)?.1;
        let [x, y] = Jet::<2>::vars(p);
        implicit_jet(|tau: Jet<2>| Ok((self.psi.eval(&[y, tau])? - x) * self.sign), t0, slope, 3).map_err(fail)
    }
    fn describe(&self) -> String {
        format!("t solving x = {}", self.psi)
    }
}

/// One audited pipeline stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub decision: String,
    pub values: BTreeMap<String, f64>,
}

impl StageRecord {
    fn new(stage: &str, decision: impl Into<String>, values: &[(&str, f64)]) -> Self {
        Self {
            stage: stage.into(),
            decision: decision.into(),
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// The strip found inside a `(y, t)`-graph, with the data that produced it.
#[derive(Clone, Debug)]
pub struct StripExtraction {
    /// `x = yG(t)` with `G = cot θ`, in coordinates centred at the seed circle.
    pub strip: GraphicalStrip,
    /// `θ(t) = h̃₀⁻¹(t)/R`.
    pub theta: Arc<PiecewiseChebyshev>,
    pub center: [f64; 2],
    pub radius: f64,
    pub probe: GroupPoint,
    /// Seed parameters `s` of the window, `s/R ∈ (0, π)` or `(−π, 0)`.
    pub s_window: Interval,
    /// Smallest `G′` seen on the certification grid, from `h̃₀′` directly.
    pub min_g_prime: f64,
    /// Largest difference between the interpolated and directly inverted `θ`.
    pub interpolation_error: f64,
}

/// Summary of a successful extraction for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionSummary {
    pub g: String,
    pub interval: Interval,
    pub strict_window: Option<Interval>,
    pub center: [f64; 2],
    pub radius: f64,
    pub probe: GroupPoint,
    pub s_window: Interval,
    pub min_g_prime: f64,
    pub interpolation_error: f64,
    pub chebyshev_degree: usize,
    pub chebyshev_pieces: usize,
}

impl StripExtraction {
    pub fn summary(&self) -> ExtractionSummary {
        ExtractionSummary {
            g: self.strip.g.describe(),
            interval: self.strip.interval,
            strict_window: self.strip.strict_window,
            center: self.center,
            radius: self.radius,
            probe: self.probe,
            s_window: self.s_window,
            min_g_prime: self.min_g_prime,
            interpolation_error: self.interpolation_error,
            chebyshev_degree: self.theta.degree(),
            chebyshev_pieces: self.theta.pieces(),
        }
    }
}

/// Stage log and outcome of [`reduce_graph`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub stages: Vec<StageRecord>,
    pub result: Result<StripExtraction>,
}

pub fn extract_strip(psi: &ScalarFn, probe: Rect, t_domain: Interval) -> Result<StripExtraction> {
    reduce_graph(psi, probe, t_domain).result
}

/// Reduces the H-minimal graph `x = ψ(y, t)`, `t ∈ t_domain`, near the `(y, t)`
/// rectangle `probe` to a graphical strip, recording every stage.
pub fn reduce_graph(psi: &ScalarFn, probe: Rect, t_domain: Interval) -> Reduction {
    let mut stages = Vec::new();
    let result = run(psi, probe, t_domain, &mut stages);
    if let Err(e) = &result {
        let stage = match e {
            Error::Rejected { stage, .. } => stage.clone(),
            Error::LineSeed { .. } => "classify".into(),
            _ => stages.last().map_or("input".into(), |s: &StageRecord| s.stage.clone()),
        };
        stages.push(StageRecord::new(&stage, format!("rejected: {e}"), &[]));
    }
    Reduction { stages, result }
}

fn run(psi: &ScalarFn, probe: Rect, t_domain: Interval, log: &mut Vec<StageRecord>) -> Result<StripExtraction> {
    if psi.arity() != 2 {
        return Err(Error::invalid(format!("ψ must be a function of (y, t), got `{psi}`")));
    }
    if !(t_domain.contains(probe.v0) && t_domain.contains(probe.v1)) {
        return Err(Error::invalid("the probe's t-range leaves the graph's t-domain"));
    }
    let surface = graph_yt_new(psi.clone())?;
    let phi = surface.defining().expect("graphs have defining functions");
    let grid = probe.grid(PROBE_GRID, PROBE_GRID);

    // 1. H-minimality on the probes
    let mut hmax = 0.0f64;
    let mut pts = Vec::with_capacity(grid.len());
    for &(y, t) in &grid {
        let j = psi.eval(&[Jet::<2>::var(y, 0), Jet::<2>::var(t, 1)])?;
        let g = GroupPoint::new(j.v, y, t);
        hmax = hmax.max(hmean_defining(&phi, g)?.abs());
        pts.push((g, j.g[0], j.g[1]));
    }
    if !(hmax <= HMIN_TOL) {
        return Err(Error::rejected("hminimal", format!("max |ℋ| = {hmax:e} on the probes exceeds {HMIN_TOL:e}")));
    }
    log.push(StageRecord::new("hminimal", "accepted", &[("max_abs_h", hmax), ("probes", grid.len() as f64)]));

    // 2. a probe with ψ_t ≠ 0
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let &(g0, _, psi_t) = pts.iter().max_by(|a, b| a.2.abs().total_cmp(&b.2.abs())).expect("nonempty grid");
    if !(psi_t.abs() > 1e-10 * (1.0 + scale)) {
        return Err(Error::rejected(
            "psi_t",
            format!("ψ_t vanishes on the probe region (max |ψ_t| = {:e}): the surface is vertical there", psi_t.abs()),
        ));
    }
    log.push(StageRecord::new(
        "psi_t",
        "accepted",
        &[("psi_t", psi_t), ("x", g0.x), ("y", g0.y), ("t", g0.t)],
    ));

    // 3. local graph t = f(x, y)
    let graph = ImplicitXyGraph { psi: psi.clone(), sign: psi_t.signum(), hint: g0.t, t_domain };
    let back = graph.solve(g0.x, g0.y, g0.t)?;
    log.push(StageRecord::new("xy_graph", "accepted", &[("f_residual", (back - g0.t).abs())]));

    // 4. trace the seed through the probe
    let f: Arc<dyn Field<2>> = Arc::new(graph.clone());
    let mut len = 0.5 * probe.width().min(probe.height()).max(0.1);
    let seed = loop {
        match seed_trace(f.clone(), None, [g0.x, g0.y], (-len, len), len / 32.0) {
            Ok(s) => break s,
            Err(e) if len > 0.02 => {
                log.push(StageRecord::new("trace", format!("retrying shorter: {e}"), &[("length", len)]));
                len *= 0.5;
            }
            Err(e) => return Err(e),
        }
    };
    log.push(StageRecord::new("trace", "accepted", &[("half_length", len), ("nodes", seed.samples.len() as f64)]));

    // 5. classify
    let j = Interval::new(-len, len)?;
    let class = classify_seed(&seed, j, None)?;
    log.push(StageRecord::new(
        "classify",
        format!("{:?} by {:?}", class.kind, class.rule),
        &[
            ("coplanarity", class.coplanarity),
            ("line_residual", class.line_residual),
            ("circle_residual", class.circle_residual),
            ("rule_residual", class.rule_residual),
            ("tol", class.tol),
        ],
    ));
    let (center, radius) = match class.kind {
        SeedKind::Line { a1, a2, x0, y0 } => {
            let h0 = height_along(&graph, move |s| (Jet3::cst(x0) + s * a1, Jet3::cst(y0) + s * a2));
            let line: Arc<dyn SeedCurve> = Arc::new(AnalyticSeed::line([x0, y0], [a1, a2], h0, j)?);
            let r_star = line_seed_characteristic(&class.kind, &*line, 0.0)?;
            let e = 1e-3;
            let patch = seed_surface(line, (-e, e), (r_star - e, r_star + e))?;
            let w = frame_from_patch_unchecked(&patch, 0.0, r_star)?.w;
            return Err(Error::LineSeed { s: 0.0, r_star, w });
        }
        SeedKind::Circle { center, radius, .. } => (center, radius),
    };

    // 6. the ccw circle seed and its height
    let (c1, c2, r) = (center[0], center[1], radius);
    let on_circle = (g0.x - c1).hypot(g0.y - c2) - r;
    let theta_p = (g0.y - c2).atan2(g0.x - c1);
    let h0 = height_along(&graph, move |s| {
        let a = s / r;
        (a.cos() * r + c1, a.sin() * r + c2)
    });
    let circle: Arc<dyn SeedCurve> = Arc::new(AnalyticSeed::circle(center, r, h0.clone(), Interval::new(-PI * r, PI * r)?)?);
    let h_probe = h0.derivs(r * theta_p)?[0];
    log.push(StageRecord::new(
        "circle_seed",
        "accepted",
        &[("center_x", c1), ("center_y", c2), ("radius", r), ("probe_offset", on_circle), ("probe_angle", theta_p), ("h0_residual", (h_probe - g0.t).abs())],
    ));

    // 7. move the centre to the t-axis
    let h0t = {
        let h0 = h0.clone();
        move |s: f64| -> Result<Jet3> {
            let sj = Jet3::var(s);
            let a = sj / r;
            let d = h0.derivs(s)?;
            Ok(Jet3::new(d[0], d[1], d[2], d[3]) + (a.cos() * c2 - a.sin() * c1) * (0.5 * r))
        }
    };
    let shifted = translate_seed(GroupPoint::new(-c1, -c2, 0.0), circle);
    let cross = (shifted.jets(r * theta_p)?.h0.v - h0t(r * theta_p)?.v).abs();
    log.push(StageRecord::new("translate", "accepted", &[("center_y", c2), ("h0_cross_check", cross)]));
    if c2.abs() > 1e-6 * (1.0 + r) {
        return Err(Error::rejected(
            "translate",
            format!("seed circle centred off the x-axis (y0 = {c2:e}); the translate is not a (y, t)-graph"),
        ));
    }

    // 8. h̃₀′ < 0 on a window of angles on one side of the x-axis
    if theta_p.sin().abs() < ANGLE_MARGIN {
        return Err(Error::rejected("injectivity", "the probe lies on the axis of the seed circle; move the probe"));
    }
    let side = theta_p.sin().signum();
    let (a_lo, a_hi) = if side > 0.0 { (ANGLE_MARGIN, PI - ANGLE_MARGIN) } else { (-PI + ANGLE_MARGIN, -ANGLE_MARGIN) };
    let da = (a_hi - a_lo) / ANGLE_SCAN as f64;
    let ok = |a: f64| matches!(h0t(r * a), Ok(j) if j.d1 < 0.0 && j.is_finite());
    if !ok(theta_p) {
        let d = h0t(r * theta_p).map(|j| j.d1).unwrap_or(f64::NAN);
        return Err(Error::rejected("injectivity", format!("h̃₀′ = {d:e} is not negative at the probe")));
    }
    let mut lo = theta_p;
    while lo - da >= a_lo && ok(lo - da) {
        lo -= da;
    }
    let mut hi = theta_p;
    while hi + da <= a_hi && ok(hi + da) {
        hi += da;
    }
    if !(hi - lo > 2.0 * da) {
        return Err(Error::rejected("injectivity", "the window where h̃₀′ < 0 is too short"));
    }
    let (s_lo, s_hi) = (r * lo, r * hi);
    let t_hi = h0t(s_lo)?.v;
    let t_lo = h0t(s_hi)?.v;
    let t_int = Interval::new(t_lo, t_hi)?.truncate(DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)?;
    log.push(StageRecord::new(
        "injectivity",
        "accepted",
        &[("angle_lo", lo), ("angle_hi", hi), ("t_lo", t_int.lo), ("t_hi", t_int.hi)],
    ));

    // 9. θ = h̃₀⁻¹/R, G = cot θ
    let invert = |t: f64, start: f64| -> Result<f64> {
        safeguarded_newton(
            |s| {
                let j = h0t(s)?;
                Ok((t - j.v, -j.d1))
            },
            s_lo,
            s_hi,
            start,
        )
    };
    let mut last = 0.5 * (s_lo + s_hi);
    let theta = PiecewiseChebyshev::adaptive(
        |t| {
            last = invert(t, last)?;
            Ok(last / r)
        },
        t_int.lo,
        t_int.hi,
        1e-14,
    )?;
    let theta = Arc::new(theta);
    let mut min_gp = f64::INFINITY;
    let mut interp = 0.0f64;
    let mut start = s_hi;
    for i in 0..=256 {
        let t = (t_int.lo + t_int.length() * i as f64 / 256.0).min(t_int.hi);
        let s = invert(t, start)?;
        start = s;
        let d = h0t(s)?.d1;
        let c = 1.0 / (s / r).tan();
        min_gp = min_gp.min(-(1.0 + c * c) / (r * d));
        interp = interp.max((theta.derivs(t).expect("inside")[0] - s / r).abs());
    }
    if !(min_gp > 0.0) {
        return Err(Error::rejected("invert", format!("G′ = {min_gp:e} is not positive on the window")));
    }
    let th = theta.clone();
    let name = format!(
        "cot(theta(t)), theta in {} Chebyshev pieces of degree <= {} on [{}, {}]",
        th.pieces(),
        th.degree(),
        t_int.lo,
        t_int.hi
    );
    let g: Arc<dyn UniFn> = Arc::new(FnUni::new(name, move |t| {
        let d = th.derivs(t).ok_or_else(|| EvalError::new(DomainKind::OutsideInterval, "theta(t)", &[t]))?;
        Ok(Jet3::new(d[0], d[1], d[2], d[3]).cot().as_array())
    }));
    let strip = strip_new(g, Interval::new(t_int.lo, t_int.hi)?, Branch::X)?;
    log.push(StageRecord::new(
        "invert",
        "accepted",
        &[
            ("chebyshev_degree", theta.degree() as f64),
            ("chebyshev_pieces", theta.pieces() as f64),
            ("chebyshev_tail", theta.tail),
            ("interpolation_error", interp),
            ("min_g_prime", min_gp),
        ],
    ));
    Ok(StripExtraction {
        strip,
        theta,
        center,
        radius: r,
        probe: g0,
        s_window: Interval::new(s_lo, s_hi)?,
        min_g_prime: min_gp,
        interpolation_error: interp,
    })
}

/// `h₀(s) = f(γ(s))` as a univariate function, `γ` given in Jet3 arithmetic.
fn height_along(
    graph: &ImplicitXyGraph,
    curve: impl Fn(Jet3) -> (Jet3, Jet3) + Send + Sync + 'static,
) -> Arc<dyn UniFn> {
    let g = graph.clone();
    let name = format!("f along the seed, x = {}", g.psi);
    Arc::new(FnUni::new(name, move |s| {
        let (x, y) = curve(Jet3::var(s));
        g.along(x, y, g.hint)
            .map(|j| j.as_array())
            .map_err(|_| EvalError::new(DomainKind::OutsideInterval, "f along the seed", &[s]))
    }))
}

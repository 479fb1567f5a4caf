use std::sync::Arc;

use serde::Serialize;

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::hgroup::{frame_coefficients, FrameVector, GroupPoint};
use crate::surfaces::{SeedCurve, TranslatedSeed};

/// The horizontal line `r ↦ (γ + rγ′^⊥, h₀ − (r/2)γ·γ′)` through `(γ(s), h₀(s))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RuleLine {
    pub s: f64,
    pub base: GroupPoint,
    /// Euclidean direction `(γ₂′, −γ₁′, −½γ·γ′)`.
    pub direction: [f64; 3],
}

impl RuleLine {
    pub fn point(&self, r: f64) -> GroupPoint {
        let d = self.direction;
        GroupPoint::new(self.base.x + r * d[0], self.base.y + r * d[1], self.base.t + r * d[2])
    }

    /// The direction in the frame at `point(r)`; the `T` part is the same for every `r`.
    pub fn frame(&self, r: f64) -> FrameVector {
        frame_coefficients(self.point(r), self.direction)
    }
}

pub fn rule_line(seed: &dyn SeedCurve, s: f64) -> Result<RuleLine> {
    let j = seed.jets(s)?;
    let [g1, g2] = j.gamma();
    let [d1, d2] = j.tangent();
    Ok(RuleLine { s, base: GroupPoint::new(g1, g2, j.h0.v), direction: [d2, -d1, -0.5 * j.dot()] })
}

/// Seed data of `g₀ ∘ 𝒮`.
pub fn translate_seed(g0: GroupPoint, seed: Arc<dyn SeedCurve>) -> TranslatedSeed {
    TranslatedSeed { g0, base: seed }
}

/// `½(γ₁′(0)(γ·γ′)(s) − γ₁′(s)(γ·γ′)(0))`: the first component of the cross
/// product of the rule directions at `0` and `s`. It vanishes when the two rules
/// have disjoint projections to the `(y, t)` plane.
pub fn coplanarity_residual(seed: &dyn SeedCurve, s: f64) -> Result<f64> {
    let j0 = seed.jets(0.0)?;
    let js = seed.jets(s)?;
    Ok(0.5 * (j0.g1.d1 * js.dot() - js.g1.d1 * j0.dot()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedKind {
    /// `γ(s) = (x₀ + a₁s, y₀ + a₂s)`.
    Line { a1: f64, a2: f64, x0: f64, y0: f64 },
    /// `|γ − center| = radius`; `c`, `c0` are set when found through `γ₁′ = Cγ·γ′`, `|γ|² = (2/C)γ₁ + C₀`.
    Circle { c: Option<f64>, c0: Option<f64>, center: [f64; 2], radius: f64 },
}

/// Which test decided the kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassRule {
    /// `γ₁′ ≡ 0`.
    FirstComponentConstant,
    /// `γ·γ′ ≡ 0`: `|γ|` is constant.
    ConstantOrthogonal,
    /// `γ₁′ = Cγ·γ′` with `C ≠ 0`.
    Proportional,
    /// The rule condition fails on `J`; the kind comes from a direct geometric fit.
    GeometricFit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedClassification {
    pub kind: SeedKind,
    pub rule: ClassRule,
    pub tol: f64,
    /// `max |coplanarity_residual|` on `J`.
    pub coplanarity: f64,
    /// Largest distance from the least-squares line.
    pub line_residual: f64,
    /// Largest radial deviation from the least-squares circle.
    pub circle_residual: f64,
    /// Residual of the rule that decided the kind.
    pub rule_residual: f64,
}

impl SeedClassification {
    pub fn is_line(&self) -> bool {
        matches!(self.kind, SeedKind::Line { .. })
    }
}

fn line_fit(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0] / n, b + p[1] / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // principal axis of the scatter matrix
    let ang = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = ang.sin_cos();
    pts.iter().fold(0.0f64, |m, p| m.max((-(p[0] - mx) * s + (p[1] - my) * c).abs()))
}

/// Algebraic fit `x² + y² + Dx + Ey + F = 0`; `None` for (near) collinear data.
fn circle_fit(pts: &[[f64; 2]]) -> Option<([f64; 2], f64, f64)> {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0] / n, b + p[1] / n));
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for p in pts {
        let (x, y) = (p[0] - mx, p[1] - my);
        let row = [x, y, 1.0];
        let z = -(x * x + y * y);
        for i in 0..3 {
            for k in 0..3 {
                a[i][k] += row[i] * row[k];
            }
            rhs[i] += row[i] * z;
        }
    }
    let sol = solve3(a, rhs)?;
    let c = [-0.5 * sol[0], -0.5 * sol[1]];
    let r2 = c[0] * c[0] + c[1] * c[1] - sol[2];
    if !(r2 > 0.0) {
        return None;
    }
    let r = r2.sqrt();
    let res = pts.iter().fold(0.0f64, |m, p| m.max(((p[0] - mx - c[0]).hypot(p[1] - my - c[1]) - r).abs()));
    Some(([c[0] + mx, c[1] + my], r, res))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Number of samples of `J` used by [`classify_seed`].
pub const CLASSIFY_SAMPLES: usize = 257;

/// Classifies `γ(J)` as a line or a circle; `tol` defaults to `1e−7(1 + |γ|∞)`.
///
/// The rule condition is taken relative to the midpoint `m` of `J`. When it
/// holds the decision follows it: `γ₁′ ≡ 0` gives a line, `γ·γ′ ≡ 0` a
/// circle about the origin, and otherwise `C = γ₁′(m)/(γ·γ′)(m)` must satisfy
/// `γ₁′ = Cγ·γ′` and `|γ|² = (2/C)γ₁ + C₀`, a circle about `(1/C, 0)` of radius
/// `√(1/C² + C₀)`. When `γ₁′(m)` and `(γ·γ′)(m)` both vanish the rule through
/// `γ(m)` is parallel to the `x`-axis, which no graph over the `(y, t)` plane
/// contains.
pub fn classify_seed(seed: &dyn SeedCurve, j: Interval, tol: Option<f64>) -> Result<SeedClassification> {
    let n = CLASSIFY_SAMPLES;
    let mut jets = Vec::with_capacity(n);
    for i in 0..n {
        let s = j.lo + j.length() * (i as f64 + 0.5) / n as f64;
        jets.push((s, seed.jets(s)?));
    }
    let pts: Vec<[f64; 2]> = jets.iter().map(|(_, q)| q.gamma()).collect();
    let sup = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let tol = tol.unwrap_or(1e-7 * (1.0 + sup));
    let j0 = seed.jets(j.mid())?;
    let (g1p0, dot0) = (j0.g1.d1, j0.dot());
    let coplanarity = jets
        .iter()
        .fold(0.0f64, |m, (_, q)| m.max((0.5 * (g1p0 * q.dot() - q.g1.d1 * dot0)).abs()));
    let line_residual = line_fit(&pts);
    let circle = circle_fit(&pts);
    let circle_residual = circle.map_or(f64::INFINITY, |c| c.2);
    let sup_of = |f: &dyn Fn(&crate::surfaces::SeedJets) -> f64| jets.iter().fold(0.0f64, |m, (_, q)| m.max(f(q).abs()));

    let line_from_origin = || {
        let [a1, a2] = j0.tangent();
        let [g1, g2] = j0.gamma();
        let m = j.mid();
        SeedKind::Line { a1, a2, x0: g1 - a1 * m, y0: g2 - a2 * m }
    };
    let out = |kind, rule, rule_residual| {
        Ok(SeedClassification { kind, rule, tol, coplanarity, line_residual, circle_residual, rule_residual })
    };

    if coplanarity >= tol {
        if line_residual < tol {
            return out(line_from_origin(), ClassRule::GeometricFit, line_residual);
        }
        if let Some((center, radius, res)) = circle.filter(|c| c.2 < tol) {
            return out(SeedKind::Circle { c: None, c0: None, center, radius }, ClassRule::GeometricFit, res);
        }
        return Err(Error::rejected(
            "classify",
            format!(
                "the seed is neither a line nor a circle (line residual {line_residual:e}, circle residual {circle_residual:e}, rule residual {coplanarity:e})"
            ),
        ));
    }
    let (small1, small_dot) = (g1p0.abs() < tol, dot0.abs() < tol);
    if small1 && small_dot {
        return Err(Error::rejected(
            "classify",
            format!("the rule through γ(m) = {:?} is parallel to the x-axis: not a graph over the (y, t) plane", j0.gamma()),
        ));
    }
    if small1 {
        let r = sup_of(&|q| q.g1.d1);
        if r < tol {
            return out(line_from_origin(), ClassRule::FirstComponentConstant, r);
        }
        return Err(Error::rejected("classify", format!("γ₁′(m) = 0 but γ₁′ is not constant (sup {r:e})")));
    }
    if small_dot {
        let r = sup_of(&|q| q.dot());
        if r < tol {
            let n = pts.len() as f64;
            let radius = pts.iter().map(|p| p[0].hypot(p[1]) / n).sum();
            return out(SeedKind::Circle { c: None, c0: None, center: [0.0, 0.0], radius }, ClassRule::ConstantOrthogonal, r);
        }
        return Err(Error::rejected("classify", format!("(γ·γ′)(m) = 0 but γ·γ′ is not identically 0 (sup {r:e})")));
    }
    let c = g1p0 / dot0;
    let prop = sup_of(&|q| q.g1.d1 - c * q.dot());
    let n = pts.len() as f64;
    let c0 = pts.iter().map(|p| (p[0] * p[0] + p[1] * p[1] - 2.0 / c * p[0]) / n).sum::<f64>();
    let fit = pts.iter().fold(0.0f64, |m, p| m.max((p[0] * p[0] + p[1] * p[1] - 2.0 / c * p[0] - c0).abs()));
    let r2 = 1.0 / (c * c) + c0;
    let residual = prop.max(fit / (1.0 + sup));
    if residual >= tol || !(r2 > 0.0) {
        return Err(Error::rejected(
            "classify",
            format!("γ₁′ = Cγ·γ′ fails with C = {c} (residual {prop:e}, |γ|² fit {fit:e}, radius² {r2})"),
        ));
    }
    out(
        SeedKind::Circle { c: Some(c), c0: Some(c0), center: [1.0 / c, 0.0], radius: r2.sqrt() },
        ClassRule::Proportional,
        residual,
    )
}

/// `r* = h₀′(s) + ½(a₁y₀ − a₂x₀)`, where the angle function of a line seed vanishes.
pub fn line_seed_characteristic(kind: &SeedKind, seed: &dyn SeedCurve, s: f64) -> Result<f64> {
    let SeedKind::Line { a1, a2, x0, y0 } = *kind else {
        return Err(Error::invalid("r* is defined for line seeds only"));
    };
    Ok(seed.jets(s)?.h0.d1 + 0.5 * (a1 * y0 - a2 * x0))
}

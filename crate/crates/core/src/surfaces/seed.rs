use std::fmt;
use std::sync::Arc;

use super::patch::{patch_from_jet, Patch, SmoothPatch};
use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::gexpr::{Dual, FnUni, Jet, Jet3, Scalar, UniFn, UniFnExt};
use crate::hgroup::GroupPoint;

/// Third-order jets of a seed curve `γ = (γ₁, γ₂)` and its height `h₀` at one `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedJets {
    pub g1: Jet3,
    pub g2: Jet3,
    pub h0: Jet3,
}

impl SeedJets {
    pub fn gamma(&self) -> [f64; 2] {
        [self.g1.v, self.g2.v]
    }

    pub fn tangent(&self) -> [f64; 2] {
        [self.g1.d1, self.g2.d1]
    }

    /// Signed curvature `κ = γ″·(γ′)^⊥` with `(γ′)^⊥ = (γ₂′, −γ₁′)`.
    pub fn kappa(&self) -> f64 {
        self.g1.d2 * self.g2.d1 - self.g2.d2 * self.g1.d1
    }

    /// `γ·γ′`.
    pub fn dot(&self) -> f64 {
        self.g1.v * self.g1.d1 + self.g2.v * self.g2.d1
    }

    /// `γ′·γ^⊥` with `γ^⊥ = (γ₂, −γ₁)`.
    pub fn tangent_dot_perp(&self) -> f64 {
        self.g1.d1 * self.g2.v - self.g2.d1 * self.g1.v
    }

    /// The signed angle factor `h₀′ − r + (r²/2)κ + ½γ′·γ^⊥` on the rule through `s`.
    pub fn angle_factor(&self, r: f64) -> f64 {
        self.h0.d1 - r + 0.5 * r * r * self.kappa() + 0.5 * self.tangent_dot_perp()
    }
}

/// A unit-speed plane curve with a height function.
pub trait SeedCurve: Send + Sync + fmt::Debug {
    fn interval(&self) -> Interval;

    fn jets(&self, s: f64) -> Result<SeedJets>;
}

impl<T: SeedCurve + ?Sized> SeedCurve for Arc<T> {
    fn interval(&self) -> Interval {
        (**self).interval()
    }
    fn jets(&self, s: f64) -> Result<SeedJets> {
        (**self).jets(s)
    }
}

/// Seed data given by three univariate functions.
#[derive(Clone, Debug)]
pub struct AnalyticSeed {
    pub g1: Arc<dyn UniFn>,
    pub g2: Arc<dyn UniFn>,
    pub h0: Arc<dyn UniFn>,
    pub interval: Interval,
}

impl SeedCurve for AnalyticSeed {
    fn interval(&self) -> Interval {
        self.interval
    }
    fn jets(&self, s: f64) -> Result<SeedJets> {
        Ok(SeedJets { g1: self.g1.jet(s)?, g2: self.g2.jet(s)?, h0: self.h0.jet(s)? })
    }
}

impl AnalyticSeed {
    /// The counterclockwise circle `c + R(cos(s/R), sin(s/R))`.
    pub fn circle(center: [f64; 2], radius: f64, h0: Arc<dyn UniFn>, interval: Interval) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("circle radius must be positive, got {radius}")));
        }
        let (c1, c2, r) = (center[0], center[1], radius);
        let g1 = FnUni::new(format!("{c1} + {r}*cos(s/{r})"), move |s| {
            let (sn, cs) = (s / r).sin_cos();
            Ok([c1 + r * cs, -sn, -cs / r, sn / (r * r)])
        });
        let g2 = FnUni::new(format!("{c2} + {r}*sin(s/{r})"), move |s| {
            let (sn, cs) = (s / r).sin_cos();
            Ok([c2 + r * sn, cs, -sn / r, -cs / (r * r)])
        });
        Ok(Self { g1: Arc::new(g1), g2: Arc::new(g2), h0, interval })
    }

    /// The line `(x₀ + a₁s, y₀ + a₂s)`, `a₁² + a₂² = 1`.
    pub fn line(base: [f64; 2], dir: [f64; 2], h0: Arc<dyn UniFn>, interval: Interval) -> Result<Self> {
        if ((dir[0] * dir[0] + dir[1] * dir[1]) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("line direction must be a unit vector"));
        }
        let lin = |b: f64, a: f64| -> Arc<dyn UniFn> {
            Arc::new(FnUni::new(format!("{b} + {a}*s"), move |s| Ok([b + a * s, a, 0.0, 0.0])))
        };
        Ok(Self { g1: lin(base[0], dir[0]), g2: lin(base[1], dir[1]), h0, interval })
    }
}

/// The seed surface `ℱ(s, r) = (γ₁ + rγ₂′, γ₂ − rγ₁′, h₀ − (r/2)γ·γ′)`.
#[derive(Clone, Debug)]
pub struct SeedPatch {
    pub seed: Arc<dyn SeedCurve>,
    pub domain: Rect,
}

impl SmoothPatch for SeedPatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let j = self.seed.jets(u)?;
        let s = Jet::<2>::var(u, 0);
        let r = Jet::<2>::var(v, 1);
        let g1 = s.lift(j.g1.as_array());
        let g2 = s.lift(j.g2.as_array());
        let g1p = s.lift(j.g1.derivative());
        let g2p = s.lift(j.g2.derivative());
        let h0 = s.lift(j.h0.as_array());
        Ok([g1 + r * g2p, g2 - r * g1p, h0 - r * (g1 * g1p + g2 * g2p) * 0.5])
    }
}
patch_from_jet!(SeedPatch);

/// Seed surface over `s ∈ s_range`, `r ∈ r_range`.
pub fn seed_surface(seed: Arc<dyn SeedCurve>, s_range: (f64, f64), r_range: (f64, f64)) -> Result<SeedPatch> {
    let i = seed.interval();
    if !(i.contains(s_range.0) && i.contains(s_range.1)) {
        return Err(Error::OutsideDomain(format!(
            "s-range [{}, {}] is not inside the seed interval ({}, {})",
            s_range.0, s_range.1, i.lo, i.hi
        )));
    }
    Ok(SeedPatch { seed, domain: Rect::new(s_range.0, s_range.1, r_range.0, r_range.1)? })
}

/// Largest deviation of `|γ′|` from 1 over `n` samples of `[a, b]`.
pub fn unit_speed_defect(seed: &dyn SeedCurve, a: f64, b: f64, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..n {
        let s = a + (b - a) * (i as f64 + 0.5) / n as f64;
        let t = seed.jets(s)?.tangent();
        worst = worst.max((t[0].hypot(t[1]) - 1.0).abs());
    }
    Ok(worst)
}

/// Seed data of `g₀ ∘ 𝒮`: `γ̂ = γ + (x₀, y₀)`, `ĥ₀ = t₀ + h₀ + (x₀/2)γ₂ − (y₀/2)γ₁`.
#[derive(Clone, Debug)]
pub struct TranslatedSeed {
    pub g0: GroupPoint,
    pub base: Arc<dyn SeedCurve>,
}

impl SeedCurve for TranslatedSeed {
    fn interval(&self) -> Interval {
        self.base.interval()
    }
    fn jets(&self, s: f64) -> Result<SeedJets> {
        let j = self.base.jets(s)?;
        let GroupPoint { x: x0, y: y0, t: t0 } = self.g0;
        Ok(SeedJets {
            g1: j.g1 + x0,
            g2: j.g2 + y0,
            h0: j.h0 + j.g2 * (0.5 * x0) - j.g1 * (0.5 * y0) + t0,
        })
    }
}

/// `ℱ(s, r)`.
pub fn seed_point(seed: &dyn SeedCurve, s: f64, r: f64) -> Result<GroupPoint> {
    let j = seed.jets(s)?;
    Ok(GroupPoint::new(j.g1.v + r * j.g2.d1, j.g2.v - r * j.g1.d1, j.h0.v - 0.5 * r * j.dot()))
}

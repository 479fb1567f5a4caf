use std::sync::Arc;

use super::strip::{Branch, GraphicalStrip};
use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::gexpr::{Field, Jet, UniFn, UniFnExt};
use crate::hgroup::GroupPoint;
use crate::roots::{implicit_jet, increasing_root};

#[derive(Clone, Debug)]
enum Source {
    Field(Arc<dyn Field<2>>),
    /// `φ(u, v) = u·G(Ψ₂(u, v))` with `Ψ₂ + (u²/2)G(Ψ₂) = v`.
    Strip { g: Arc<dyn UniFn>, interval: Interval },
}

/// An intrinsic X₁-graph `(φ(u, v), u, v − uφ/2)`.
#[derive(Clone, Debug)]
pub struct IntrinsicGraph {
    source: Source,
}

impl IntrinsicGraph {
    pub fn from_field(phi: Arc<dyn Field<2>>) -> Self {
        Self { source: Source::Field(phi) }
    }

    /// `Ψ₂(u, v)`, the strip parameter `t` over `(u, v)`; `None` for explicit fields.
    pub fn psi2(&self, u: f64, v: f64) -> Result<Option<f64>> {
        match &self.source {
            Source::Field(_) => Ok(None),
            Source::Strip { g, interval } => solve_psi2(&**g, *interval, u, v).map(Some),
        }
    }

    /// `(u, v)` lies in the parameter domain Ω.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        match &self.source {
            Source::Field(f) => f.jet([u, v]).is_ok(),
            Source::Strip { g, interval } => solve_psi2(&**g, *interval, u, v).is_ok(),
        }
    }

    pub fn phi_jet(&self, u: f64, v: f64) -> Result<Jet<2>> {
        match &self.source {
            Source::Field(f) => Ok(f.jet([u, v])?),
            Source::Strip { g, interval } => {
                let tau0 = solve_psi2(&**g, *interval, u, v)?;
                let d = g.derivs(tau0)?;
                let [uj, vj] = Jet::<2>::vars([u, v]);
                let slope = 1.0 + 0.5 * u * u * d[1];
                let tau = implicit_jet(
                    |tau: Jet<2>| Ok(tau + uj * uj * g.apply(tau)? * 0.5 - vj),
                    tau0,
                    slope,
                    3,
                )?;
                Ok(uj * g.apply(tau)?)
            }
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Result<GroupPoint> {
        let phi = self.phi_jet(u, v)?.v;
        Ok(GroupPoint::new(phi, u, v - 0.5 * u * phi))
    }

    /// Samples an `n × n` grid of `window` and lists the points outside Ω.
    pub fn omega_scan(&self, window: Rect, n: usize) -> OmegaScan {
        let pts = window.grid(n, n);
        let excluded: Vec<[f64; 2]> =
            pts.iter().filter(|(u, v)| !self.contains(*u, *v)).map(|&(u, v)| [u, v]).collect();
        OmegaScan { window, samples: pts.len(), excluded }
    }

    /// Boundary of Ω on the segment from `inside` to `outside`, by bisection.
    pub fn omega_boundary(&self, inside: [f64; 2], outside: [f64; 2]) -> Result<[f64; 2]> {
        if !self.contains(inside[0], inside[1]) || self.contains(outside[0], outside[1]) {
            return Err(Error::invalid("segment endpoints do not straddle the domain boundary"));
        }
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let at = |s: f64| [inside[0] + s * (outside[0] - inside[0]), inside[1] + s * (outside[1] - inside[1])];
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if b - a < 1e-15 {
                break;
            }
            let p = at(m);
            if self.contains(p[0], p[1]) {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(at(0.5 * (a + b)))
    }
}

/// Sampled description of the parameter domain.
#[derive(Clone, Debug)]
pub struct OmegaScan {
    pub window: Rect,
    pub samples: usize,
    pub excluded: Vec<[f64; 2]>,
}

impl OmegaScan {
    pub fn is_full(&self) -> bool {
        self.excluded.is_empty()
    }
}

fn solve_psi2(g: &dyn UniFn, interval: Interval, u: f64, v: f64) -> Result<f64> {
    let c = 0.5 * u * u;
    let root = increasing_root(
        |t| Ok(t + c * g.value(t)? - v),
        |t| Ok(1.0 + c * g.derivs(t)?[1]),
        interval,
        v,
    )?;
    root.ok_or_else(|| Error::OutsideDomain(format!("({u}, {v}) is outside the intrinsic domain")))
}

/// The intrinsic X₁-graph parameterization of an X-form strip.
pub fn strip_to_intrinsic(s: &GraphicalStrip) -> Result<IntrinsicGraph> {
    if s.branch != Branch::X {
        return Err(Error::invalid("intrinsic conversion needs the X-form; rotate with to_x_form first"));
    }
    Ok(IntrinsicGraph { source: Source::Strip { g: s.g.clone(), interval: s.interval } })
}

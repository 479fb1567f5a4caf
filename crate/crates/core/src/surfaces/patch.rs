use std::fmt;
use std::sync::Arc;

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::gexpr::{Dual, Field, Jet, ScalarFn, UniFn, UniFnExt};
use crate::hgroup::GroupPoint;

/// A parameterized piece of surface `θ(u, v) = (x, y, t)` with first partials.
pub trait Patch: Send + Sync + fmt::Debug {
    fn domain(&self) -> Rect;

    /// `θ` and `(θ_u, θ_v)` at `(u, v)`.
    fn first(&self, u: f64, v: f64) -> Result<[Dual<2>; 3]>;

    fn point(&self, u: f64, v: f64) -> Result<GroupPoint> {
        let d = self.first(u, v)?;
        Ok(GroupPoint::new(d[0].v, d[1].v, d[2].v))
    }
}

/// A patch with second partials.
pub trait SmoothPatch: Patch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]>;
}

macro_rules! patch_from_jet {
    ($t:ty) => {
        impl Patch for $t {
            fn domain(&self) -> Rect {
                self.domain
            }
            fn first(&self, u: f64, v: f64) -> Result<[Dual<2>; 3]> {
                let j = SmoothPatch::jet(self, u, v)?;
                Ok([j[0].first(), j[1].first(), j[2].first()])
            }
        }
    };
}
pub(crate) use patch_from_jet;

impl<T: Patch + ?Sized> Patch for Arc<T> {
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn first(&self, u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        (**self).first(u, v)
    }
}

impl<T: SmoothPatch + ?Sized> SmoothPatch for Arc<T> {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        (**self).jet(u, v)
    }
}

fn uv(u: f64, v: f64) -> [Jet<2>; 2] {
    Jet::<2>::vars([u, v])
}

/// `θ(x, y) = (x, y, f(x, y))`.
#[derive(Clone, Debug)]
pub struct GraphXyPatch {
    pub f: Arc<dyn Field<2>>,
    pub domain: Rect,
}

impl SmoothPatch for GraphXyPatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let [x, y] = uv(u, v);
        Ok([x, y, self.f.jet([u, v])?])
    }
}
patch_from_jet!(GraphXyPatch);

/// `θ(y, t) = (ψ(y, t), y, t)`.
#[derive(Clone, Debug)]
pub struct GraphYtPatch {
    pub psi: Arc<dyn Field<2>>,
    pub domain: Rect,
}

impl SmoothPatch for GraphYtPatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let [y, t] = uv(u, v);
        Ok([self.psi.jet([u, v])?, y, t])
    }
}
patch_from_jet!(GraphYtPatch);

/// Strip patches: `(yG(t), y, t)` over `(y, t)`, or `(x, −xG(t), t)` over `(x, t)`.
#[derive(Clone, Debug)]
pub struct StripPatch {
    pub g: Arc<dyn UniFn>,
    pub y_form: bool,
    pub domain: Rect,
}

impl SmoothPatch for StripPatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let [a, t] = uv(u, v);
        let g = self.g.apply(t)?;
        if self.y_form {
            Ok([a, -(a * g), t])
        } else {
            Ok([a * g, a, t])
        }
    }
}
patch_from_jet!(StripPatch);

/// `θ(u, v) = p₀ + u·d + v·∂t` for the vertical plane `ax + by = γ`, `d = (−b, a)/|(a, b)|`.
#[derive(Clone, Copy, Debug)]
pub struct VerticalPlanePatch {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub domain: Rect,
}

impl SmoothPatch for VerticalPlanePatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let n = self.a.hypot(self.b);
        let (a, b) = (self.a / n, self.b / n);
        let (x0, y0) = (a * self.gamma / n, b * self.gamma / n);
        let [u, v] = uv(u, v);
        Ok([u * (-b) + x0, u * a + y0, v])
    }
}
patch_from_jet!(VerticalPlanePatch);

/// `θ(α, t) = (c₁ + R cos α, c₂ + R sin α, t)`, outward normal.
#[derive(Clone, Copy, Debug)]
pub struct CirclePatch {
    pub center: [f64; 2],
    pub radius: f64,
    pub domain: Rect,
}

impl SmoothPatch for CirclePatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        use crate::gexpr::Scalar;
        let [a, t] = uv(u, v);
        Ok([a.cos() * self.radius + self.center[0], a.sin() * self.radius + self.center[1], t])
    }
}
patch_from_jet!(CirclePatch);

/// `θ(u, v) = (φ(u, v), u, v − uφ/2)`.
#[derive(Clone, Debug)]
pub struct IntrinsicPatch {
    pub graph: Arc<super::IntrinsicGraph>,
    pub domain: Rect,
}

impl SmoothPatch for IntrinsicPatch {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let phi = self.graph.phi_jet(u, v)?;
        let [uj, vj] = uv(u, v);
        Ok([phi, uj, vj - uj * phi * 0.5])
    }
}
patch_from_jet!(IntrinsicPatch);

/// Image of a patch under `P ↦ M·P + c`; covers left translations, dilations and rotations.
#[derive(Clone, Debug)]
pub struct LinearImage {
    pub m: [[f64; 3]; 3],
    pub c: [f64; 3],
    pub base: Arc<dyn SmoothPatch>,
}

impl LinearImage {
    pub fn left_translation(g0: GroupPoint, base: Arc<dyn SmoothPatch>) -> Self {
        let m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.5 * g0.y, 0.5 * g0.x, 1.0]];
        Self { m, c: g0.to_array(), base }
    }

    pub fn dilation(lambda: f64, base: Arc<dyn SmoothPatch>) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("dilation factor must be positive, got {lambda}")));
        }
        let m = [[lambda, 0.0, 0.0], [0.0, lambda, 0.0], [0.0, 0.0, lambda * lambda]];
        Ok(Self { m, c: [0.0; 3], base })
    }

    pub fn rotation(theta: f64, base: Arc<dyn SmoothPatch>) -> Self {
        let (s, c) = theta.sin_cos();
        Self { m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], c: [0.0; 3], base }
    }
}

impl Patch for LinearImage {
    fn domain(&self) -> Rect {
        self.base.domain()
    }
    fn first(&self, u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        let j = self.jet(u, v)?;
        Ok([j[0].first(), j[1].first(), j[2].first()])
    }
}

impl SmoothPatch for LinearImage {
    fn jet(&self, u: f64, v: f64) -> Result<[Jet<2>; 3]> {
        let b = self.base.jet(u, v)?;
        let row = |i: usize| b[0] * self.m[i][0] + b[1] * self.m[i][1] + b[2] * self.m[i][2] + self.c[i];
        Ok([row(0), row(1), row(2)])
    }
}

/// Wraps a parsed function so it can serve as a bivariate field.
pub fn field2(f: &ScalarFn) -> Result<Arc<dyn Field<2>>> {
    if f.arity() != 2 {
        return Err(Error::invalid(format!("expected a function of two variables, got `{f}`")));
    }
    Ok(Arc::new(f.clone()))
}

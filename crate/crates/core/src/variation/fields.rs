use std::fmt;
use std::sync::Arc;

use super::Deformation;
use crate::domain::Rect;
use crate::error::Result;
use crate::gexpr::{Dual, EvalError, Field, FieldExt, Jet, Scalar};
use crate::hcalc::pqw_dual;

/// `exp(1 − 1/(1 − z²))` for `|z| < 1`, else `0`; `z = (s − c)/r`. Peak value 1 at `s = c`.
pub fn smooth_bump<S: Scalar>(s: S, c: f64, r: f64) -> S {
    let z = (s - c) / r;
    let z2 = z.value() * z.value();
    if z2 >= 1.0 {
        return S::cst(0.0);
    }
    (-((-(z * z) + 1.0).recip()) + 1.0).exp()
}

fn rect_bump<S: Scalar>(r: &Rect, u: S, v: S) -> S {
    let (cu, cv) = r.center();
    smooth_bump(u, cu, 0.5 * r.width()) * smooth_bump(v, cv, 0.5 * r.height())
}

/// `β(u)β(v)` supported on a parameter rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBump {
    pub rect: Rect,
}

impl Field<2> for ParamBump {
    fn jet(&self, p: [f64; 2]) -> std::result::Result<Jet<2>, EvalError> {
        let [u, v] = Jet::<2>::vars(p);
        Ok(rect_bump(&self.rect, u, v))
    }
    fn describe(&self) -> String {
        let r = self.rect;
        format!("bump on [{}, {}] x [{}, {}]", r.u0, r.u1, r.v0, r.v1)
    }
}

/// A product bump in the ambient coordinates; axes with `radius = ∞` are left free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientBump {
    pub center: [f64; 3],
    pub radius: [f64; 3],
    /// Multiplies the bump by `1 + Σ wᵢ(xᵢ − cᵢ)`.
    pub tilt: [f64; 3],
}

impl AmbientBump {
    pub fn new(center: [f64; 3], radius: [f64; 3]) -> Self {
        Self { center, radius, tilt: [0.0; 3] }
    }

    fn eval<S: Scalar>(&self, p: [S; 3]) -> S {
        let mut out = S::cst(1.0);
        let mut lin = S::cst(1.0);
        for i in 0..3 {
            if self.radius[i].is_finite() {
                out = out * smooth_bump(p[i], self.center[i], self.radius[i]);
            }
            lin = lin + (p[i] - self.center[i]) * self.tilt[i];
        }
        out * lin
    }
}

impl Field<3> for AmbientBump {
    fn jet(&self, p: [f64; 3]) -> std::result::Result<Jet<3>, EvalError> {
        Ok(self.eval(Jet::<3>::vars(p)))
    }
    fn describe(&self) -> String {
        format!("ambient bump at {:?} radii {:?} tilt {:?}", self.center, self.radius, self.tilt)
    }
}

/// A scalar given either on the parameters or in ambient coordinates.
#[derive(Clone, Debug)]
pub enum ScalarOnPatch {
    Params(Arc<dyn Field<2>>),
    Ambient(Arc<dyn Field<3>>),
}

impl ScalarOnPatch {
    /// Value and `(u, v)`-gradient at the patch point.
    pub fn eval(&self, base: &[Jet<2>; 3], u: f64, v: f64) -> Result<Dual<2>> {
        match self {
            ScalarOnPatch::Params(f) => Ok(f.jet([u, v])?.first()),
            ScalarOnPatch::Ambient(f) => Ok(f.apply(base.map(|c| c.first()))?),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ScalarOnPatch::Params(f) => f.describe(),
            ScalarOnPatch::Ambient(f) => f.describe(),
        }
    }
}

/// `(a, b, k) = β(u, v)·Pᵢ(ũ, ṽ)` with `Pᵢ` affine in the normalized coordinates of the support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpField {
    pub rect: Rect,
    /// Row `i`: `[c₀, c_u, c_v]` of `Pᵢ = c₀ + c_u ũ + c_v ṽ`, `ũ, ṽ ∈ [−1, 1]`.
    pub poly: [[f64; 3]; 3],
}

impl BumpField {
    pub fn constant(rect: Rect, amp: [f64; 3]) -> Self {
        Self { rect, poly: amp.map(|a| [a, 0.0, 0.0]) }
    }
}

impl Deformation for BumpField {
    fn support(&self) -> Rect {
        self.rect
    }
    fn fields(&self, _base: &[Jet<2>; 3], u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        let (uu, vv) = (Dual::<2>::var(u, 0), Dual::<2>::var(v, 1));
        let beta = rect_bump(&self.rect, uu, vv);
        let (cu, cv) = self.rect.center();
        let un = (uu - cu) / (0.5 * self.rect.width());
        let vn = (vv - cv) / (0.5 * self.rect.height());
        Ok(self.poly.map(|c| beta * (un * c[1] + vn * c[2] + c[0])))
    }
    fn describe(&self) -> String {
        format!("bump field {:?} on {:?}", self.poly, self.rect)
    }
}

/// `𝒳 = hν^H`: `(a, b, k) = (hp̄, hq̄, 0)` with the patch orientation.
#[derive(Clone, Debug)]
pub struct NormalField {
    pub h: ScalarOnPatch,
    pub support: Rect,
}

impl Deformation for NormalField {
    fn support(&self) -> Rect {
        self.support
    }
    fn fields(&self, base: &[Jet<2>; 3], u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        let h = self.h.eval(base, u, v)?;
        if h.v == 0.0 && h.g == [0.0; 2] {
            return Ok([Dual::constant(0.0); 3]);
        }
        let [p, q, _] = pqw_dual(base);
        let w = (p * p + q * q).sqrt();
        Ok([h * p / w, h * q / w, Dual::constant(0.0)])
    }
    fn describe(&self) -> String {
        format!("h nu^H, h = {}", self.h.describe())
    }
}

/// `𝒳 = aX₁`.
#[derive(Clone, Debug)]
pub struct X1Field {
    pub a: ScalarOnPatch,
    pub support: Rect,
}

impl Deformation for X1Field {
    fn support(&self) -> Rect {
        self.support
    }
    fn fields(&self, base: &[Jet<2>; 3], u: f64, v: f64) -> Result<[Dual<2>; 3]> {
        Ok([self.a.eval(base, u, v)?, Dual::constant(0.0), Dual::constant(0.0)])
    }
    fn describe(&self) -> String {
        format!("a X1, a = {}", self.a.describe())
    }
}

impl fmt::Display for ScalarOnPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(smooth_bump(0.0, 0.0, 1.0), 1.0);
        assert_eq!(smooth_bump(1.0, 0.0, 1.0), 0.0);
        assert_eq!(smooth_bump(-3.0, 0.0, 1.0), 0.0);
        let d = smooth_bump(Dual::<1>::var(0.5, 0), 0.0, 1.0);
        let fd = (smooth_bump(0.5 + 1e-6, 0.0, 1.0) - smooth_bump(0.5 - 1e-6, 0.0, 1.0)) / 2e-6;
        assert!((d.g[0] - fd).abs() < 1e-8);
    }
}

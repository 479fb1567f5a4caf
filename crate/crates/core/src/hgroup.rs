//! The Heisenberg group in exponential coordinates.
//!
//! `g ∘ g' = (x + x', y + y', t + t' + ½(x·y' − x'·y))`, dilations
//! `δ_λ(x, y, t) = (λx, λy, λ²t)`, and the left-invariant frame
//! `X₁ = ∂x − (y/2)∂t`, `X₂ = ∂y + (x/2)∂t`, `T = ∂t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous dimension of Hⁿ.
pub const fn homogeneous_dimension(n: usize) -> usize {
    2 * n + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }

    pub fn inverse(self) -> Self {
        Self::new(-self.x, -self.y, -self.t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }
}

/// Coefficients of `aX₁ + bX₂ + kT`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameVector {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

impl FrameVector {
    pub const fn new(a: f64, b: f64, k: f64) -> Self {
        Self { a, b, k }
    }

    pub fn norm(self) -> f64 {
        (self.a * self.a + self.b * self.b + self.k * self.k).sqrt()
    }
}

/// The locus `ax + by + ct = γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

impl EuclideanPlane {
    pub fn new(a: f64, b: f64, c: f64, gamma: f64) -> Result<Self> {
        if !(a * a + b * b + c * c > 0.0) {
            return Err(Error::invalid("plane normal (a, b, c) must be nonzero"));
        }
        Ok(Self { a, b, c, gamma })
    }

    pub fn residual(&self, g: GroupPoint) -> f64 {
        self.a * g.x + self.b * g.y + self.c * g.t - self.gamma
    }

    pub fn is_vertical(&self) -> bool {
        self.c == 0.0
    }
}

pub fn compose(g: GroupPoint, h: GroupPoint) -> GroupPoint {
    GroupPoint::new(g.x + h.x, g.y + h.y, g.t + h.t + 0.5 * (g.x * h.y - h.x * g.y))
}

pub fn dilate(lambda: f64, g: GroupPoint) -> Result<GroupPoint> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("dilation factor must be positive, got {lambda}")));
    }
    Ok(GroupPoint::new(lambda * g.x, lambda * g.y, lambda * lambda * g.t))
}

pub fn rotate_z(theta: f64, g: GroupPoint) -> GroupPoint {
    let (s, c) = theta.sin_cos();
    GroupPoint::new(c * g.x - s * g.y, s * g.x + c * g.y, g.t)
}

/// Euclidean components of `aX₁ + bX₂ + kT` at `g`.
pub fn frame_ambient(g: GroupPoint, v: FrameVector) -> [f64; 3] {
    [v.a, v.b, v.k - 0.5 * v.a * g.y + 0.5 * v.b * g.x]
}

/// Frame coefficients of the Euclidean vector `w` at `g`; inverse of [`frame_ambient`].
pub fn frame_coefficients(g: GroupPoint, w: [f64; 3]) -> FrameVector {
    FrameVector::new(w[0], w[1], w[2] + 0.5 * w[0] * g.y - 0.5 * w[1] * g.x)
}

/// Image of a plane under the left translation by `g0`.
pub fn translate_plane(g0: GroupPoint, p: EuclideanPlane) -> EuclideanPlane {
    EuclideanPlane {
        a: p.a + 0.5 * p.c * g0.y,
        b: p.b - 0.5 * p.c * g0.x,
        c: p.c,
        gamma: p.gamma + p.a * g0.x + p.b * g0.y + p.c * g0.t,
    }
}

/// The isolated characteristic point of a non-vertical plane.
pub fn plane_characteristic_point(p: EuclideanPlane) -> Option<GroupPoint> {
    if p.c == 0.0 {
        return None;
    }
    Some(GroupPoint::new(-2.0 * p.b / p.c, 2.0 * p.a / p.c, p.gamma / p.c))
}

/// A point of Hⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HnPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl HnPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::invalid("x and y must have the same positive length"));
        }
        Ok(Self { x, y, t })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn compose(&self, h: &HnPoint) -> Result<HnPoint> {
        if self.dim() != h.dim() {
            return Err(Error::invalid("points live in different Heisenberg groups"));
        }
        let sym: f64 = (0..self.dim()).map(|i| self.x[i] * h.y[i] - h.x[i] * self.y[i]).sum();
        Ok(HnPoint {
            x: self.x.iter().zip(&h.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&h.y).map(|(a, b)| a + b).collect(),
            t: self.t + h.t + 0.5 * sym,
        })
    }

    pub fn dilate(&self, lambda: f64) -> Result<HnPoint> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("dilation factor must be positive, got {lambda}")));
        }
        Ok(HnPoint {
            x: self.x.iter().map(|a| lambda * a).collect(),
            y: self.y.iter().map(|a| lambda * a).collect(),
            t: lambda * lambda * self.t,
        })
    }
}

use std::fmt;
use std::sync::Arc;

use crate::gexpr::{EvalError, Field, Jet, Scalar, UniFn, UniFnExt};

/// An ambient defining function `φ(x, y, t)`; the reference normal is `∇φ`.
#[derive(Clone, Debug)]
pub struct DefiningFn {
    pub phi: Arc<dyn Field<3>>,
    /// Known lower bound for `|∇φ|` on the working region.
    pub alpha: Option<f64>,
}

impl DefiningFn {
    pub fn new(phi: Arc<dyn Field<3>>, alpha: Option<f64>) -> Self {
        Self { phi, alpha }
    }

    pub fn jet(&self, g: [f64; 3]) -> Result<Jet<3>, EvalError> {
        self.phi.jet(g)
    }

    pub fn value(&self, g: [f64; 3]) -> Result<f64, EvalError> {
        Ok(self.phi.jet(g)?.v)
    }
}

/// `x − yG(t)` (X-form) or `y + xG(t)` (Y-form).
#[derive(Clone, Debug)]
pub struct StripDefining {
    pub g: Arc<dyn UniFn>,
    pub y_form: bool,
}

impl Field<3> for StripDefining {
    fn jet(&self, p: [f64; 3]) -> Result<Jet<3>, EvalError> {
        let [x, y, t] = Jet::<3>::vars(p);
        let g = self.g.apply(t)?;
        Ok(if self.y_form { y + x * g } else { x - y * g })
    }
    fn describe(&self) -> String {
        let g = self.g.describe();
        if self.y_form {
            format!("y + x*({g})")
        } else {
            format!("x - y*({g})")
        }
    }
}

/// `t − f(x, y)`.
#[derive(Clone, Debug)]
pub struct GraphXyDefining {
    pub f: Arc<dyn Field<2>>,
}

impl Field<3> for GraphXyDefining {
    fn jet(&self, p: [f64; 3]) -> Result<Jet<3>, EvalError> {
        let f = self.f.jet([p[0], p[1]])?.embed::<3>([0, 1]);
        Ok(Jet::var(p[2], 2) - f)
    }
    fn describe(&self) -> String {
        format!("t - ({})", self.f.describe())
    }
}

/// `x − ψ(y, t)`.
#[derive(Clone, Debug)]
pub struct GraphYtDefining {
    pub psi: Arc<dyn Field<2>>,
}

impl Field<3> for GraphYtDefining {
    fn jet(&self, p: [f64; 3]) -> Result<Jet<3>, EvalError> {
        let psi = self.psi.jet([p[1], p[2]])?.embed::<3>([1, 2]);
        Ok(Jet::var(p[0], 0) - psi)
    }
    fn describe(&self) -> String {
        format!("x - ({})", self.psi.describe())
    }
}

/// `ax + by + ct − γ`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneDefining {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Field<3> for PlaneDefining {
    fn jet(&self, p: [f64; 3]) -> Result<Jet<3>, EvalError> {
        let mut j = Jet::constant(self.a * p[0] + self.b * p[1] + self.c * p[2] - self.gamma);
        j.g = [self.a, self.b, self.c];
        Ok(j)
    }
    fn describe(&self) -> String {
        format!("{}*x + {}*y + {}*t - {}", self.a, self.b, self.c, self.gamma)
    }
}

/// `(|z − c|² − R²)/(2R)`; unit gradient on the cylinder, outward.
#[derive(Clone, Copy, Debug)]
pub struct CircleDefining {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Field<3> for CircleDefining {
    fn jet(&self, p: [f64; 3]) -> Result<Jet<3>, EvalError> {
        let [x, y, _] = Jet::<3>::vars(p);
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        Ok((dx.sq() + dy.sq() - self.radius * self.radius) / (2.0 * self.radius))
    }
    fn describe(&self) -> String {
        format!("circle cylinder, center {:?}, radius {}", self.center, self.radius)
    }
}

impl fmt::Display for DefiningFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phi.describe())
    }
}

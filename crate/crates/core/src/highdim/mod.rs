//! Vertical cylinders `{𝔥(x, y) = 0} × ℝ_t` in Hⁿ.
//!
//! Coordinates are ordered `(x₁, …, xₙ, y₁, …, yₙ, t)`. The frame is
//! `Xᵢ = ∂xᵢ − (yᵢ/2)∂t`, `Yᵢ = ∂yᵢ + (xᵢ/2)∂t`. Since `𝔥` does not depend
//! on `t`, the horizontal gradient of `𝔥` is its Euclidean gradient and the
//! horizontal mean curvature is the divergence of the planar unit normal.
//! Both sides of that identity are computed independently: once through the
//! Heisenberg frame on a jet in `2n + 1` variables, once as a planar
//! divergence in `2n` variables.

mod perimeter;

pub use perimeter::{cylinder_perimeter_check, CylinderPatch, PerimeterCheck, TensorRule};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gexpr::{Dual, Expr, Jet, Scalar, ScalarFn};

/// Largest `n` handled pointwise.
pub const MAX_N: usize = 8;

/// Expands `$body` once per supported `n`, with `$m = 2n` and `$m1 = 2n + 1` as constants.
macro_rules! with_dims {
    ($n:expr, $m:ident, $m1:ident, $body:expr) => {
        match $n {
            1 => { const $m: usize = 2; const $m1: usize = 3; $body }
            2 => { const $m: usize = 4; const $m1: usize = 5; $body }
            3 => { const $m: usize = 6; const $m1: usize = 7; $body }
            4 => { const $m: usize = 8; const $m1: usize = 9; $body }
            5 => { const $m: usize = 10; const $m1: usize = 11; $body }
            6 => { const $m: usize = 12; const $m1: usize = 13; $body }
            7 => { const $m: usize = 14; const $m1: usize = 15; $body }
            8 => { const $m: usize = 16; const $m1: usize = 17; $body }
            _ => Err(Error::invalid(format!("n = {} is outside 1..={MAX_N}", $n))),
        }
    };
}
pub(crate) use with_dims;

/// Variable names of `ℝ²ⁿ`: `x, y` for `n = 1`, else `x1 … xn, y1 … yn`.
pub fn coord_names(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["x".into(), "y".into()];
    }
    (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("y{i}"))).collect()
}

fn check_n(n: usize) -> Result<()> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("n = {n} is outside 1..={MAX_N}")))
    }
}

/// The vertical cylinder over `{𝔥 = 0} ⊂ ℝ²ⁿ`, restricted to a box `ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSurface {
    pub n: usize,
    pub h: ScalarFn,
    /// `ω` as `2n` closed coordinate ranges.
    pub window: Vec<(f64, f64)>,
    /// Gradient floor: `|∇𝔥| ≥ alpha` is required wherever the surface is used.
    pub alpha: f64,
}

/// Horizontal normal of a cylinder at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderFrame {
    /// `(X₁φ, …, Xₙφ, Y₁φ, …, Yₙφ)` for `φ = 𝔥`.
    pub horizontal: Vec<f64>,
    /// `Tφ`; identically zero for a cylinder.
    pub t_component: f64,
    /// `W = |∇^H φ|`.
    pub w: f64,
}

impl CylinderSurface {
    pub fn new(n: usize, h: ScalarFn, window: Vec<(f64, f64)>, alpha: f64) -> Result<Self> {
        check_n(n)?;
        if h.arity() != 2 * n {
            return Err(Error::invalid(format!("𝔥 takes {} variables, expected {}", h.arity(), 2 * n)));
        }
        if window.len() != 2 * n || window.iter().any(|&(a, b)| !(a < b)) {
            return Err(Error::invalid(format!("window must be {} increasing ranges", 2 * n)));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid("gradient floor must be positive"));
        }
        Ok(Self { n, h, window, alpha })
    }

    /// Parses `𝔥` in the variables of [`coord_names`].
    pub fn parse(n: usize, src: &str, window: Vec<(f64, f64)>, alpha: f64) -> Result<Self> {
        check_n(n)?;
        let names = coord_names(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::new(n, ScalarFn::parse(src, &refs)?, window, alpha)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == 2 * self.n && z.iter().zip(&self.window).all(|(x, &(a, b))| *x >= a && *x <= b)
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != 2 * self.n {
            return Err(Error::invalid(format!("point has {} coordinates, expected {}", z.len(), 2 * self.n)));
        }
        if !self.contains(z) {
            return Err(Error::OutsideDomain(format!("{z:?} is outside the cylinder window")));
        }
        Ok(())
    }

    fn floor_violation(&self, z: &[f64], w: f64) -> Error {
        Error::precondition(format!("|∇𝔥| = {w:e} < {:e} at {z:?}", self.alpha))
    }

    /// Value and gradient of `𝔥` at `z ∈ ℝ²ⁿ`.
    pub fn gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        with_dims!(self.n, M, M1, {
            let _ = M1;
            let mut p = [0.0; M];
            p.copy_from_slice(z);
            let args: [Dual<M>; M] = std::array::from_fn(|i| Dual::var(p[i], i));
            let d = self.h.eval(&args)?;
            Ok((d.v, d.g.to_vec()))
        })
    }

    /// Points of `{𝔥 = 0} ∩ ω` from a grid of `per_axis^{2n}` starts, each pulled
    /// onto the level set by Newton steps along `∇𝔥`. Starts that leave `ω`,
    /// hit a vanishing gradient or fail to converge are dropped.
    pub fn surface_samples(&self, per_axis: usize) -> Result<Vec<Vec<f64>>> {
        let m = 2 * self.n;
        let per_axis = per_axis.max(2);
        let total = per_axis.checked_pow(m as u32).ok_or_else(|| Error::invalid("sample grid too large"))?;
        let mut out = Vec::new();
        for mut k in 0..total {
            let mut z: Vec<f64> = self
                .window
                .iter()
                .map(|&(a, b)| {
                    let i = k % per_axis;
                    k /= per_axis;
                    // interior offsets keep starts away from the box faces
                    a + (b - a) * (i as f64 + 0.5) / per_axis as f64
                })
                .collect();
            let mut ok = false;
            for _ in 0..50 {
                let Ok((v, g)) = self.gradient(&z) else { break };
                let g2: f64 = g.iter().map(|x| x * x).sum();
                if !(g2 > 0.0) {
                    break;
                }
                if v.abs() <= 1e-13 * (1.0 + g2.sqrt()) {
                    ok = true;
                    break;
                }
                for (zi, gi) in z.iter_mut().zip(&g) {
                    *zi -= v * gi / g2;
                }
                if !self.contains(&z) {
                    break;
                }
            }
            if ok && self.contains(&z) {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// Smallest `|∇𝔥|` over the given points, with the floor check.
    pub fn min_gradient(&self, pts: &[Vec<f64>]) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for z in pts {
            let (_, g) = self.gradient(z)?;
            let w = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(w >= self.alpha) {
                return Err(self.floor_violation(z, w));
            }
            lo = lo.min(w);
        }
        Ok(lo)
    }
}

/// Horizontal normal components of the cylinder at `z ∈ ω`.
pub fn cylinder_frame(c: &CylinderSurface, z: &[f64]) -> Result<CylinderFrame> {
    c.check_point(z)?;
    let n = c.n;
    with_dims!(n, M, M1, {
        let _ = M;
        let mut p = [0.0; M1];
        p[..2 * n].copy_from_slice(z);
        let args: [Dual<M1>; M1] = std::array::from_fn(|i| Dual::var(p[i], i));
        let phi = c.h.eval(&args[..2 * n])?;
        let tphi = phi.g[2 * n];
        let mut horizontal = vec![0.0; 2 * n];
        for i in 0..n {
            horizontal[i] = phi.g[i] - 0.5 * z[n + i] * tphi;
            horizontal[n + i] = phi.g[n + i] + 0.5 * z[i] * tphi;
        }
        let w = horizontal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(w >= c.alpha) {
            return Err(c.floor_violation(z, w));
        }
        Ok(CylinderFrame { horizontal, t_component: tphi, w })
    })
}

/// `ℋ = Σᵢ Xᵢ(Xᵢφ/W) + Yᵢ(Yᵢφ/W)` for `φ(x, y, t) = 𝔥(x, y)`, through the Heisenberg frame.
pub fn cylinder_hmean(c: &CylinderSurface, z: &[f64]) -> Result<f64> {
    c.check_point(z)?;
    let n = c.n;
    with_dims!(n, M, M1, {
        let _ = M;
        let mut p = [0.0; M1];
        p[..2 * n].copy_from_slice(z);
        let vars = Jet::<M1>::vars(p);
        let phi = c.h.eval(&vars[..2 * n])?;
        let tphi = phi.d(2 * n);
        let mut comps = [Dual::<M1>::constant(0.0); M];
        for i in 0..n {
            let x = Dual::<M1>::var(p[i], i);
            let y = Dual::<M1>::var(p[n + i], n + i);
            comps[i] = phi.d(i) - y * tphi * 0.5;
            comps[n + i] = phi.d(n + i) + x * tphi * 0.5;
        }
        let w = comps.iter().fold(Dual::<M1>::constant(0.0), |s, q| s + q.sq()).sqrt();
        if !(w.v >= c.alpha) {
            return Err(c.floor_violation(z, w.v));
        }
        let mut hm = 0.0;
        for i in 0..n {
            let a = comps[i] / w;
            let b = comps[n + i] / w;
            hm += a.g[i] - 0.5 * p[n + i] * a.g[2 * n];
            hm += b.g[n + i] + 0.5 * p[i] * b.g[2 * n];
        }
        Ok(hm)
    })
}

/// `div(∇𝔥/|∇𝔥|)` in `ℝ²ⁿ`, from the gradient and Hessian of `𝔥`.
pub fn planar_divergence(c: &CylinderSurface, z: &[f64]) -> Result<f64> {
    c.check_point(z)?;
    with_dims!(c.n, M, M1, {
        let _ = M1;
        let mut p = [0.0; M];
        p.copy_from_slice(z);
        let j = c.h.eval(&Jet::<M>::vars(p))?;
        let g2: f64 = j.g.iter().map(|x| x * x).sum();
        let w = g2.sqrt();
        if !(w >= c.alpha) {
            return Err(c.floor_violation(z, w));
        }
        let lap: f64 = (0..M).map(|i| j.h[i][i]).sum();
        let mut ghg = 0.0;
        for a in 0..M {
            for b in 0..M {
                ghg += j.g[a] * j.h[a][b] * j.g[b];
            }
        }
        Ok((lap - ghg / g2) / w)
    })
}

/// Riemannian mean curvature of the projection `{𝔥 = 0} ⊂ ℝ²ⁿ`, averaged over its `2n − 1` principal directions.
pub fn projection_mean_curvature(c: &CylinderSurface, z: &[f64]) -> Result<f64> {
    Ok(planar_divergence(c, z)? / (2 * c.n - 1) as f64)
}

/// The cylinder `yₙ = f(x, y′)` over a graph, `y′ = (y₁, …, yₙ₋₁)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphCylinder {
    pub n: usize,
    /// `f` in the variables `x1 … xn, y1 … y(n−1)` (`x` alone when `n = 1`).
    pub f: ScalarFn,
}

/// Unit horizontal field on a graph cylinder with its horizontal divergence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativeNu {
    /// `(−∇ₓf, −∇_{y′}f, 1)/√(1 + |∇f|²)`.
    pub nu: Vec<f64>,
    pub norm: f64,
    /// `Σᵢ Xᵢνᵢ + Yᵢνₙ₊ᵢ`.
    pub div_h: f64,
    /// `max |∂ₜνₖ|`.
    pub t_derivative: f64,
}

impl GraphCylinder {
    pub fn graph_names(n: usize) -> Vec<String> {
        let mut v = coord_names(n);
        v.pop();
        v
    }

    pub fn parse(n: usize, src: &str) -> Result<Self> {
        check_n(n)?;
        let names = Self::graph_names(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(Self { n, f: ScalarFn::parse(src, &refs)? })
    }

    /// The defining function `𝔥 = yₙ − f(x, y′)` as a cylinder over `window`.
    pub fn to_cylinder(&self, window: Vec<(f64, f64)>, alpha: f64) -> Result<CylinderSurface> {
        let m = 2 * self.n;
        let tree = self
            .f
            .tree()
            .ok_or_else(|| Error::invalid("graph function must be an expression"))?;
        let inner: Vec<Expr> = (0..m - 1).map(Expr::var).collect();
        let h = Expr::Sub(Box::new(Expr::var(m - 1)), Box::new(tree.substitute(&inner)));
        let names = coord_names(self.n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        CylinderSurface::new(self.n, ScalarFn::from_expr(h, &refs), window, alpha)
    }
}

/// The unit horizontal field of the graph cylinder at `(x, y) ∈ ℝ²ⁿ`; `yₙ` is ignored.
pub fn negative_example_nu(g: &GraphCylinder, z: &[f64]) -> Result<NegativeNu> {
    let n = g.n;
    check_n(n)?;
    if z.len() != 2 * n {
        return Err(Error::invalid(format!("point has {} coordinates, expected {}", z.len(), 2 * n)));
    }
    with_dims!(n, M, M1, {
        let _ = M;
        let mut p = [0.0; M1];
        p[..2 * n].copy_from_slice(z);
        let vars = Jet::<M1>::vars(p);
        let f = g.f.eval(&vars[..2 * n - 1])?;
        let mut nu = [Dual::<M1>::constant(0.0); M];
        let mut s2 = Dual::<M1>::constant(1.0);
        for k in 0..2 * n - 1 {
            s2 = s2 + f.d(k).sq();
        }
        let s = s2.sqrt();
        for k in 0..2 * n - 1 {
            nu[k] = -f.d(k) / s;
        }
        nu[2 * n - 1] = s.recip();
        let mut div_h = 0.0;
        for i in 0..n {
            div_h += nu[i].g[i] - 0.5 * p[n + i] * nu[i].g[2 * n];
            div_h += nu[n + i].g[n + i] + 0.5 * p[i] * nu[n + i].g[2 * n];
        }
        let t_derivative = nu.iter().fold(0.0f64, |m, d| m.max(d.g[2 * n].abs()));
        let values: Vec<f64> = nu.iter().map(|d| d.v).collect();
        let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(NegativeNu { nu: values, norm, div_h, t_derivative })
    })
}

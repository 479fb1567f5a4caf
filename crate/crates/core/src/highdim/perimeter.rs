use serde::{Deserialize, Serialize};

use super::{with_dims, CylinderSurface, MAX_N};
use crate::error::{Error, Result};
use crate::gexpr::{Dual, ScalarFn};
use crate::hcalc::quad::integrate_box_gl_vec;

/// Cap on integrand evaluations of one tensor rule.
const MAX_EVALS: usize = 5_000_000;

/// Composite tensor Gauss–Legendre rule: each axis split into `panels`, `nodes` per panel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRule {
    pub nodes: usize,
    pub panels: usize,
}

impl Default for TensorRule {
    fn default() -> Self {
        Self { nodes: 8, panels: 1 }
    }
}

/// A graph window of a vertical cylinder: coordinate `axis` of `ℝ²ⁿ` is `g` of the
/// other `2n − 1` coordinates (in order), over a box of those, times a `t`-range.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderPatch {
    pub n: usize,
    pub axis: usize,
    pub g: ScalarFn,
    pub params: Vec<(f64, f64)>,
    pub t: (f64, f64),
}

/// Both measures of one window, on identical nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerimeterCheck {
    /// `∫ |N_H|`, `N_H` the horizontal part of the cofactor normal.
    pub sigma_h: f64,
    /// `∫ √det(DFᵀDF)`.
    pub hausdorff: f64,
    pub rel_diff: f64,
    /// Difference against a rule with about half the nodes; bounds the quadrature error of either value.
    pub error: f64,
    /// Largest `|𝔥(F)|` over the nodes.
    pub max_residual: f64,
    pub evaluations: usize,
}

impl CylinderPatch {
    pub fn new(n: usize, axis: usize, g: ScalarFn, params: Vec<(f64, f64)>, t: (f64, f64)) -> Result<Self> {
        if !(1..=MAX_N).contains(&n) {
            return Err(Error::invalid(format!("n = {n} is outside 1..={MAX_N}")));
        }
        if axis >= 2 * n {
            return Err(Error::invalid(format!("axis {axis} is not a coordinate of ℝ^{}", 2 * n)));
        }
        if g.arity() != 2 * n - 1 || params.len() != 2 * n - 1 {
            return Err(Error::invalid(format!("graph function and box need {} parameters", 2 * n - 1)));
        }
        if params.iter().chain(std::iter::once(&t)).any(|&(a, b)| !(a < b)) {
            return Err(Error::invalid("parameter ranges must be increasing"));
        }
        Ok(Self { n, axis, g, params, t })
    }

    /// `F(w, t) ∈ ℝ²ⁿ⁺¹` with the Jacobian, rows by coordinate, columns `(w₁, …, w₂ₙ₋₁, t)`.
    fn map(&self, wt: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.n;
        with_dims!(n, M, M1, {
            let _ = M1;
            const P: usize = M - 1;
            let args: [Dual<P>; P] = std::array::from_fn(|i| Dual::var(wt[i], i));
            let gz = self.g.eval(&args)?;
            let mut z = vec![0.0; 2 * n + 1];
            let mut jac = vec![vec![0.0; 2 * n]; 2 * n + 1];
            let mut k = 0;
            for c in 0..2 * n {
                if c == self.axis {
                    z[c] = gz.v;
                    jac[c][..P].copy_from_slice(&gz.g);
                } else {
                    z[c] = wt[k];
                    jac[c][k] = 1.0;
                    k += 1;
                }
            }
            z[2 * n] = wt[P];
            jac[2 * n][P] = 1.0;
            Ok((z, jac))
        })
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let m = a.len();
    let mut d = 1.0;
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    d
}

/// `(|N_H|, √det(JᵀJ))` for a `(2n + 1) × 2n` Jacobian at `z`.
fn densities(n: usize, z: &[f64], jac: &[Vec<f64>]) -> (f64, f64) {
    let rows = 2 * n + 1;
    // cofactor normal: Nₖ = (−1)ᵏ det(J without row k)
    let cof: Vec<f64> = (0..rows)
        .map(|k| {
            let minor: Vec<Vec<f64>> = (0..rows).filter(|&r| r != k).map(|r| jac[r].clone()).collect();
            if k % 2 == 0 { det(minor) } else { -det(minor) }
        })
        .collect();
    let nt = cof[2 * n];
    let mut wh = 0.0;
    for i in 0..n {
        let a = cof[i] - 0.5 * z[n + i] * nt;
        let b = cof[n + i] + 0.5 * z[i] * nt;
        wh += a * a + b * b;
    }
    let cols = 2 * n;
    let gram: Vec<Vec<f64>> = (0..cols)
        .map(|a| (0..cols).map(|b| (0..rows).map(|r| jac[r][a] * jac[r][b]).sum()).collect())
        .collect();
    (wh.sqrt(), det(gram).max(0.0).sqrt())
}

/// `σ_H` and the `2n`-dimensional Hausdorff measure of a graph window of `c`.
pub fn cylinder_perimeter_check(c: &CylinderSurface, patch: &CylinderPatch, rule: &TensorRule) -> Result<PerimeterCheck> {
    if patch.n != c.n {
        return Err(Error::invalid(format!("patch is in H^{} but the cylinder in H^{}", patch.n, c.n)));
    }
    if rule.nodes == 0 || rule.panels == 0 {
        return Err(Error::invalid("tensor rule needs at least one node and one panel"));
    }
    let d = 2 * c.n;
    let evals = (rule.nodes * rule.panels)
        .checked_pow(d as u32)
        .filter(|&e| e <= MAX_EVALS)
        .ok_or_else(|| Error::invalid(format!("{} nodes per axis in {d} dimensions is too many", rule.nodes * rule.panels)))?;
    let mut bounds = patch.params.clone();
    bounds.push(patch.t);

    let residual = std::cell::Cell::new(0.0f64);
    let integrand = |wt: &[f64]| -> Result<[f64; 2]> {
        let (z, jac) = patch.map(wt)?;
        let hv = c.h.eval(&z[..d])?;
        let scale = 1.0 + z[..d].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(hv.abs() <= 1e-8 * scale) {
            return Err(Error::invalid(format!("patch point {:?} is off the cylinder (𝔥 = {hv:e})", &z[..d])));
        }
        residual.set(residual.get().max(hv.abs()));
        let (wh, ga) = densities(c.n, &z, &jac);
        Ok([wh, ga])
    };
    let run = |nodes: usize| -> Result<[f64; 2]> {
        let mut total = [0.0; 2];
        let p = rule.panels;
        let cells = p.pow(d as u32);
        for mut k in 0..cells {
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for &(a, b) in &bounds {
                let i = k % p;
                k /= p;
                let h = (b - a) / p as f64;
                lo.push(a + h * i as f64);
                hi.push(if i + 1 == p { b } else { a + h * (i + 1) as f64 });
            }
            let v = integrate_box_gl_vec(&integrand, &lo, &hi, nodes)?;
            total[0] += v[0];
            total[1] += v[1];
        }
        Ok(total)
    };
    let [sigma_h, hausdorff] = run(rule.nodes)?;
    let [s_low, h_low] = run((rule.nodes / 2).max(1))?;
    let error = (sigma_h - s_low).abs().max((hausdorff - h_low).abs());
    let rel_diff = (sigma_h - hausdorff).abs() / hausdorff.abs().max(f64::MIN_POSITIVE);
    Ok(PerimeterCheck { sigma_h, hausdorff, rel_diff, error, max_residual: residual.get(), evaluations: evals })
}

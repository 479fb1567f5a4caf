//! Adaptive Gauss–Kronrod quadrature (7-point Gauss nested in 15-point Kronrod).
//!
//! One-dimensional integrals use the 15/7 pair on each subinterval; on
//! rectangles the tensor product of the pair is used and the error estimate
//! is split by axis, so a cell is halved along the axis that contributes the
//! larger estimate. Cells are refined in order of decreasing estimate with
//! ties broken by creation index, and the final sum runs over cells in
//! creation order by pairwise summation, so results are reproducible
//! bit-for-bit. Integrands may be vector valued; the tolerance then applies
//! componentwise.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::domain::Rect;
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Abscissae on [−1, 1] with Kronrod and (embedded) Gauss weights; Gauss weight 0 off the Gauss nodes.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        out[j] = (-XGK[j], WGK[j], wg);
        out[14 - j] = (XGK[j], WGK[j], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of halvings of the initial cell along one axis.
    pub max_depth: u32,
    pub max_cells: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_depth: 30, max_cells: 400_000 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub cells: usize,
    pub evaluations: usize,
}

impl QuadResult<1> {
    pub fn scalar(&self) -> (f64, f64) {
        (self.value[0], self.error[0])
    }
}

/// One leaf of a finished 2-D subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub value: f64,
    pub error: f64,
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

struct Prio {
    key: f64,
    id: usize,
}

impl PartialEq for Prio {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Prio {}
impl PartialOrd for Prio {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Prio {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.total_cmp(&o.key).then_with(|| o.id.cmp(&self.id))
    }
}

#[derive(Clone, Copy)]
struct Seg<const K: usize> {
    a: f64,
    b: f64,
    depth: u32,
    value: [f64; K],
    error: [f64; K],
}

fn gk15<const K: usize>(f: &impl Fn(f64) -> Result<[f64; K]>, a: f64, b: f64) -> Result<([f64; K], [f64; K])> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; K];
    let mut g = [0.0; K];
    for (x, wk, wg) in rule() {
        let y = f(c + h * x)?;
        for i in 0..K {
            k[i] += wk * y[i];
            g[i] += wg * y[i];
        }
    }
    let mut err = [0.0; K];
    for i in 0..K {
        k[i] *= h;
        g[i] *= h;
        err[i] = (k[i] - g[i]).abs();
    }
    Ok((k, err))
}

fn normalized<const K: usize>(err: &[f64; K], scale: &[f64; K]) -> f64 {
    err.iter().zip(scale).map(|(e, s)| e / s).fold(0.0, f64::max)
}

/// Adaptive integral over `[a, b]` split first at the given interior breakpoints.
pub fn integrate_1d_with_breaks<const K: usize>(
    f: impl Fn(f64) -> Result<[f64; K]>,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult<K>> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("bad integration interval [{a}, {b}]")));
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);

    let mut segs: Vec<Seg<K>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1])?;
        evaluations += 15;
        segs.push(Seg { a: w[0], b: w[1], depth: 0, value, error });
    }
    let mut scale = [0.0; K];
    for i in 0..K {
        let total: f64 = segs.iter().map(|s| s.value[i].abs()).sum();
        scale[i] = spec.target(total).max(f64::MIN_POSITIVE);
    }
    let mut alive: Vec<bool> = vec![true; segs.len()];
    for (id, s) in segs.iter().enumerate() {
        heap.push(Prio { key: normalized(&s.error, &scale), id });
    }
    let mut frozen = 0usize;
    let (mut val, mut err) = resum_segs(&segs, &alive);
    let mut since_resum = 0usize;
    loop {
        if (0..K).all(|i| err[i] <= spec.target(val[i])) {
            let (v2, e2) = resum_segs(&segs, &alive);
            val = v2;
            err = e2;
            if (0..K).all(|i| err[i] <= spec.target(val[i])) {
                break;
            }
        }
        let Some(top) = heap.pop() else {
            let i = (0..K)
                .max_by(|&a, &b| (err[a] / spec.target(val[a])).total_cmp(&(err[b] / spec.target(val[b]))))
                .unwrap_or(0);
            return Err(Error::Quadrature { error: err[i], target: spec.target(val[i]), cells: frozen });
        };
        let s = segs[top.id];
        if s.depth >= spec.max_depth || segs.len() >= spec.max_cells {
            frozen += 1;
            continue;
        }
        alive[top.id] = false;
        for i in 0..K {
            val[i] -= s.value[i];
            err[i] -= s.error[i];
        }
        let m = 0.5 * (s.a + s.b);
        for (lo, hi) in [(s.a, m), (m, s.b)] {
            let (value, error) = gk15(&f, lo, hi)?;
            evaluations += 15;
            for i in 0..K {
                val[i] += value[i];
                err[i] += error[i];
            }
            let id = segs.len();
            segs.push(Seg { a: lo, b: hi, depth: s.depth + 1, value, error });
            alive.push(true);
            heap.push(Prio { key: normalized(&error, &scale), id });
        }
        since_resum += 1;
        if since_resum >= 256 {
            let (v2, e2) = resum_segs(&segs, &alive);
            val = v2;
            err = e2;
            since_resum = 0;
        }
    }
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    let live: Vec<&Seg<K>> = segs.iter().zip(&alive).filter(|(_, a)| **a).map(|(s, _)| s).collect();
    for i in 0..K {
        let vs: Vec<f64> = live.iter().map(|s| s.value[i]).collect();
        let es: Vec<f64> = live.iter().map(|s| s.error[i]).collect();
        value[i] = pairwise_sum(&vs);
        error[i] = pairwise_sum(&es);
    }
    Ok(QuadResult { value, error, cells: live.len(), evaluations })
}

fn resum_segs<const K: usize>(segs: &[Seg<K>], alive: &[bool]) -> ([f64; K], [f64; K]) {
    let live: Vec<&Seg<K>> = segs.iter().zip(alive).filter(|(_, a)| **a).map(|(s, _)| s).collect();
    let mut v = [0.0; K];
    let mut e = [0.0; K];
    for i in 0..K {
        let vs: Vec<f64> = live.iter().map(|s| s.value[i]).collect();
        let es: Vec<f64> = live.iter().map(|s| s.error[i]).collect();
        v[i] = pairwise_sum(&vs);
        e[i] = pairwise_sum(&es);
    }
    (v, e)
}

pub fn integrate_1d<const K: usize>(
    f: impl Fn(f64) -> Result<[f64; K]>,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult<K>> {
    integrate_1d_with_breaks(f, a, b, &[], spec)
}

/// Scalar convenience wrapper: returns `(value, error estimate)`.
pub fn integrate(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    Ok(integrate_1d(|x| Ok([f(x)?]), a, b, spec)?.scalar())
}

/// Integral over ℝ via `x = s/(1 − s²)`.
pub fn integrate_real_line(f: impl Fn(f64) -> Result<f64>, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let g = |s: f64| -> Result<[f64; 1]> {
        let d = 1.0 - s * s;
        let x = s / d;
        let jac = (1.0 + s * s) / (d * d);
        let y = f(x)? * jac;
        Ok([if y.is_finite() { y } else { 0.0 }])
    };
    Ok(integrate_1d_with_breaks(g, -1.0, 1.0, &[0.0], spec)?.scalar())
}

#[derive(Clone, Copy)]
struct Cell<const K: usize> {
    r: Rect,
    du: u32,
    dv: u32,
    value: [f64; K],
    err_u: [f64; K],
    err_v: [f64; K],
}

impl<const K: usize> Cell<K> {
    fn error(&self) -> [f64; K] {
        let mut e = [0.0; K];
        for i in 0..K {
            e[i] = self.err_u[i] + self.err_v[i];
        }
        e
    }
}

fn tensor_cell<const K: usize>(
    f: &(impl Fn(f64, f64) -> Result<[f64; K]> + Sync),
    r: Rect,
    du: u32,
    dv: u32,
) -> Result<Cell<K>> {
    let nodes = rule();
    let (cu, hu) = (0.5 * (r.u0 + r.u1), 0.5 * (r.u1 - r.u0));
    let (cv, hv) = (0.5 * (r.v0 + r.v1), 0.5 * (r.v1 - r.v0));
    let mut kk = [0.0; K];
    let mut gk = [0.0; K];
    let mut kg = [0.0; K];
    for (xu, wku, wgu) in nodes {
        let u = cu + hu * xu;
        for (xv, wkv, wgv) in nodes {
            let y = f(u, cv + hv * xv)?;
            for i in 0..K {
                kk[i] += wku * wkv * y[i];
                gk[i] += wgu * wkv * y[i];
                kg[i] += wku * wgv * y[i];
            }
        }
    }
    let jac = hu * hv;
    let mut cell = Cell { r, du, dv, value: [0.0; K], err_u: [0.0; K], err_v: [0.0; K] };
    for i in 0..K {
        cell.value[i] = kk[i] * jac;
        cell.err_u[i] = ((kk[i] - gk[i]) * jac).abs();
        cell.err_v[i] = ((kk[i] - kg[i]) * jac).abs();
    }
    Ok(cell)
}

/// Adaptive tensor-product integral over a rectangle.
///
/// When `record` is given, the final leaves are appended to it (first component only).
pub fn integrate_2d_recorded<const K: usize>(
    f: impl Fn(f64, f64) -> Result<[f64; K]> + Sync,
    rect: Rect,
    spec: &QuadratureSpec,
    mut record: Option<&mut Vec<CellRecord>>,
) -> Result<QuadResult<K>> {
    let first = tensor_cell(&f, rect, 0, 0)?;
    let mut evaluations = 225;
    let mut scale = [0.0; K];
    for i in 0..K {
        scale[i] = spec.target(first.value[i]).max(f64::MIN_POSITIVE);
    }
    let mut cells = vec![first];
    let mut alive = vec![true];
    let mut heap = BinaryHeap::new();
    heap.push(Prio { key: normalized(&first.error(), &scale), id: 0 });
    let mut val = first.value;
    let mut err = first.error();
    let mut frozen = 0usize;
    let mut since_resum = 0usize;
    loop {
        if (0..K).all(|i| err[i] <= spec.target(val[i])) {
            // The running totals drift; confirm with an exact re-sum before stopping.
            let (v2, e2) = resum(&cells, &alive);
            val = v2;
            err = e2;
            if (0..K).all(|i| err[i] <= spec.target(val[i])) {
                break;
            }
        }
        let Some(top) = heap.pop() else {
            let i = (0..K)
                .max_by(|&a, &b| (err[a] / spec.target(val[a])).total_cmp(&(err[b] / spec.target(val[b]))))
                .unwrap_or(0);
            return Err(Error::Quadrature { error: err[i], target: spec.target(val[i]), cells: frozen });
        };
        let c = cells[top.id];
        let split_u = normalized(&c.err_u, &scale) >= normalized(&c.err_v, &scale);
        let blocked = if split_u { c.du >= spec.max_depth } else { c.dv >= spec.max_depth };
        if blocked || cells.len() >= spec.max_cells {
            frozen += 1;
            continue;
        }
        alive[top.id] = false;
        let r = c.r;
        let (a, b, da, db) = if split_u {
            let m = 0.5 * (r.u0 + r.u1);
            (
                Rect { u1: m, ..r },
                Rect { u0: m, ..r },
                (c.du + 1, c.dv),
                (c.du + 1, c.dv),
            )
        } else {
            let m = 0.5 * (r.v0 + r.v1);
            (
                Rect { v1: m, ..r },
                Rect { v0: m, ..r },
                (c.du, c.dv + 1),
                (c.du, c.dv + 1),
            )
        };
        let (ca, cb) = rayon::join(|| tensor_cell(&f, a, da.0, da.1), || tensor_cell(&f, b, db.0, db.1));
        let (ca, cb) = (ca?, cb?);
        evaluations += 450;
        let ce = c.error();
        let (ea, eb) = (ca.error(), cb.error());
        for i in 0..K {
            val[i] += ca.value[i] + cb.value[i] - c.value[i];
            err[i] += ea[i] + eb[i] - ce[i];
        }
        for child in [ca, cb] {
            let id = cells.len();
            heap.push(Prio { key: normalized(&child.error(), &scale), id });
            cells.push(child);
            alive.push(true);
        }
        since_resum += 1;
        if since_resum >= 256 {
            let (v2, e2) = resum(&cells, &alive);
            val = v2;
            err = e2;
            since_resum = 0;
        }
    }
    let live = cells.iter().zip(&alive).filter(|(_, a)| **a).count();
    if let Some(rec) = record.as_deref_mut() {
        for (c, _) in cells.iter().zip(&alive).filter(|(_, a)| **a) {
            rec.push(CellRecord {
                u0: c.r.u0,
                u1: c.r.u1,
                v0: c.r.v0,
                v1: c.r.v1,
                value: c.value[0],
                error: c.error()[0],
            });
        }
    }
    Ok(QuadResult { value: val, error: err, cells: live, evaluations })
}

fn resum<const K: usize>(cells: &[Cell<K>], alive: &[bool]) -> ([f64; K], [f64; K]) {
    let live: Vec<&Cell<K>> = cells.iter().zip(alive).filter(|(_, a)| **a).map(|(c, _)| c).collect();
    let mut v = [0.0; K];
    let mut e = [0.0; K];
    for i in 0..K {
        let vs: Vec<f64> = live.iter().map(|c| c.value[i]).collect();
        let es: Vec<f64> = live.iter().map(|c| c.err_u[i] + c.err_v[i]).collect();
        v[i] = pairwise_sum(&vs);
        e[i] = pairwise_sum(&es);
    }
    (v, e)
}

pub fn integrate_2d<const K: usize>(
    f: impl Fn(f64, f64) -> Result<[f64; K]> + Sync,
    rect: Rect,
    spec: &QuadratureSpec,
) -> Result<QuadResult<K>> {
    integrate_2d_recorded(f, rect, spec, None)
}

/// Scalar convenience wrapper: returns `(value, error estimate)`.
pub fn integrate_rect(
    f: impl Fn(f64, f64) -> Result<f64> + Sync,
    rect: Rect,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    Ok(integrate_2d(|u, v| Ok([f(u, v)?]), rect, spec)?.scalar())
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed tensor Gauss–Legendre rule over a box in any dimension.
pub fn integrate_box_gl(f: impl Fn(&[f64]) -> Result<f64>, lo: &[f64], hi: &[f64], nodes: usize) -> Result<f64> {
    Ok(integrate_box_gl_vec(|p| Ok([f(p)?]), lo, hi, nodes)?[0])
}

/// Vector-valued form of [`integrate_box_gl`]; every component sees the same nodes.
pub fn integrate_box_gl_vec<const K: usize>(
    f: impl Fn(&[f64]) -> Result<[f64; K]>,
    lo: &[f64],
    hi: &[f64],
    nodes: usize,
) -> Result<[f64; K]> {
    let d = lo.len();
    if hi.len() != d || nodes == 0 {
        return Err(Error::invalid("tensor rule needs matching bounds and at least one node"));
    }
    let (x, w) = gauss_legendre(nodes);
    let mut idx = vec![0usize; d];
    let mut p = vec![0.0; d];
    let jac: f64 = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).product();
    let mut terms: [Vec<f64>; K] = std::array::from_fn(|_| Vec::with_capacity(nodes.pow(d as u32)));
    loop {
        let mut wt = 1.0;
        for i in 0..d {
            p[i] = 0.5 * (lo[i] + hi[i]) + 0.5 * (hi[i] - lo[i]) * x[idx[i]];
            wt *= w[idx[i]];
        }
        let y = f(&p)?;
        for i in 0..K {
            terms[i].push(wt * y[i]);
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok(terms.each_ref().map(|t| jac * pairwise_sum(t)));
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

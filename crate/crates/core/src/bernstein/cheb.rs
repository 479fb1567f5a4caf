use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Chebyshev series on `[a, b]` with its first three derivative series.
#[derive(Clone, Debug, PartialEq)]
pub struct Chebyshev {
    pub a: f64,
    pub b: f64,
    /// `series[k]` holds the coefficients of the `k`-th derivative.
    series: [Vec<f64>; 4],
    /// Largest coefficient magnitude in the discarded tail, relative to the largest one.
    pub tail: f64,
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Coefficients of `d/dx` of a series in `x ∈ [−1, 1]`.
fn differentiate(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

impl Chebyshev {
    /// Interpolates `f` at `n + 1` Chebyshev–Lobatto points.
    pub fn interpolate(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n < 2 {
            return Err(Error::invalid(format!("bad Chebyshev interval [{a}, {b}] or degree {n}")));
        }
        let mut vals = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = (PI * j as f64 / n as f64).cos();
            vals.push(f(0.5 * (a + b) + 0.5 * (b - a) * x)?);
        }
        let nf = n as f64;
        let mut c = vec![0.0; n + 1];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, v) in vals.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * v * (PI * (j * k) as f64 / nf).cos();
            }
            *ck = 2.0 * s / nf;
        }
        c[0] *= 0.5;
        c[n] *= 0.5;
        let top = c.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let tail = c[n - n / 8..].iter().fold(0.0f64, |m, x| m.max(x.abs())) / top;
        let scale = 2.0 / (b - a);
        let d1: Vec<f64> = differentiate(&c).into_iter().map(|x| x * scale).collect();
        let d2: Vec<f64> = differentiate(&d1).into_iter().map(|x| x * scale).collect();
        let d3: Vec<f64> = differentiate(&d2).into_iter().map(|x| x * scale).collect();
        Ok(Self { a, b, series: [c, d1, d2, d3], tail })
    }

    /// Doubles the degree from 16 until the tail drops below `tol` or `max_n` is reached.
    pub fn adaptive(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64, max_n: usize) -> Result<Self> {
        let mut n = 16;
        loop {
            let c = Self::interpolate(&mut f, a, b, n)?;
            if c.tail < tol || 2 * n > max_n {
                return Ok(c);
            }
            n *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.series[0].len() - 1
    }

    /// `[f, f′, f″, f‴]` at `t`; no extrapolation.
    pub fn derivs(&self, t: f64) -> Option<[f64; 4]> {
        if !(t >= self.a && t <= self.b) {
            return None;
        }
        let x = ((2.0 * t - self.a - self.b) / (self.b - self.a)).clamp(-1.0, 1.0);
        Some(self.series.each_ref().map(|c| clenshaw(c, x)))
    }
}

/// Chebyshev pieces on consecutive subintervals of `[a, b]`.
///
/// Each piece has degree at most [`PiecewiseChebyshev::PIECE_DEGREE`]; an
/// interval whose tail stays above the tolerance is halved.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseChebyshev {
    pub a: f64,
    pub b: f64,
    /// Largest tail over the pieces.
    pub tail: f64,
    pieces: Vec<Chebyshev>,
}

impl PiecewiseChebyshev {
    pub const PIECE_DEGREE: usize = 64;
    /// Subintervals are not halved below `(b − a)/2^MAX_DEPTH`.
    pub const MAX_DEPTH: u32 = 16;

    pub fn adaptive(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::invalid(format!("bad Chebyshev interval [{a}, {b}]")));
        }
        let mut pieces = Vec::new();
        // depth-first, left to right, so pieces come out in order
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let c = Chebyshev::adaptive(&mut f, lo, hi, tol, Self::PIECE_DEGREE)?;
            if c.tail < tol || depth >= Self::MAX_DEPTH {
                pieces.push(c);
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        let tail = pieces.iter().fold(0.0f64, |m, p| m.max(p.tail));
        Ok(Self { a, b, tail, pieces })
    }

    /// Largest degree over the pieces.
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(Chebyshev::degree).max().unwrap_or(0)
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    /// `[f, f′, f″, f‴]` at `t` from the piece containing it; no extrapolation.
    pub fn derivs(&self, t: f64) -> Option<[f64; 4]> {
        if !(t >= self.a && t <= self.b) {
            return None;
        }
        let i = self.pieces.partition_point(|p| p.b < t).min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        p.derivs(t.clamp(p.a, p.b))
    }
}

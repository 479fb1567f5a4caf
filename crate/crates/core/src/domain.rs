use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation of unbounded directions.
pub const DEFAULT_WINDOW: (f64, f64) = (-8.0, 8.0);

/// An open interval; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::invalid(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }

    pub fn contains_closed(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Intersection with `[w0, w1]`; infinite ends are replaced by the window.
    pub fn truncate(&self, w0: f64, w1: f64) -> Result<Interval> {
        Interval::new(self.lo.max(w0), self.hi.min(w1))
    }

    pub fn intersect(&self, o: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(o.lo), self.hi.min(o.hi))
    }
}

/// A closed parameter rectangle `[u0, u1] × [v0, v1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Rect {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Result<Self> {
        let ok = [u0, u1, v0, v1].iter().all(|c| c.is_finite()) && u0 < u1 && v0 < v1;
        if !ok {
            return Err(Error::invalid(format!("degenerate rectangle [{u0}, {u1}] x [{v0}, {v1}]")));
        }
        Ok(Self { u0, u1, v0, v1 })
    }

    pub fn square(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, a, b)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.u0 <= u && u <= self.u1 && self.v0 <= v && v <= self.v1
    }

    /// `other` lies in the interior of `self`.
    pub fn strictly_contains(&self, o: &Rect) -> bool {
        self.u0 < o.u0 && o.u1 < self.u1 && self.v0 < o.v0 && o.v1 < self.v1
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.u0 <= o.u0 && o.u1 <= self.u1 && self.v0 <= o.v0 && o.v1 <= self.v1
    }

    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.u0 + self.u1), 0.5 * (self.v0 + self.v1))
    }

    /// Point at fractional coordinates `(a, b) ∈ [0,1]²`.
    pub fn lerp(&self, a: f64, b: f64) -> (f64, f64) {
        (self.u0 + a * self.width(), self.v0 + b * self.height())
    }

    /// Uniform `n × m` grid of points including the boundary.
    pub fn grid(&self, n: usize, m: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n * m);
        for i in 0..n {
            let a = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            for j in 0..m {
                let b = if m == 1 { 0.5 } else { j as f64 / (m - 1) as f64 };
                out.push(self.lerp(a, b));
            }
        }
        out
    }

    /// Points on the boundary, `n` per side.
    pub fn boundary_ring(&self, n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(4 * n);
        for i in 0..n {
            let a = i as f64 / n as f64;
            out.push(self.lerp(a, 0.0));
            out.push(self.lerp(1.0, a));
            out.push(self.lerp(1.0 - a, 1.0));
            out.push(self.lerp(0.0, 1.0 - a));
        }
        out
    }
}

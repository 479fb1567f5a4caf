//! Truncated Taylor arithmetic.
//!
//! Three carriers share one interface, [`Scalar`]:
//!
//! * [`Jet3`]: one variable, derivatives up to order three;
//! * [`Dual`]: `N` variables, value and gradient;
//! * [`Jet`]: `N` variables, value, gradient and Hessian.
//!
//! Every elementary function is written once in terms of [`Scalar::lift`],
//! which composes a carrier with a scalar function given the function's
//! value and first three derivatives at the carrier's value. Each carrier
//! uses as many of those derivatives as its order needs.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(c: f64) -> Self;

    fn value(&self) -> f64;

    /// `f ∘ self`, where `d = [f, f', f'', f''']` evaluated at `self.value()`.
    fn lift(self, d: [f64; 4]) -> Self;

    fn is_finite(&self) -> bool;

    fn recip(self) -> Self {
        let r = 1.0 / self.value();
        self.lift([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    fn sq(self) -> Self {
        self * self
    }

    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.lift([s, c, -s, -c])
    }

    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.lift([c, -s, -c, s])
    }

    fn tan(self) -> Self {
        let t = self.value().tan();
        let s = 1.0 + t * t;
        self.lift([t, s, 2.0 * t * s, 2.0 * s * (1.0 + 3.0 * t * t)])
    }

    fn cot(self) -> Self {
        let c = 1.0 / self.value().tan();
        let s = 1.0 + c * c;
        self.lift([c, -s, 2.0 * c * s, -2.0 * s * (1.0 + 3.0 * c * c)])
    }

    fn tanh(self) -> Self {
        let h = self.value().tanh();
        let s = 1.0 - h * h;
        self.lift([h, s, -2.0 * h * s, 2.0 * s * (3.0 * h * h - 1.0)])
    }

    fn cosh(self) -> Self {
        let a = self.value();
        let (c, s) = (a.cosh(), a.sinh());
        self.lift([c, s, c, s])
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.lift([e, e, e, e])
    }

    fn ln(self) -> Self {
        let a = self.value();
        let r = 1.0 / a;
        self.lift([a.ln(), r, -r * r, 2.0 * r * r * r])
    }

    fn sqrt(self) -> Self {
        let r = self.value().sqrt();
        let i = 1.0 / r;
        self.lift([r, 0.5 * i, -0.25 * i * i * i, 0.375 * i * i * i * i * i])
    }

    fn atan(self) -> Self {
        let a = self.value();
        let w = 1.0 / (1.0 + a * a);
        self.lift([a.atan(), w, -2.0 * a * w * w, -2.0 * w * w + 8.0 * a * a * w * w * w])
    }

    fn powi(self, n: i32) -> Self {
        let a = self.value();
        let nf = n as f64;
        let coef = [1.0, nf, nf * (nf - 1.0), nf * (nf - 1.0) * (nf - 2.0)];
        let mut d = [0.0; 4];
        for (k, c) in coef.iter().enumerate() {
            if *c != 0.0 {
                d[k] = c * a.powi(n - k as i32);
            }
        }
        self.lift(d)
    }

    fn powf(self, c: f64) -> Self {
        let a = self.value();
        let coef = [1.0, c, c * (c - 1.0), c * (c - 1.0) * (c - 2.0)];
        let mut d = [0.0; 4];
        for (k, m) in coef.iter().enumerate() {
            if *m != 0.0 {
                d[k] = m * a.powf(c - k as f64);
            }
        }
        self.lift(d)
    }
}

/// Multivariate chain rule for an outer function known through a second-order jet.
pub trait Compose: Scalar {
    fn compose<const M: usize>(outer: &Jet<M>, inner: &[Self; M]) -> Self;
}

macro_rules! scalar_ops_f64 {
    ($t:ident $(, $n:ident)?) => {
        impl<$(const $n: usize)?> Add<f64> for $t<$($n)?> {
            type Output = Self;
            fn add(mut self, c: f64) -> Self {
                self.v += c;
                self
            }
        }
        impl<$(const $n: usize)?> Sub<f64> for $t<$($n)?> {
            type Output = Self;
            fn sub(mut self, c: f64) -> Self {
                self.v -= c;
                self
            }
        }
        impl<$(const $n: usize)?> Div<f64> for $t<$($n)?> {
            type Output = Self;
            fn div(self, c: f64) -> Self {
                self * (1.0 / c)
            }
        }
        impl<$(const $n: usize)?> Div for $t<$($n)?> {
            type Output = Self;
            fn div(self, o: Self) -> Self {
                self * o.recip()
            }
        }
        impl<$(const $n: usize)?> AddAssign for $t<$($n)?> {
            fn add_assign(&mut self, o: Self) {
                *self = *self + o;
            }
        }
        impl<$(const $n: usize)?> SubAssign for $t<$($n)?> {
            fn sub_assign(&mut self, o: Self) {
                *self = *self - o;
            }
        }
        impl<$(const $n: usize)?> MulAssign for $t<$($n)?> {
            fn mul_assign(&mut self, o: Self) {
                *self = *self * o;
            }
        }
        impl<$(const $n: usize)?> Add<$t<$($n)?>> for f64 {
            type Output = $t<$($n)?>;
            fn add(self, o: $t<$($n)?>) -> $t<$($n)?> {
                o + self
            }
        }
        impl<$(const $n: usize)?> Sub<$t<$($n)?>> for f64 {
            type Output = $t<$($n)?>;
            fn sub(self, o: $t<$($n)?>) -> $t<$($n)?> {
                -o + self
            }
        }
        impl<$(const $n: usize)?> Mul<$t<$($n)?>> for f64 {
            type Output = $t<$($n)?>;
            fn mul(self, o: $t<$($n)?>) -> $t<$($n)?> {
                o * self
            }
        }
        impl<$(const $n: usize)?> Div<$t<$($n)?>> for f64 {
            type Output = $t<$($n)?>;
            fn div(self, o: $t<$($n)?>) -> $t<$($n)?> {
                o.recip() * self
            }
        }
    };
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn lift(self, d: [f64; 4]) -> Self {
        d[0]
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Compose for f64 {
    fn compose<const M: usize>(outer: &Jet<M>, _inner: &[Self; M]) -> Self {
        outer.v
    }
}

/// Univariate jet: value and derivatives `d1, d2, d3`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet3 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Self { v, d1, d2, d3 }
    }

    /// The independent variable at `x`.
    pub fn var(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.v, self.d1, self.d2, self.d3]
    }

    /// Jet of the derivative, order dropping by one (the top entry is NaN).
    pub fn derivative(&self) -> [f64; 4] {
        [self.d1, self.d2, self.d3, f64::NAN]
    }
}

impl Add for Jet3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Jet3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Neg for Jet3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d1, -self.d2, -self.d3)
    }
}

impl Mul for Jet3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            self.d3 * o.v + 3.0 * (self.d2 * o.d1 + self.d1 * o.d2) + self.v * o.d3,
        )
    }
}

impl Mul<f64> for Jet3 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self::new(self.v * c, self.d1 * c, self.d2 * c, self.d3 * c)
    }
}

scalar_ops_f64!(Jet3);

impl Scalar for Jet3 {
    fn cst(c: f64) -> Self {
        Self::new(c, 0.0, 0.0, 0.0)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn lift(self, d: [f64; 4]) -> Self {
        let (u1, u2, u3) = (self.d1, self.d2, self.d3);
        // Faà di Bruno up to order three; terms with a zero factor are skipped
        // so that an unused infinite derivative cannot poison the result.
        let m = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a * b };
        Self::new(
            d[0],
            m(d[1], u1),
            m(d[2], u1 * u1) + m(d[1], u2),
            m(d[3], u1 * u1 * u1) + m(d[2], 3.0 * u1 * u2) + m(d[1], u3),
        )
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }
}

/// First-order jet in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; N] }
    }

    /// Independent variable number `i` at value `x`.
    pub fn var(x: f64, i: usize) -> Self {
        let mut g = [0.0; N];
        g[i] = 1.0;
        Self { v: x, g }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..N {
            self.g[i] -= o.g[i];
        }
        self
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.v = -self.v;
        for gi in self.g.iter_mut() {
            *gi = -*gi;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut g = [0.0; N];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.v * o.g[i] + o.v * self.g[i];
        }
        Self { v: self.v * o.v, g }
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for gi in self.g.iter_mut() {
            *gi *= c;
        }
        self
    }
}

scalar_ops_f64!(Dual, N);

impl<const N: usize> Scalar for Dual<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn lift(self, d: [f64; 4]) -> Self {
        let mut g = [0.0; N];
        for (i, gi) in g.iter_mut().enumerate() {
            if self.g[i] != 0.0 {
                *gi = d[1] * self.g[i];
            }
        }
        Self { v: d[0], g }
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|x| x.is_finite())
    }
}

impl<const N: usize> Compose for Dual<N> {
    fn compose<const M: usize>(outer: &Jet<M>, inner: &[Self; M]) -> Self {
        let mut g = [0.0; N];
        for (i, a) in inner.iter().enumerate() {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj += outer.g[i] * a.g[j];
            }
        }
        Self { v: outer.v, g }
    }
}

/// Second-order jet in `N` variables: value, gradient and symmetric Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; N], h: [[0.0; N]; N] }
    }

    /// Independent variable number `i` at value `x`.
    pub fn var(x: f64, i: usize) -> Self {
        let mut j = Self::constant(x);
        j.g[i] = 1.0;
        j
    }

    /// Seeds all `N` variables at once.
    pub fn vars(x: [f64; N]) -> [Self; N] {
        let mut out = [Self::constant(0.0); N];
        for i in 0..N {
            out[i] = Self::var(x[i], i);
        }
        out
    }

    /// Value and gradient only.
    pub fn first(&self) -> Dual<N> {
        Dual { v: self.v, g: self.g }
    }

    /// The partial derivative `∂_i` as a first-order jet.
    pub fn d(&self, i: usize) -> Dual<N> {
        Dual { v: self.g[i], g: self.h[i] }
    }

    /// Re-indexes into a jet over `M` variables; variable `i` here becomes `map[i]` there.
    pub fn embed<const M: usize>(&self, map: [usize; N]) -> Jet<M> {
        let mut out = Jet::<M>::constant(self.v);
        for i in 0..N {
            out.g[map[i]] += self.g[i];
            for j in 0..N {
                out.h[map[i]][map[j]] += self.h[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in 0..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..N {
            self.g[i] -= o.g[i];
            for j in 0..N {
                self.h[i][j] -= o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = Self::constant(self.v * o.v);
        for i in 0..N {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..N {
                r.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        r
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..N {
            self.g[i] *= c;
            for j in 0..N {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

scalar_ops_f64!(Jet, N);

impl<const N: usize> Scalar for Jet<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn lift(self, d: [f64; 4]) -> Self {
        let mut r = Self::constant(d[0]);
        let m = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a * b };
        for i in 0..N {
            r.g[i] = m(d[1], self.g[i]);
            for j in 0..N {
                r.h[i][j] = m(d[1], self.h[i][j]) + m(d[2], self.g[i] * self.g[j]);
            }
        }
        r
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().all(|row| row.iter().all(|x| x.is_finite()))
    }
}

impl<const N: usize> Compose for Jet<N> {
    fn compose<const M: usize>(outer: &Jet<M>, inner: &[Self; M]) -> Self {
        let mut r = Self::constant(outer.v);
        for (i, a) in inner.iter().enumerate() {
            let fi = outer.g[i];
            for j in 0..N {
                r.g[j] += fi * a.g[j];
                for k in 0..N {
                    r.h[j][k] += fi * a.h[j][k];
                }
            }
            for (l, b) in inner.iter().enumerate() {
                let fil = outer.h[i][l];
                if fil == 0.0 {
                    continue;
                }
                for j in 0..N {
                    for k in 0..N {
                        r.h[j][k] += fil * a.g[j] * b.g[k];
                    }
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_third_order() {
        let x = Jet3::var(0.7);
        let y = x.sin() * x.exp();
        // (sin x e^x)''' = 2 e^x (cos x − sin x)
        let e = 0.7f64.exp();
        assert!((y.d3 - 2.0 * e * (0.7f64.cos() - 0.7f64.sin())).abs() < 1e-13);
    }

    #[test]
    fn hessian_of_product() {
        let [x, y] = Jet::<2>::vars([1.5, -0.5]);
        let f = x * x * y;
        assert_eq!(f.g, [2.0 * 1.5 * -0.5, 2.25]);
        assert_eq!(f.h, [[-1.0, 3.0], [3.0, 0.0]]);
    }

    #[test]
    fn compose_matches_direct_evaluation() {
        let [u, v] = Jet::<2>::vars([0.3, 0.8]);
        let inner = [u * v, u.sin()];
        let [a, b] = Jet::<2>::vars([inner[0].v, inner[1].v]);
        let outer = a.exp() * b;
        let composed = Jet::<2>::compose(&outer, &inner);
        let direct = inner[0].exp() * inner[1];
        assert!((composed.v - direct.v).abs() < 1e-15);
        for i in 0..2 {
            assert!((composed.g[i] - direct.g[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((composed.h[i][j] - direct.h[i][j]).abs() < 1e-14);
            }
        }
    }
}

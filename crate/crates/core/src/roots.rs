//! Safeguarded scalar root finding and implicit-function jets.

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::gexpr::Scalar;

/// Final bracket width, relative to `max(1, |root|)`.
pub const BISECT_WIDTH: f64 = 1e-13;

const MAX_PROBES: i32 = 64;

/// Root of an increasing function on an open interval.
///
/// `f` may fail near the interval ends (poles, leaving its domain); such
/// probes count as "no sign change there". Returns `Ok(None)` when no
/// bracket exists inside the interval.
pub fn increasing_root(
    f: impl Fn(f64) -> Result<f64>,
    df: impl Fn(f64) -> Result<f64>,
    interval: Interval,
    start: f64,
) -> Result<Option<f64>> {
    let m = if interval.contains(start) {
        start
    } else if interval.is_bounded() {
        interval.mid()
    } else if interval.lo.is_finite() {
        interval.lo + 1.0
    } else if interval.hi.is_finite() {
        interval.hi - 1.0
    } else {
        0.0
    };
    let fm = f(m)?;
    if fm == 0.0 {
        return Ok(Some(m));
    }
    let (lo, hi) = if fm < 0.0 {
        match probe(&f, m, interval.hi, 1.0)? {
            Some(h) => (m, h),
            None => return Ok(None),
        }
    } else {
        match probe(&f, m, interval.lo, -1.0)? {
            Some(l) => (l, m),
            None => return Ok(None),
        }
    };
    Ok(Some(bisect_newton(&f, &df, lo, hi)?))
}

/// Walks from `m` towards `end` until `f` changes sign relative to `f(m)`.
fn probe(f: &impl Fn(f64) -> Result<f64>, m: f64, end: f64, dir: f64) -> Result<Option<f64>> {
    for j in 0..MAX_PROBES {
        let x = if end.is_finite() {
            end - (end - m) * 0.5f64.powi(j + 1)
        } else {
            m + dir * 2f64.powi(j)
        };
        if end.is_finite() && x == end {
            break;
        }
        let Ok(fx) = f(x) else { break };
        if !fx.is_finite() {
            break;
        }
        if dir * fx >= 0.0 {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Bisection on a sign-changing bracket `f(lo) ≤ 0 ≤ f(hi)`, then two guarded Newton steps.
pub fn bisect_newton(
    f: &impl Fn(f64) -> Result<f64>,
    df: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(format!("no sign change on [{lo}, {hi}]")));
    }
    let rising = flo < 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECT_WIDTH * mid.abs().max(1.0) || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let (a, b) = (lo - (hi - lo), hi + (hi - lo));
    for _ in 0..2 {
        let d = df(x)?;
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x)? / d;
        if next.is_finite() && next >= a && next <= b {
            x = next;
        }
    }
    Ok(x)
}

/// Root of an increasing `f` on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`, by Newton from `x0`
/// with a bisection fallback whenever a step leaves the current bracket.
///
/// `fd` returns `(f, f′)`.
pub fn safeguarded_newton(
    mut fd: impl FnMut(f64) -> Result<(f64, f64)>,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let (v, d) = fd(x)?;
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= BISECT_WIDTH * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numeric(format!("Newton iteration did not settle in [{lo}, {hi}]")))
}

/// Jet of the implicit solution `τ(·)` of `F(τ, ·) = 0` near a known root `tau0`.
///
/// `residual` maps a candidate jet to `F(τ, ·)` carried in the same
/// arithmetic; `slope` is `∂F/∂τ` at the root. Each frozen-slope Newton step
/// fixes one more order of the Taylor expansion.
pub fn implicit_jet<S: Scalar>(
    residual: impl Fn(S) -> Result<S>,
    tau0: f64,
    slope: f64,
    order: usize,
) -> Result<S> {
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::numeric("implicit function with vanishing slope"));
    }
    let mut tau = S::cst(tau0);
    for _ in 0..order {
        tau = tau - residual(tau)? / slope;
    }
    // The value part is the converged root; keep it exact.
    Ok(tau - (tau.value() - tau0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gexpr::{Jet, Jet3};

    #[test]
    fn finds_root_of_increasing_function_on_half_line() {
        let i = Interval::new(0.0, f64::INFINITY).unwrap();
        let r = increasing_root(|x| Ok(x.ln() - 2.0), |x| Ok(1.0 / x), i, 0.5).unwrap().unwrap();
        assert!((r - 2f64.exp()).abs() < 1e-14 * 2f64.exp());
    }

    #[test]
    fn safeguarded_newton_survives_a_flat_start() {
        // x³ has f' = 0 at the start; the bracket keeps the iteration alive
        let r = safeguarded_newton(|x| Ok((x * x * x - 2.0, 3.0 * x * x)), -1.0, 3.0, 0.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_root() {
        let i = Interval::new(-1.0, 1.0).unwrap();
        assert_eq!(increasing_root(|x| Ok(x - 5.0), |_| Ok(1.0), i, 0.0).unwrap(), None);
    }

    #[test]
    fn implicit_jet_of_cube_root() {
        // τ³ = s at s = 8: τ' = 1/12, τ'' = −2/(9·8^{5/3}) = −1/144, τ''' = 10/(27 s^{8/3})
        let s = Jet3::var(8.0);
        let tau = implicit_jet(|t: Jet3| Ok(t * t * t - s), 2.0, 12.0, 4).unwrap();
        assert!((tau.d1 - 1.0 / 12.0).abs() < 1e-15);
        assert!((tau.d2 + 1.0 / 144.0).abs() < 1e-15);
        assert!((tau.d3 - 10.0 / (27.0 * 256.0)).abs() < 1e-15);
    }

    #[test]
    fn implicit_jet_bivariate() {
        // τ + u²τ/2 = v  ⇒ τ = 2v/(2+u²)
        let [u, v] = Jet::<2>::vars([0.7, 1.1]);
        let t0 = 2.0 * 1.1 / (2.0 + 0.49);
        let tau = implicit_jet(|t: Jet<2>| Ok(t + u * u * t * 0.5 - v), t0, 1.0 + 0.245, 3).unwrap();
        let exact = v * 2.0 / (u * u + 2.0);
        for i in 0..2 {
            assert!((tau.g[i] - exact.g[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((tau.h[i][j] - exact.h[i][j]).abs() < 1e-14);
            }
        }
    }
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gexpr::{Dual, Scalar};

fn psi<S: Scalar>(x: S) -> S {
    if x.value() <= 0.0 {
        S::cst(0.0)
    } else {
        (-x.recip()).exp()
    }
}

/// Smooth step: `0` for `x ≤ 0`, `1` for `x ≥ 1`, `S(x) + S(1 − x) = 1`.
pub fn smoothstep<S: Scalar>(x: S) -> S {
    let v = x.value();
    if v <= 0.0 {
        return S::cst(0.0);
    }
    if v >= 1.0 {
        return S::cst(1.0);
    }
    let a = psi(x);
    a / (a + psi(-x + 1.0))
}

/// The window bump `χ` and the normalized kernel `χ̂ = χ/(3δ)`.
///
/// `χ(s) = S((2δ − |s|)/δ)`: `χ ≡ 1` on `|s| ≤ δ`, `supp χ = [−2δ, 2δ]`, `∫χ = 3δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpFamily {
    pub delta: f64,
    /// Measured `sup |χ′|`.
    pub c_delta: f64,
}

impl BumpFamily {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        let mut b = BumpFamily { delta, c_delta: 0.0 };
        let n = 4096;
        let mut c = 0.0f64;
        for i in 0..=n {
            let s = delta + delta * i as f64 / n as f64;
            c = c.max(b.chi(Dual::<1>::var(s, 0)).g[0].abs());
        }
        b.c_delta = c;
        Ok(b)
    }

    pub fn chi<S: Scalar>(&self, s: S) -> S {
        let a = if s.value() < 0.0 { -s } else { s };
        smoothstep((-a + 2.0 * self.delta) / self.delta)
    }

    pub fn chi_hat<S: Scalar>(&self, s: S) -> S {
        self.chi(s) / (3.0 * self.delta)
    }

    /// `χ_k(s) = χ(s/k)`.
    pub fn chi_k<S: Scalar>(&self, s: S, k: f64) -> S {
        self.chi(s / k)
    }

    /// `χ̃_k(s) = kχ̂(ks)`.
    pub fn chi_tilde_k<S: Scalar>(&self, s: S, k: f64) -> S {
        self.chi_hat(s * k) * k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::quad::integrate;
    use crate::hcalc::QuadratureSpec;

    #[test]
    fn step_symmetry() {
        for x in [0.1, 0.3, 0.5, 0.77] {
            assert!((smoothstep(x) + smoothstep(1.0 - x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smoothstep(0.5), 0.5);
    }

    #[test]
    fn plateau_support_mass() {
        let b = BumpFamily::new(0.25).unwrap();
        assert_eq!(b.chi(0.0), 1.0);
        assert_eq!(b.chi(0.25), 1.0);
        assert_eq!(b.chi(-0.5), 0.0);
        let q = QuadratureSpec::default().with_rel_tol(1e-13);
        let (m, _) = integrate(|s| Ok(b.chi_hat(s)), -0.5, 0.5, &q).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let (m, _) = integrate(|s| Ok(b.chi_tilde_k(s, 8.0)), -0.5, 0.5, &q).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        // sup |χ′| = sup S′/δ, attained at the midpoint of the transition
        assert!((b.c_delta - 2.0 / 0.25).abs() < 1e-3, "{}", b.c_delta);
    }
}

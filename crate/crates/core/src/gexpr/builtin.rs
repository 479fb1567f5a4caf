use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use super::expr::{DomainKind, EvalError};

const POLE_TOL: f64 = 1e-13;

/// Closed-form strip generators with hand-coded derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// `tan(tanh t)` on ℝ.
    TanTanh,
    /// `αt + β` on ℝ.
    Affine { alpha: f64, beta: f64 },
    /// `cot(π/2 − t) = tan t` on (−π/2, π/2).
    CotShift,
    /// `t²` on (0, ∞).
    SquarePos,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("unknown builtin `{name}` with {nparams} parameter(s)")]
pub struct UnknownBuiltin {
    pub name: String,
    pub nparams: usize,
}

impl Builtin {
    pub fn from_name(name: &str, params: &[f64]) -> Result<Builtin, UnknownBuiltin> {
        match (name, params) {
            ("tan_tanh", []) => Ok(Builtin::TanTanh),
            ("affine", [a, b]) => Ok(Builtin::Affine { alpha: *a, beta: *b }),
            ("cot_shift", []) => Ok(Builtin::CotShift),
            ("square_pos", []) => Ok(Builtin::SquarePos),
            _ => Err(UnknownBuiltin { name: name.to_string(), nparams: params.len() }),
        }
    }

    /// Open interval on which the function serves as a strip generator.
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Builtin::TanTanh | Builtin::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Builtin::CotShift => (-FRAC_PI_2, FRAC_PI_2),
            Builtin::SquarePos => (0.0, f64::INFINITY),
        }
    }

    /// Equivalent expression text in the parser's grammar.
    pub fn source(&self) -> String {
        match self {
            Builtin::TanTanh => "tan(tanh(t))".into(),
            Builtin::Affine { alpha, beta } => {
                use super::Expr;
                let tree = Expr::Add(
                    Box::new(Expr::Mul(Box::new(Expr::num(*alpha)), Box::new(Expr::Var(0)))),
                    Box::new(Expr::num(*beta)),
                );
                tree.display(&["t".to_string()]).to_string()
            }
            Builtin::CotShift => "cot(pi/2 - t)".into(),
            Builtin::SquarePos => "t^2".into(),
        }
    }

    pub fn derivs(&self, t: f64) -> Result<[f64; 4], EvalError> {
        match *self {
            Builtin::TanTanh => {
                let u = t.tanh();
                let u1 = 1.0 - u * u;
                let u2 = -2.0 * u * u1;
                let u3 = -2.0 * (u1 * u1 + u * u2);
                let g = u.tan();
                let s = 1.0 + g * g;
                let f1 = s;
                let f2 = 2.0 * g * s;
                let f3 = 2.0 * s * (1.0 + 3.0 * g * g);
                Ok([
                    g,
                    f1 * u1,
                    f2 * u1 * u1 + f1 * u2,
                    f3 * u1 * u1 * u1 + 3.0 * f2 * u1 * u2 + f1 * u3,
                ])
            }
            Builtin::Affine { alpha, beta } => Ok([alpha * t + beta, alpha, 0.0, 0.0]),
            Builtin::CotShift => {
                if t.cos().abs() <= POLE_TOL * (1.0 + t.abs()) {
                    return Err(EvalError::new(DomainKind::Pole, self.source(), &[t]));
                }
                let g = t.tan();
                let s = 1.0 + g * g;
                Ok([g, s, 2.0 * g * s, 2.0 * s * (1.0 + 3.0 * g * g)])
            }
            Builtin::SquarePos => Ok([t * t, 2.0 * t, 2.0, 0.0]),
        }
    }
}

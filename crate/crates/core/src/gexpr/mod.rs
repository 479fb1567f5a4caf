//! User-supplied scalar functions and their derivative jets.
//!
//! Expressions are parsed into an immutable tree and evaluated over any
//! [`Scalar`] carrier, so the same tree yields plain values, univariate
//! third-order jets, or multivariate first/second-order jets. Univariate
//! functions of every origin (parsed, built in, interpolated, implicitly
//! defined) meet behind [`UniFn`]; multivariate ones behind [`Field`].

mod builtin;
mod expr;
mod jet;

use std::fmt;
use std::sync::Arc;

pub use builtin::{Builtin, UnknownBuiltin};
pub use expr::{Constant, DomainKind, EvalError, Expr, ExprDisplay, Func, ParseError, ParseErrorKind};
pub use jet::{Compose, Dual, Jet, Jet3, Scalar};

use expr::Parser;

/// A univariate function known through its first three derivatives.
pub trait UniFn: Send + Sync + fmt::Debug {
    /// `[f, f', f'', f''']` at `t`.
    fn derivs(&self, t: f64) -> Result<[f64; 4], EvalError>;

    /// Expression text, or a description when no text form exists.
    fn describe(&self) -> String;
}

pub trait UniFnExt {
    fn apply<S: Scalar>(&self, x: S) -> Result<S, EvalError>;
    fn value(&self, t: f64) -> Result<f64, EvalError>;
    fn jet(&self, t: f64) -> Result<Jet3, EvalError>;
}

impl<F: UniFn + ?Sized> UniFnExt for F {
    fn apply<S: Scalar>(&self, x: S) -> Result<S, EvalError> {
        Ok(x.lift(self.derivs(x.value())?))
    }
    fn value(&self, t: f64) -> Result<f64, EvalError> {
        Ok(self.derivs(t)?[0])
    }
    fn jet(&self, t: f64) -> Result<Jet3, EvalError> {
        let d = self.derivs(t)?;
        Ok(Jet3::new(d[0], d[1], d[2], d[3]))
    }
}

/// A function of `M` variables known through its second-order jet.
pub trait Field<const M: usize>: Send + Sync + fmt::Debug {
    fn jet(&self, p: [f64; M]) -> Result<Jet<M>, EvalError>;

    fn describe(&self) -> String;
}

pub trait FieldExt<const M: usize> {
    fn apply<S: Compose>(&self, args: [S; M]) -> Result<S, EvalError>;
    fn value(&self, p: [f64; M]) -> Result<f64, EvalError>;
}

impl<const M: usize, F: Field<M> + ?Sized> FieldExt<M> for F {
    fn apply<S: Compose>(&self, args: [S; M]) -> Result<S, EvalError> {
        let mut p = [0.0; M];
        for i in 0..M {
            p[i] = args[i].value();
        }
        Ok(S::compose(&self.jet(p)?, &args))
    }
    fn value(&self, p: [f64; M]) -> Result<f64, EvalError> {
        Ok(self.jet(p)?.v)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Tree(Expr),
    Builtin(Builtin),
}

/// A parsed or built-in scalar function of named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFn {
    repr: Repr,
    vars: Vec<String>,
}

impl ScalarFn {
    /// Parses `src` with the given variable names, in argument order.
    pub fn parse(src: &str, vars: &[&str]) -> Result<ScalarFn, ParseError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let tree = Parser::parse(src, &vars)?;
        Ok(ScalarFn { repr: Repr::Tree(tree), vars })
    }

    pub fn from_expr(tree: Expr, vars: &[&str]) -> ScalarFn {
        ScalarFn { repr: Repr::Tree(tree), vars: vars.iter().map(|s| s.to_string()).collect() }
    }

    /// Built-in univariate function of `t` with hand-coded derivatives.
    pub fn builtin(name: &str, params: &[f64]) -> Result<ScalarFn, UnknownBuiltin> {
        Ok(ScalarFn { repr: Repr::Builtin(Builtin::from_name(name, params)?), vars: vec!["t".into()] })
    }

    pub fn from_builtin(b: Builtin) -> ScalarFn {
        ScalarFn { repr: Repr::Builtin(b), vars: vec!["t".into()] }
    }

    /// Expression tree, re-parsing the text form of a builtin.
    pub fn to_tree(&self) -> Expr {
        match &self.repr {
            Repr::Tree(e) => e.clone(),
            Repr::Builtin(b) => Parser::parse(&b.source(), &self.vars).expect("builtin source parses"),
        }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn tree(&self) -> Option<&Expr> {
        match &self.repr {
            Repr::Tree(e) => Some(e),
            Repr::Builtin(_) => None,
        }
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match &self.repr {
            Repr::Builtin(b) => Some(*b),
            Repr::Tree(_) => None,
        }
    }

    pub fn eval<S: Scalar>(&self, args: &[S]) -> Result<S, EvalError> {
        if args.len() != self.vars.len() {
            let at: Vec<f64> = args.iter().map(|a| a.value()).collect();
            return Err(EvalError::new(DomainKind::Arity, self.to_string(), &at));
        }
        match &self.repr {
            Repr::Tree(e) => e.eval(args, &self.vars),
            Repr::Builtin(b) => Ok(args[0].lift(b.derivs(args[0].value())?)),
        }
    }

    pub fn value(&self, args: &[f64]) -> Result<f64, EvalError> {
        self.eval(args)
    }

    /// Third-order jet of a univariate function.
    pub fn eval_jet(&self, t: f64) -> Result<Jet3, EvalError> {
        self.eval(&[Jet3::var(t)])
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Tree(e) => write!(f, "{}", e.display(&self.vars)),
            Repr::Builtin(b) => write!(f, "{}", b.source()),
        }
    }
}

impl UniFn for ScalarFn {
    fn derivs(&self, t: f64) -> Result<[f64; 4], EvalError> {
        Ok(self.eval_jet(t)?.as_array())
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl<const M: usize> Field<M> for ScalarFn {
    fn jet(&self, p: [f64; M]) -> Result<Jet<M>, EvalError> {
        self.eval(&Jet::<M>::vars(p))
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl<T: UniFn + ?Sized> UniFn for Arc<T> {
    fn derivs(&self, t: f64) -> Result<[f64; 4], EvalError> {
        (**self).derivs(t)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<const M: usize, T: Field<M> + ?Sized> Field<M> for Arc<T> {
    fn jet(&self, p: [f64; M]) -> Result<Jet<M>, EvalError> {
        (**self).jet(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

type DerivFn = dyn Fn(f64) -> Result<[f64; 4], EvalError> + Send + Sync;

/// A univariate function given by a closure returning `[f, f', f'', f''']`.
#[derive(Clone)]
pub struct FnUni {
    f: Arc<DerivFn>,
    name: String,
}

impl FnUni {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> Result<[f64; 4], EvalError> + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), name: name.into() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| Ok([c, 0.0, 0.0, 0.0]))
    }
}

impl fmt::Debug for FnUni {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnUni({})", self.name)
    }
}

impl UniFn for FnUni {
    fn derivs(&self, t: f64) -> Result<[f64; 4], EvalError> {
        (self.f)(t)
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Parses a univariate function of `t`.
pub fn parse_g(src: &str) -> Result<ScalarFn, ParseError> {
    ScalarFn::parse(src, &["t"])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet() {
        let f = parse_g("t^2").unwrap();
        assert_eq!(f.eval_jet(3.0).unwrap().as_array(), [9.0, 6.0, 2.0, 0.0]);
    }

    #[test]
    fn tan_tanh_at_origin() {
        let j = parse_g("tan(tanh(t))").unwrap().eval_jet(0.0).unwrap();
        assert_eq!((j.v, j.d1, j.d2), (0.0, 1.0, 0.0));
    }

    #[test]
    fn shifted_cotangent_is_tangent() {
        let j = parse_g("cot(pi/2 - t)").unwrap().eval_jet(0.0).unwrap();
        assert!(j.v.abs() < 1e-16);
        assert!((j.d1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incomplete_power_reports_offset() {
        let err = parse_g("t^").unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn unknown_identifier_and_arity() {
        let err = parse_g("2*q + 1").unwrap_err();
        assert_eq!((err.offset, err.kind), (2, ParseErrorKind::UnknownIdentifier("q".into())));
        let err = parse_g("sin(t, t)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::WrongArity { found: 2, .. }));
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        let f = parse_g("-2^3^2").unwrap();
        assert_eq!(f.value(&[0.0]).unwrap(), -512.0);
    }

    #[test]
    fn cot_pole_is_a_domain_error() {
        let f = parse_g("cot(t)").unwrap();
        for k in [-3.0, -1.0, 0.0, 1.0, 2.0, 5.0] {
            let err = f.eval_jet(k * std::f64::consts::PI).unwrap_err();
            assert_eq!(err.kind, DomainKind::Pole);
        }
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let f = parse_g("1 + log(t - 1)").unwrap();
        let err = f.value(&[0.5]).unwrap_err();
        assert_eq!(err.kind, DomainKind::LogNonPositive);
        assert_eq!(err.subexpr, "log(t - 1)");
        let err = parse_g("1/t").unwrap().value(&[0.0]).unwrap_err();
        assert_eq!(err.kind, DomainKind::DivisionByZero);
    }

    #[test]
    fn substitution_composes() {
        let h = parse_g("sin(t) + t^2").unwrap();
        let lin = ScalarFn::parse("2*x - y", &["x", "y"]).unwrap().to_tree();
        let f = ScalarFn::from_expr(h.to_tree().substitute(&[lin]), &["x", "y"]);
        let (x, y) = (0.3, -0.8);
        let a: f64 = 2.0 * x - y;
        assert!((f.value(&[x, y]).unwrap() - (a.sin() + a * a)).abs() < 1e-15);
        let b = ScalarFn::builtin("tan_tanh", &[]).unwrap();
        assert_eq!(b.to_tree(), parse_g("tan(tanh(t))").unwrap().to_tree());
    }

    #[test]
    fn bivariate_mixed_partials() {
        let f = ScalarFn::parse("x*y/2 + sin(x)*y^2", &["x", "y"]).unwrap();
        let j: Jet<2> = Field::<2>::jet(&f, [0.4, 1.3]).unwrap();
        assert!((j.h[0][1] - (0.5 + 2.0 * 1.3 * 0.4f64.cos())).abs() < 1e-14);
        assert!((j.h[0][1] - j.h[1][0]).abs() < 1e-15);
    }
}

use std::fmt;

use thiserror::Error;

use super::jet::Scalar;

/// Arguments this close to a pole of `tan` or `cot` (relative to `1 + |a|`) are rejected.
const POLE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Tanh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Cot,
        Func::Tanh,
        Func::Cosh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Tanh => "tanh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnknownIdentifier(String),
    WrongArity { name: String, expected: usize, found: usize },
    BadNumber(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token '{t}'"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::WrongArity { name, expected, found } => {
                write!(f, "'{name}' takes {expected} argument(s), found {found}")
            }
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number '{s}'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    Pole,
    PowDomain,
    NonFinite,
    OutsideInterval,
    Arity,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::LogNonPositive => "log of a nonpositive number",
            DomainKind::SqrtNegative => "square root of a negative number",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::Pole => "pole of tan/cot",
            DomainKind::PowDomain => "power outside its real domain",
            DomainKind::NonFinite => "non-finite result",
            DomainKind::OutsideInterval => "argument outside the function's interval",
            DomainKind::Arity => "wrong number of arguments",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("domain error ({kind}) in `{subexpr}` at {at:?}")]
pub struct EvalError {
    pub kind: DomainKind,
    pub subexpr: String,
    pub at: Vec<f64>,
}

impl EvalError {
    pub fn new(kind: DomainKind, subexpr: impl Into<String>, at: &[f64]) -> Self {
        Self { kind, subexpr: subexpr.into(), at: at.to_vec() }
    }
}

impl Expr {
    /// A numeric literal that prints and re-parses to the same tree.
    pub fn num(c: f64) -> Expr {
        if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Num(-c)))
        } else {
            Expr::Num(c)
        }
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Highest variable index used, plus one.
    pub fn var_bound(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.var_bound(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.var_bound().max(b.var_bound())
            }
        }
    }

    /// Replaces every `Var(i)` by `map[i]`.
    pub fn substitute(&self, map: &[Expr]) -> Expr {
        let b = |e: &Expr| Box::new(e.substitute(map));
        match self {
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Var(i) => map[*i].clone(),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Call(f, a) => Expr::Call(*f, b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, y) => Expr::Pow(b(x), b(y)),
        }
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }

    /// Evaluates over any [`Scalar`] carrier. `vars` names the variables for diagnostics.
    pub fn eval<S: Scalar>(&self, args: &[S], vars: &[String]) -> Result<S, EvalError> {
        let r = self.eval_inner(args, vars)?;
        if !r.is_finite() {
            return Err(self.error(DomainKind::NonFinite, args, vars));
        }
        Ok(r)
    }

    fn error<S: Scalar>(&self, kind: DomainKind, args: &[S], vars: &[String]) -> EvalError {
        let at: Vec<f64> = args.iter().map(|a| a.value()).collect();
        EvalError::new(kind, self.display(vars).to_string(), &at)
    }

    fn eval_inner<S: Scalar>(&self, args: &[S], vars: &[String]) -> Result<S, EvalError> {
        Ok(match self {
            Expr::Num(c) => S::cst(*c),
            Expr::Const(c) => S::cst(c.value()),
            Expr::Var(i) => match args.get(*i) {
                Some(a) => *a,
                None => return Err(self.error(DomainKind::Arity, args, vars)),
            },
            Expr::Neg(a) => -a.eval_inner(args, vars)?,
            Expr::Add(a, b) => a.eval_inner(args, vars)? + b.eval_inner(args, vars)?,
            Expr::Sub(a, b) => a.eval_inner(args, vars)? - b.eval_inner(args, vars)?,
            Expr::Mul(a, b) => a.eval_inner(args, vars)? * b.eval_inner(args, vars)?,
            Expr::Div(a, b) => {
                let num = a.eval_inner(args, vars)?;
                let den = b.eval_inner(args, vars)?;
                if den.value() == 0.0 {
                    return Err(self.error(DomainKind::DivisionByZero, args, vars));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval_inner(args, vars)?;
                let x = base.value();
                if b.is_constant() {
                    let c = b.eval_inner::<f64>(&[], vars)?;
                    if c == c.round() && c.abs() <= 64.0 {
                        if x == 0.0 && c < 0.0 {
                            return Err(self.error(DomainKind::DivisionByZero, args, vars));
                        }
                        base.powi(c as i32)
                    } else {
                        if x < 0.0 || (x == 0.0 && c < 0.0) {
                            return Err(self.error(DomainKind::PowDomain, args, vars));
                        }
                        base.powf(c)
                    }
                } else {
                    if x <= 0.0 {
                        return Err(self.error(DomainKind::PowDomain, args, vars));
                    }
                    let e = b.eval_inner(args, vars)?;
                    (base.ln() * e).exp()
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval_inner(args, vars)?;
                let xv = x.value();
                let pole_tol = POLE_TOL * (1.0 + xv.abs());
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => {
                        if xv.cos().abs() <= pole_tol {
                            return Err(self.error(DomainKind::Pole, args, vars));
                        }
                        x.tan()
                    }
                    Func::Cot => {
                        if xv.sin().abs() <= pole_tol {
                            return Err(self.error(DomainKind::Pole, args, vars));
                        }
                        x.cot()
                    }
                    Func::Tanh => x.tanh(),
                    Func::Cosh => x.cosh(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if xv <= 0.0 {
                            return Err(self.error(DomainKind::LogNonPositive, args, vars));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if xv < 0.0 {
                            return Err(self.error(DomainKind::SqrtNegative, args, vars));
                        }
                        x.sqrt()
                    }
                    Func::Atan => x.atan(),
                }
            }
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [String],
}

impl ExprDisplay<'_> {
    fn child(&self, e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = ExprDisplay { expr: e, vars: self.vars };
        if e.prec() < min_prec {
            write!(f, "({d})")
        } else {
            write!(f, "{d}")
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Var(i) => match self.vars.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "_{i}"),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.child(a, 3, f)
            }
            Expr::Add(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " + ")?;
                self.child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " - ")?;
                self.child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.child(a, 2, f)?;
                write!(f, "*")?;
                self.child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.child(a, 2, f)?;
                write!(f, "/")?;
                self.child(b, 3, f)
            }
            Expr::Pow(a, b) => {
                self.child(a, 5, f)?;
                write!(f, "^")?;
                self.child(b, 3, f)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.child(a, 0, f)?;
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, bytes: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.bytes[self.pos];
        let tok = if c.is_ascii_digit() || c == b'.' {
            self.number()?
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            Tok::Ident(self.src[start..self.pos].to_string())
        } else {
            self.pos += 1;
            match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                _ => {
                    let ch = self.src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedChar(ch) });
                }
            }
        };
        Ok(Some((start, tok)))
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && b[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < b.len() && b[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let mut k = self.pos + 1;
            if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                k += 1;
            }
            if k < b.len() && b[k].is_ascii_digit() {
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                self.pos = k;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError { offset: start, kind: ParseErrorKind::BadNumber(text.to_string()) })
    }
}

pub(crate) struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    pub(crate) fn parse(src: &str, vars: &'a [String]) -> Result<Expr, ParseError> {
        let toks = Lexer::tokens(src)?;
        let mut p = Parser { toks, pos: 0, end: src.len(), vars };
        let e = p.expr()?;
        if let Some((off, t)) = p.toks.get(p.pos) {
            return Err(ParseError { offset: *off, kind: ParseErrorKind::UnexpectedToken(tok_text(t)) });
        }
        Ok(e)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn unexpected(&self) -> ParseError {
        match self.toks.get(self.pos) {
            Some((off, t)) => ParseError { offset: *off, kind: ParseErrorKind::UnexpectedToken(tok_text(t)) },
            None => ParseError { offset: self.end, kind: ParseErrorKind::UnexpectedEnd },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(Expr::Num(c))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(self.unexpected()),
                }
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError { offset: off, kind: ParseErrorKind::UnknownIdentifier(name) });
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    match self.peek() {
                        Some(Tok::RParen) => self.pos += 1,
                        _ => return Err(self.unexpected()),
                    }
                    if args.len() != 1 {
                        return Err(ParseError {
                            offset: off,
                            kind: ParseErrorKind::WrongArity { name, expected: 1, found: args.len() },
                        });
                    }
                    return Ok(Expr::Call(func, Box::new(args.pop().unwrap())));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    _ if Func::from_name(&name).is_some() => Err(ParseError {
                        offset: off,
                        kind: ParseErrorKind::WrongArity { name, expected: 1, found: 0 },
                    }),
                    _ => Err(ParseError { offset: off, kind: ParseErrorKind::UnknownIdentifier(name) }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(c) => c.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
    }
}

//! A small expression language for candidate functions.
//!
//! In f-mode an expression is a function of `x` and `y`, with `z` standing
//! for `y * x^(-3/2)`. In h-mode only `z` is permitted and the expression is
//! a univariate profile. Exponents must fold to constants at parse time.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := base ("^" unary)?
//! base  := NUMBER | "x" | "y" | "z" | "(" expr ")"
//!        | ("sqrt" | "exp" | "log") "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-x^2` is `-(x^2)` and `2^3^2` is `2^9`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet1, Jet2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Functions of `(x, y)`; `z` is sugar for `y x^{-3/2}`.
    F,
    /// Profiles in `z` alone.
    H,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::F => "f",
            Mode::H => "h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Base raised to a folded constant exponent.
    Pow(Box<Expr>, f64),
}

/// A parsed expression together with the mode it was parsed in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub root: Expr,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                offset: start,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {what}, found {found}"),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        let e = const_value(&exponent).ok_or_else(|| Error::Exponent {
            offset: at,
            message: "exponent depends on a variable".into(),
        })?;
        if !e.is_finite() {
            return Err(Error::Exponent {
                offset: at,
                message: format!("exponent folds to {e}"),
            });
        }
        Ok(Expr::Pow(Box::new(base), e))
    }

    fn base(&mut self) -> Result<Expr> {
        let (tok, at) = match self.peek() {
            Tok::Num(_) | Tok::Ident(_) | Tok::LParen => self.bump(),
            _ => return Err(self.unexpected("a number, variable, function or `(`")),
        };
        match tok {
            Tok::Num(v) => Ok(Expr::Number(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "x" => Some(Var::X),
                    "y" => Some(Var::Y),
                    "z" => Some(Var::Z),
                    _ => None,
                };
                if let Some(v) = var {
                    if self.mode == Mode::H && v != Var::Z {
                        return Err(Error::Mode {
                            offset: at,
                            var: name.chars().next().unwrap_or('?'),
                            mode: self.mode.name(),
                        });
                    }
                    return Ok(Expr::Var(v));
                }
                let f = match name.as_str() {
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    _ => {
                        return Err(Error::Syntax {
                            offset: at,
                            message: format!("unknown identifier `{name}`"),
                        })
                    }
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Func(f, Box::new(arg)))
            }
            _ => unreachable!(),
        }
    }
}

/// Value of a variable-free subexpression.
fn const_value(e: &Expr) -> Option<f64> {
    Some(match e {
        Expr::Number(v) => *v,
        Expr::Var(_) => return None,
        Expr::Neg(a) => -const_value(a)?,
        Expr::Func(f, a) => {
            let a = const_value(a)?;
            match f {
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (const_value(a)?, const_value(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
        Expr::Pow(a, e) => const_value(a)?.powf(*e),
    })
}

/// Parses `src` in the given mode.
pub fn parse(src: &str, mode: Mode) -> Result<ExprAst> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        mode,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(ExprAst { root, mode })
}

impl fmt::Display for Expr {
    /// Fully parenthesized form that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::Z) => f.write_str("z"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Func(g, a) => {
                let name = match g {
                    Func::Sqrt => "sqrt",
                    Func::Exp => "exp",
                    Func::Log => "log",
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a}) {s} ({b})")
            }
            Expr::Pow(a, e) => write!(f, "({a})^({e})"),
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn eval(e: &Expr, vars: &dyn Fn(Var) -> Result<Jet2>) -> Result<Jet2> {
    Ok(match e {
        Expr::Number(v) => Jet2::constant(*v),
        Expr::Var(v) => vars(*v)?,
        Expr::Neg(a) => -eval(a, vars)?,
        Expr::Func(g, a) => {
            let a = eval(a, vars)?;
            match g {
                Func::Sqrt => a.sqrt()?,
                Func::Exp => a.exp(),
                Func::Log => a.ln()?,
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval(a, vars)?, eval(b, vars)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a.try_div(b)?,
            }
        }
        Expr::Pow(a, r) => eval(a, vars)?.powf(*r)?,
    })
}

impl ExprAst {
    /// Jet of an f-mode expression at `(px, py)`; `z` expands to `y x^{-3/2}`.
    pub fn eval_jet(&self, px: f64, py: f64) -> Result<Jet2> {
        if self.mode != Mode::F {
            return Err(Error::InvalidInput(
                "eval_jet needs an f-mode expression; use eval_jet1".into(),
            ));
        }
        let (x, y) = crate::jet::seed(px, py);
        let z = || -> Result<Jet2> { Ok(y * x.powf(-1.5)?) };
        eval(&self.root, &|v| match v {
            Var::X => Ok(x),
            Var::Y => Ok(y),
            Var::Z => z(),
        })
    }

    /// Value and first two derivatives of an h-mode profile at `z`.
    pub fn eval_jet1(&self, z: f64) -> Result<Jet1> {
        let zj = Jet2::var_x(z);
        let j = eval(&self.root, &|v| match v {
            Var::Z => Ok(zj),
            _ => Err(Error::Mode {
                offset: 0,
                var: if v == Var::X { 'x' } else { 'y' },
                mode: "h",
            }),
        })?;
        Ok(Jet1 {
            v: j.v,
            d1: j.dx,
            d2: j.dxx,
        })
    }
}

/// Parses and evaluates in one step.
pub fn eval_jet(ast: &ExprAst, px: f64, py: f64) -> Result<Jet2> {
    ast.eval_jet(px, py)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Z_MAX;

    #[test]
    fn parses_certificate_function() {
        let ast = parse("x^(1/6)*(1-54*z^2)^3", Mode::F).unwrap();
        match &ast.root {
            Expr::Binary(BinOp::Mul, a, b) => {
                assert!(matches!(**a, Expr::Pow(_, e) if e == 1.0 / 6.0));
                assert!(matches!(**b, Expr::Pow(_, e) if e == 3.0));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            parse("x^^2", Mode::F),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse("x + h", Mode::H),
            Err(Error::Mode { offset: 0, var: 'x', .. })
        ));
        assert!(matches!(parse("x^y", Mode::F), Err(Error::Exponent { offset: 2, .. })));
        assert!(matches!(parse("x^(1/0)", Mode::F), Err(Error::Exponent { .. })));
        assert!(matches!(parse("", Mode::F), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("(x", Mode::F), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x $ 2", Mode::F), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("foo(x)", Mode::F), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("x y", Mode::F), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn precedence() {
        let j = parse("-x^2", Mode::F).unwrap().eval_jet(3.0, 0.0).unwrap();
        assert_eq!(j.v, -9.0);
        let j = parse("2^3^2", Mode::F).unwrap().eval_jet(1.0, 0.0).unwrap();
        assert_eq!(j.v, 512.0);
        let j = parse("x^-1", Mode::F).unwrap().eval_jet(4.0, 0.0).unwrap();
        assert_eq!(j.v, 0.25);
        let j = parse("1 - 2 - 3", Mode::F).unwrap().eval_jet(1.0, 0.0).unwrap();
        assert_eq!(j.v, -4.0);
        let j = parse("8 / 4 / 2", Mode::F).unwrap().eval_jet(1.0, 0.0).unwrap();
        assert_eq!(j.v, 1.0);
        let j = parse("1.5e1 + 2E-1", Mode::F).unwrap().eval_jet(1.0, 0.0).unwrap();
        assert_eq!(j.v, 15.2);
    }

    #[test]
    fn eval_examples() {
        let j = parse("x", Mode::F).unwrap().eval_jet(2.0, 5.0).unwrap();
        assert_eq!(j, Jet2 { v: 2.0, dx: 1.0, ..Jet2::default() });

        let j = parse("x^(1/6)", Mode::F).unwrap().eval_jet(64.0, 0.0).unwrap();
        assert!((j.v - 2.0).abs() < 1e-15 && (j.dx - 1.0 / 192.0).abs() < 1e-17);

        let j = parse("x^(1/6)*(1-54*z^2)", Mode::F)
            .unwrap()
            .eval_jet(1.0, Z_MAX)
            .unwrap();
        assert!(j.v.abs() < 1e-14);
    }

    #[test]
    fn eval_errors() {
        let ast = parse("z", Mode::F).unwrap();
        assert!(matches!(ast.eval_jet(0.0, 1.0), Err(Error::SingularJet(_))));
        let ast = parse("log(y)", Mode::F).unwrap();
        assert!(matches!(ast.eval_jet(1.0, -1.0), Err(Error::Domain(_))));
        let ast = parse("sqrt(y)", Mode::F).unwrap();
        assert!(matches!(ast.eval_jet(1.0, -1.0), Err(Error::Domain(_))));
        let ast = parse("1/y", Mode::F).unwrap();
        assert!(matches!(ast.eval_jet(1.0, 0.0), Err(Error::DivisionByZero)));
        assert!(parse("z", Mode::H).unwrap().eval_jet(1.0, 1.0).is_err());
    }

    #[test]
    fn h_mode_profile() {
        let h = parse("1 - 54*z^2", Mode::H).unwrap().eval_jet1(0.1).unwrap();
        assert!((h.v - 0.46).abs() < 1e-15);
        assert!((h.d1 + 10.8).abs() < 1e-14);
        assert_eq!(h.d2, -108.0);
    }

    #[test]
    fn pretty_print_round_trip() {
        for src in [
            "x^(1/6)*(1-54*z^2)^3",
            "-x^2 + exp(y) / sqrt(x)",
            "log(x)*y^-2.5 - 0.1",
            "2^3^2*z",
        ] {
            let a = parse(src, Mode::F).unwrap();
            let b = parse(&a.to_string(), Mode::F).unwrap();
            assert_eq!(a, b, "{src} -> {a}");
        }
    }
}

//! Small expression language for profile functions (scale, twist) and gauge
//! functions.
//!
//! Identifiers `x`, `p1`, `p2`, `p3` and the constant `pi`; binary operators
//! `+ - * / ^` (with `^` right associative); functions `sin`, `cos`, `exp`,
//! `sech`, `sqrt`, `tanh`, `ln`. Expressions can be differentiated
//! symbolically, which is how `l'`, `l''` and gauge gradients are obtained.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    P1,
    P2,
    P3,
}

impl Var {
    fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::P1 => 1,
            Var::P2 => 2,
            Var::P3 => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::P1 => "p1",
            Var::P2 => "p2",
            Var::P3 => "p3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sech,
    Sqrt,
    Tanh,
    Ln,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sech" => Func::Sech,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "ln" | "log" => Func::Ln,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sech => "sech",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Ln => "ln",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sech => 1.0 / v.cosh(),
            Func::Sqrt => v.sqrt(),
            Func::Tanh => v.tanh(),
            Func::Ln => v.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0 };
        let e = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input in `{src}`"
            )));
        }
        Ok(e)
    }

    /// Evaluate with `vals = [x, p1, p2, p3]`.
    pub fn eval(&self, vals: &[f64; 4]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => vals[v.index()],
            Expr::Neg(a) => -a.eval(vals),
            Expr::Add(a, b) => a.eval(vals) + b.eval(vals),
            Expr::Sub(a, b) => a.eval(vals) - b.eval(vals),
            Expr::Mul(a, b) => a.eval(vals) * b.eval(vals),
            Expr::Div(a, b) => a.eval(vals) / b.eval(vals),
            Expr::Pow(a, b) => {
                let base = a.eval(vals);
                match **b {
                    Expr::Const(c) if c == c.trunc() && c.abs() < 64.0 => base.powi(c as i32),
                    _ => base.powf(b.eval(vals)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(vals)),
        }
    }

    pub fn eval_x(&self, x: f64) -> f64 {
        self.eval(&[x, 0.0, 0.0, 0.0])
    }

    pub fn eval_p(&self, p: [f64; 3]) -> f64 {
        self.eval(&[0.0, p[0], p[1], p[2]])
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    pub fn is_constant(&self) -> bool {
        ![Var::X, Var::P1, Var::P2, Var::P3]
            .iter()
            .any(|v| self.depends_on(*v))
    }

    /// Symbolic derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Expr {
        use Expr::*;
        if !self.depends_on(var) {
            return Const(0.0);
        }
        match self {
            Const(_) => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                ),
                pow((**b).clone(), Const(2.0)),
            ),
            Pow(a, b) => {
                if !b.depends_on(var) {
                    // d(u^n) = n u^(n-1) u'
                    mul(
                        mul((**b).clone(), pow((**a).clone(), sub((**b).clone(), Const(1.0)))),
                        a.derivative(var),
                    )
                } else {
                    // d(u^v) = u^v (v' ln u + v u'/u)
                    mul(
                        self.clone(),
                        add(
                            mul(b.derivative(var), call(Func::Ln, (**a).clone())),
                            div(mul((**b).clone(), a.derivative(var)), (**a).clone()),
                        ),
                    )
                }
            }
            Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Sech => neg(mul(
                        call(Func::Sech, inner.clone()),
                        call(Func::Tanh, inner),
                    )),
                    Func::Sqrt => div(Const(0.5), call(Func::Sqrt, inner)),
                    Func::Tanh => pow(call(Func::Sech, inner), Const(2.0)),
                    Func::Ln => div(Const(1.0), inner),
                };
                mul(outer, a.derivative(var))
            }
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(z), _) if *z == 0.0 => b,
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(z)) if *z == 0.0 => a,
        (Expr::Const(z), _) if *z == 0.0 => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => b,
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match &b {
        Expr::Const(o) if *o == 1.0 => a,
        Expr::Const(z) if *z == 0.0 => Expr::Const(1.0),
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            // right associative; exponent may carry a sign
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Parse("missing `)`".into())),
                }
            }
            Some(Token::Ident(name)) => {
                let var = match name.as_str() {
                    "x" => Some(Var::X),
                    "p1" => Some(Var::P1),
                    "p2" => Some(Var::P2),
                    "p3" => Some(Var::P3),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(Expr::Var(v));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                let func = Func::from_name(&name)
                    .ok_or_else(|| Error::Parse(format!("unknown identifier `{name}`")))?;
                match self.next() {
                    Some(Token::LParen) => {}
                    _ => return Err(Error::Parse(format!("expected `(` after `{name}`"))),
                }
                let arg = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                    _ => Err(Error::Parse("missing `)`".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// A function of arc length together with its first two derivatives.
#[derive(Clone, Debug)]
pub struct Profile {
    pub expr: Expr,
    d1: Expr,
    d2: Expr,
}

impl Profile {
    pub fn new(expr: Expr) -> Profile {
        let d1 = expr.derivative(Var::X);
        let d2 = d1.derivative(Var::X);
        Profile { expr, d1, d2 }
    }

    pub fn constant(v: f64) -> Profile {
        Profile::new(Expr::Const(v))
    }

    pub fn parse(src: &str) -> Result<Profile> {
        Ok(Profile::new(Expr::parse(src)?))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.expr.eval_x(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.d1.eval_x(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.d2.eval_x(x)
    }

    pub fn is_constant(&self) -> bool {
        !self.expr.depends_on(Var::X)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence_and_power() {
        let e = Expr::parse("1 + 2*3^2 - -4/2").unwrap();
        assert_eq!(e.eval_x(0.0), 1.0 + 18.0 + 2.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval_x(0.0), 512.0);
        let e = Expr::parse("1e-3*x").unwrap();
        assert!((e.eval_x(2.0) - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn sech_profile_derivatives_match_closed_form() {
        let p = Profile::parse("1 + 0.3*sech(x)").unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            let s = 1.0 / f64::cosh(x);
            let t = f64::tanh(x);
            assert!((p.d1(x) + 0.3 * s * t).abs() < 1e-14);
            // (sech)'' = sech (tanh^2 - sech^2)
            assert!((p.d2(x) - 0.3 * s * (t * t - s * s)).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_quadratic_gauge() {
        let chi = Expr::parse("p1*p2 + 0.5*p3^2 - 3*p1").unwrap();
        let g = [
            chi.derivative(Var::P1),
            chi.derivative(Var::P2),
            chi.derivative(Var::P3),
        ];
        let p = [0.3, -1.2, 2.0];
        assert!((g[0].eval_p(p) - (p[1] - 3.0)).abs() < 1e-14);
        assert!((g[1].eval_p(p) - p[0]).abs() < 1e-14);
        assert!((g[2].eval_p(p) - p[2]).abs() < 1e-14);
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("sqrt(1 + x^2) * exp(-x) / (2 - cos(pi*x))").unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        for &x in &[-1.0, 0.25, 3.0] {
            assert_eq!(e.eval_x(x), again.eval_x(x));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x $ 2").is_err());
    }
}

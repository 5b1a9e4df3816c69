//! Population-dependent scalar expressions.
//!
//! An [`Expr`] is a tree of constants, population reads `mu(<state>)`, the
//! four arithmetic operators and binary `min`/`max`. Nothing else is
//! accepted: there are no transcendental functions. Division by zero is an
//! error rather than a NaN.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := number | "mu" "(" ident ")" | ("min" | "max") "(" expr "," expr ")" | "(" expr ")"
//! ```
//!
//! Numbers are decimal literals with an optional exponent. A `-` directly in
//! front of a digit in factor position is read as part of the literal, so
//! negative constants print and reparse to the same tree.

use std::fmt;
use std::ops;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Population mass of the state with this index.
    Mu(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn c(x: f64) -> Expr {
        Expr::Const(x)
    }

    pub fn mu(state: usize) -> Expr {
        Expr::Mu(state)
    }

    /// Sum of population reads over several states; `0` for an empty list.
    pub fn mu_sum(states: &[usize]) -> Expr {
        let mut it = states.iter();
        match it.next() {
            None => Expr::c(0.0),
            Some(&first) => it.fold(Expr::mu(first), |acc, &s| acc + Expr::mu(s)),
        }
    }

    pub fn min(a: Expr, b: Expr) -> Expr {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Expr, b: Expr) -> Expr {
        Expr::Max(Box::new(a), Box::new(b))
    }

    /// `max(0, min(alpha, x))`, the tree form of [`u_clamp`].
    pub fn clamp(alpha: f64, x: Expr) -> Expr {
        Expr::max(Expr::c(0.0), Expr::min(Expr::c(alpha), x))
    }

    /// Tree form of [`omega`]: `u_1(1/2 + (x - 1/2) / (2 eps))`.
    pub fn omega(eps: f64, x: Expr) -> Expr {
        Expr::clamp(1.0, Expr::c(0.5) + (x - Expr::c(0.5)) / Expr::c(2.0 * eps))
    }

    /// Tree form of [`p_brittle`]: `u_1(1/2 + (x - y) / delta)`.
    pub fn brittle(delta: f64, x: Expr, y: Expr) -> Expr {
        Expr::clamp(1.0, Expr::c(0.5) + (x - y) / Expr::c(delta))
    }

    /// Evaluates the tree at the population vector `mu`.
    ///
    /// Panics if a `Mu` index is out of range; games validate indices at
    /// construction.
    pub fn eval(&self, mu: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(x) => *x,
            Expr::Mu(i) => mu[*i],
            Expr::Add(a, b) => a.eval(mu)? + b.eval(mu)?,
            Expr::Sub(a, b) => a.eval(mu)? - b.eval(mu)?,
            Expr::Mul(a, b) => a.eval(mu)? * b.eval(mu)?,
            Expr::Div(a, b) => {
                let num = a.eval(mu)?;
                let den = b.eval(mu)?;
                if den == 0.0 {
                    return Err(Error::DivideByZero);
                }
                num / den
            }
            Expr::Min(a, b) => a.eval(mu)?.min(b.eval(mu)?),
            Expr::Max(a, b) => a.eval(mu)?.max(b.eval(mu)?),
        })
    }

    /// True when the tree reads no population coordinate.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Mu(_) => false,
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Largest `Mu` index read by the tree.
    pub fn max_state(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Mu(i) => Some(*i),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.max_state().max(b.max_state()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Mu(_) => 1,
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Renders the tree with state names; the output reparses to an equal tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display { expr: self, names }
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

bin_op!(Add, add, Add);
bin_op!(Sub, sub, Sub);
bin_op!(Mul, mul, Mul);
bin_op!(Div, div, Div);

pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Display<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let infix = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| {
            f.write_str("(")?;
            self.write(a, f)?;
            write!(f, " {op} ")?;
            self.write(b, f)?;
            f.write_str(")")
        };
        let call = |f: &mut fmt::Formatter<'_>, name: &str, a: &Expr, b: &Expr| {
            write!(f, "{name}(")?;
            self.write(a, f)?;
            f.write_str(", ")?;
            self.write(b, f)?;
            f.write_str(")")
        };
        match e {
            Expr::Const(x) => write!(f, "{x:?}"),
            Expr::Mu(i) => match self.names.get(*i) {
                Some(n) => write!(f, "mu({n})"),
                None => write!(f, "mu(#{i})"),
            },
            Expr::Add(a, b) => infix(f, a, "+", b),
            Expr::Sub(a, b) => infix(f, a, "-", b),
            Expr::Mul(a, b) => infix(f, a, "*", b),
            Expr::Div(a, b) => infix(f, a, "/", b),
            Expr::Min(a, b) => call(f, "min", a, b),
            Expr::Max(a, b) => call(f, "max", a, b),
        }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

/// Parses `text` against the declared state names.
pub fn parse_expr(text: &str, states: &[String]) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, states };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    states: &'a [String],
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if c == b'*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let word = self.ident();
                match word.as_str() {
                    "mu" => {
                        self.expect(b'(')?;
                        self.skip_ws();
                        let name = self.ident();
                        if name.is_empty() {
                            return Err(self.err("expected state name"));
                        }
                        let idx = self
                            .states
                            .iter()
                            .position(|s| *s == name)
                            .ok_or_else(|| Error::UnknownState(name.clone()))?;
                        self.expect(b')')?;
                        Ok(Expr::Mu(idx))
                    }
                    "min" | "max" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b',')?;
                        let b = self.expr()?;
                        self.expect(b')')?;
                        Ok(if word == "min" { Expr::min(a, b) } else { Expr::max(a, b) })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(&format!("unknown function or identifier `{word}`")))
                    }
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        if bytes.get(i) == Some(&b'-') {
            i += 1;
        }
        let digits_from = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_from {
            return Err(self.err("expected number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let exp_digits = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_digits {
                i = j;
            }
        }
        let text = std::str::from_utf8(&bytes[start..i]).expect("ascii slice");
        let value: f64 = text.parse().map_err(|_| self.err(&format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.err("number out of range"));
        }
        self.pos = i;
        Ok(Expr::Const(value))
    }
}

/// `max{0, min{alpha, x}}`.
pub fn u_clamp(alpha: f64, x: f64) -> f64 {
    0f64.max(alpha.min(x))
}

/// Piecewise-linear switch: 0 below `1/2 - eps`, 1 above `1/2 + eps`,
/// slope `1/(2 eps)` in between.
pub fn omega(eps: f64, x: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("omega slope parameter {eps} outside (0, 1/2)")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("omega argument {x} outside [0, 1]")));
    }
    Ok(u_clamp(1.0, 0.5 + (x - 0.5) / (2.0 * eps)))
}

/// Brittle comparator `u_1(1/2 + (x - y) / delta)`.
pub fn p_brittle(delta: f64, x: f64, y: f64) -> f64 {
    u_clamp(1.0, 0.5 + (x - y) / delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_literal_and_sum() {
        let st = names(&["sL", "sR"]);
        assert_eq!(parse_expr("0.5", &st).unwrap(), Expr::Const(0.5));
        assert_eq!(parse_expr("mu(sL) + mu(sR)", &st).unwrap(), Expr::mu(0) + Expr::mu(1));
    }

    #[test]
    fn precedence_and_associativity() {
        let st = names(&["a"]);
        let e = parse_expr("1 - 2 - 3 * 4 / 2", &st).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), -7.0);
        let e = parse_expr("2 * (1 + mu(a))", &st).unwrap();
        assert_eq!(e.eval(&[0.25]).unwrap(), 2.5);
    }

    #[test]
    fn omega_shaped_tree() {
        let st = names(&["sL", "sR"]);
        let e = parse_expr("max(0, min(1, 0.5 + (mu(sL) - 0.5) / 0.125))", &st).unwrap();
        assert_eq!(e, Expr::omega(1.0 / 16.0, Expr::mu(0)));
        assert_eq!(e.eval(&[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(e.eval(&[0.25, 0.75]).unwrap(), 0.0);
    }

    #[test]
    fn eval_basics() {
        assert_eq!(Expr::c(1.0).eval(&[0.3, 0.7]).unwrap(), 1.0);
        assert_eq!(Expr::mu(0).eval(&[0.25, 0.75]).unwrap(), 0.25);
    }

    #[test]
    fn division_by_zero_is_error() {
        let st = names(&["a", "b"]);
        let e = parse_expr("mu(a) / mu(b)", &st).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0]), Err(Error::DivideByZero));
        assert_eq!(e.eval(&[0.5, 0.5]).unwrap(), 1.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let st = names(&["a"]);
        match parse_expr("1 + * 2", &st) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expr("exp(1)", &st), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("mu(b)", &st), Err(Error::UnknownState(n)) if n == "b"));
        assert!(matches!(parse_expr("(1 + 2", &st), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("1 2", &st), Err(Error::Syntax { .. })));
    }

    #[test]
    fn negative_literals_round_trip() {
        let st = names(&["a"]);
        let e = Expr::mu(0) - Expr::c(-0.5);
        let printed = e.display(&st).to_string();
        assert_eq!(parse_expr(&printed, &st).unwrap(), e);
        assert_eq!(parse_expr("1e-3 * 2", &st).unwrap().eval(&[0.0]).unwrap(), 0.002);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(u_clamp(1.0, 0.3), 0.3);
        assert_eq!(u_clamp(1.0, -2.0), 0.0);
        assert_eq!(u_clamp(0.25, 0.9), 0.25);
    }

    #[test]
    fn omega_examples() {
        let eps = 1.0 / 16.0;
        assert_eq!(omega(eps, 0.5).unwrap(), 0.5);
        assert_eq!(omega(eps, 0.75).unwrap(), 1.0);
        assert_eq!(omega(eps, 0.5 + 1.0 / 32.0).unwrap(), 0.75);
        assert_eq!(omega(eps, 0.25).unwrap(), 0.0);
        assert!(omega(0.5, 0.5).is_err());
        assert!(omega(eps, 1.5).is_err());
    }

    #[test]
    fn brittle_examples() {
        assert_eq!(p_brittle(0.1, 0.5, 0.5), 0.5);
        assert_eq!(p_brittle(0.1, 0.7, 0.5), 1.0);
        assert_eq!(p_brittle(0.1, 0.5, 0.7), 0.0);
    }
}

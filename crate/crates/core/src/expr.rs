//! A small arithmetic expression language in the variables `x` and `y`.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! expr   := or
//! or     := and ( "||" and )*
//! and    := cmp ( "&&" cmp )*
//! cmp    := sum ( ("<" | "<=" | ">" | ">=" | "==" | "!=") sum )?
//! sum    := prod ( ("+" | "-") prod )*
//! prod   := unary ( ("*" | "/") unary )*
//! unary  := "-" unary | power
//! power  := atom ( "^" unary )?
//! atom   := number | "x" | "y" | "pi" | call | "(" expr ")"
//! call   := name "(" expr ( "," expr )* ")"
//! ```
//!
//! Functions: `abs`, `exp`, `sin`, `cos`, `sqrt` (one argument), `min` and
//! `max` (one or more), and `if(cond, then, else)` for piecewise-by-region
//! definitions. Comparisons and logical operators yield `1` or `0`; `if`
//! treats any non-zero condition as true.

use std::fmt;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 200;
const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Abs,
    Exp,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            depth: 0,
            nodes: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Unary(f, e) => {
                let v = e.eval(x, y);
                match f {
                    UnaryFn::Abs => v.abs(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Sqrt => v.sqrt(),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x, y);
                let b = r.eval(x, y);
                let truth = |c: bool| if c { 1.0 } else { 0.0 };
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                    BinOp::Lt => truth(a < b),
                    BinOp::Le => truth(a <= b),
                    BinOp::Gt => truth(a > b),
                    BinOp::Ge => truth(a >= b),
                    BinOp::Eq => truth(a == b),
                    BinOp::Ne => truth(a != b),
                    BinOp::And => truth(a != 0.0 && b != 0.0),
                    BinOp::Or => truth(a != 0.0 || b != 0.0),
                }
            }
            // NaN in any argument poisons the result
            Expr::Min(args) => args
                .iter()
                .map(|e| e.eval(x, y))
                .fold(f64::INFINITY, |m, v| if v < m || v.is_nan() { v } else { m }),
            Expr::Max(args) => args
                .iter()
                .map(|e| e.eval(x, y))
                .fold(f64::NEG_INFINITY, |m, v| if v > m || v.is_nan() { v } else { m }),
            Expr::If(c, t, f) => {
                let c = c.eval(x, y);
                if c.is_nan() {
                    f64::NAN
                } else if c != 0.0 {
                    t.eval(x, y)
                } else {
                    f.eval(x, y)
                }
            }
        }
    }
}

/// `a^b` with exact squaring for the common integer exponents.
fn pow(a: f64, b: f64) -> f64 {
    if b == 2.0 {
        a * a
    } else if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
    nodes: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
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

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        Ok(())
    }

    /// Counts every node so evaluation depth stays bounded.
    fn count(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            return Err(self.err("expression too large"));
        }
        Ok(())
    }

    fn node(&mut self, e: Expr) -> Result<Expr> {
        self.count()?;
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.and()?;
        while self.eat("||") {
            let rhs = self.and()?;
            lhs = self.node(Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)))?;
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.cmp()?;
        while self.eat("&&") {
            let rhs = self.cmp()?;
            lhs = self.node(Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)))?;
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr> {
        let lhs = self.sum()?;
        let op = if self.eat("<=") {
            BinOp::Le
        } else if self.eat(">=") {
            BinOp::Ge
        } else if self.eat("==") {
            BinOp::Eq
        } else if self.eat("!=") {
            BinOp::Ne
        } else if self.eat("<") {
            BinOp::Lt
        } else if self.eat(">") {
            BinOp::Gt
        } else {
            return Ok(lhs);
        };
        let rhs = self.sum()?;
        self.node(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.prod()?;
            lhs = self.node(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))?;
        }
    }

    fn prod(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = self.node(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))?;
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let e = if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            self.node(Expr::Neg(Box::new(inner)))?
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat("^") {
            let exp = self.unary()?;
            return self.node(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => self.node(Expr::Num(v)),
            _ => Err(Error::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            }),
        }
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x" => return self.node(Expr::X),
            "y" => return self.node(Expr::Y),
            "pi" => return self.node(Expr::Num(std::f64::consts::PI)),
            _ => {}
        }
        if !self.eat("(") {
            return Err(Error::Parse {
                pos: start,
                msg: format!("unknown variable `{name}`"),
            });
        }
        self.count()?;
        let mut args = vec![self.expr()?];
        while self.eat(",") {
            args.push(self.expr()?);
        }
        self.expect(")")?;
        let arity = |n: usize, args: &Vec<Expr>| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse {
                    pos: start,
                    msg: format!("`{name}` takes {n} argument(s), got {}", args.len()),
                })
            }
        };
        let unary = |f| -> Result<Expr> {
            arity(1, &args)?;
            Ok(Expr::Unary(f, Box::new(args[0].clone())))
        };
        match name {
            "abs" => unary(UnaryFn::Abs),
            "exp" => unary(UnaryFn::Exp),
            "sin" => unary(UnaryFn::Sin),
            "cos" => unary(UnaryFn::Cos),
            "sqrt" => unary(UnaryFn::Sqrt),
            "min" => Ok(Expr::Min(args)),
            "max" => Ok(Expr::Max(args)),
            "if" => {
                arity(3, &args)?;
                let mut it = args.into_iter();
                let mut next = || Box::new(it.next().expect("arity checked"));
                Ok(Expr::If(next(), next(), next()))
            }
            _ => Err(Error::Parse {
                pos: start,
                msg: format!("unknown function `{name}`"),
            }),
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Unary(u, e) => {
                let name = match u {
                    UnaryFn::Abs => "abs",
                    UnaryFn::Exp => "exp",
                    UnaryFn::Sin => "sin",
                    UnaryFn::Cos => "cos",
                    UnaryFn::Sqrt => "sqrt",
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::Eq => "==",
                    BinOp::Ne => "!=",
                    BinOp::And => "&&",
                    BinOp::Or => "||",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Min(args) | Expr::Max(args) => {
                f.write_str(if matches!(self, Expr::Min(_)) { "min(" } else { "max(" })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::If(c, t, e) => write!(f, "if({c}, {t}, {e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64, y: f64) -> f64 {
        Expr::parse(src).unwrap().eval(x, y)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("x - y - 1", 5.0, 2.0), 2.0);
        assert_eq!(ev("2*x^-1", 4.0, 0.0), 0.5);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("max(1, x, -2)", 3.0, 0.0), 3.0);
        assert_eq!(ev("min(y)", 0.0, -4.0), -4.0);
        assert_eq!(ev("abs(x - 0.5)", 0.0, 0.0), 0.5);
        assert_eq!(ev("exp(0) + cos(0) + sin(0)", 0.0, 0.0), 2.0);
        assert_eq!(ev("sqrt(x)", 9.0, 0.0), 3.0);
        assert!((ev("sin(pi/2)", 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ev("1.5e1 + 2E-1", 0.0, 0.0), 15.2);
    }

    #[test]
    fn piecewise() {
        let src = "if(y >= -0.5 && y <= 0.5, 1, if(y < -0.5, 2, 3))";
        assert_eq!(ev(src, 0.0, 0.5), 1.0);
        assert_eq!(ev(src, 0.0, -0.5), 1.0);
        assert_eq!(ev(src, 0.0, -0.7), 2.0);
        assert_eq!(ev(src, 0.0, 0.7), 3.0);
        assert_eq!(ev("x > 0 || y > 0", -1.0, 1.0), 1.0);
        assert_eq!(ev("x != 0", 0.0, 1.0), 0.0);
    }

    #[test]
    fn nan_propagates_through_min_max() {
        assert!(ev("max(1, sqrt(-1))", 0.0, 0.0).is_nan());
        assert!(ev("min(sqrt(-1), 1)", 0.0, 0.0).is_nan());
    }

    #[test]
    fn rejects_garbage() {
        for src in ["", "1 +", "foo", "z", "abs(1, 2)", "if(1, 2)", "(1", "1 2", "max()", "1..2", "$"] {
            assert!(Expr::parse(src).is_err(), "{src:?} should not parse");
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = "(".repeat(10_000) + "1" + &")".repeat(10_000);
        assert!(Expr::parse(&src).is_err());
        let src = "-".repeat(10_000) + "1";
        assert!(Expr::parse(&src).is_err());
        let src = vec!["x"; 100_000].join("+");
        assert!(Expr::parse(&src).is_err());
    }

    #[test]
    fn display_reparses() {
        for src in [
            "max(1-33*(x+0.5)^2-27*(y+0.1)^2, -2)",
            "if(abs(x) >= 1 || abs(y) >= 1, -x, 2 - (x + y)^2)",
            "-3 - -y / 1e-3",
        ] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src}");
        }
    }
}

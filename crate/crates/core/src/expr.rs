//! Closed-form scalar expressions used in run configurations.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables: `x1`..`x4`, `r` (Euclidean norm of `x`), `t`, and the
//! constant `pi`. Functions: `abs sqrt exp ln log sin cos max min pow`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Radius,
    Time,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Abs,
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Max,
    Min,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Self, Option<usize>)> {
        Some(match name {
            "abs" => (Self::Abs, Some(1)),
            "sqrt" => (Self::Sqrt, Some(1)),
            "exp" => (Self::Exp, Some(1)),
            "ln" | "log" => (Self::Ln, Some(1)),
            "sin" => (Self::Sin, Some(1)),
            "cos" => (Self::Cos, Some(1)),
            "max" => (Self::Max, None),
            "min" => (Self::Min, None),
            "pow" => (Self::Pow, Some(2)),
            _ => return None,
        })
    }
}

/// A parsed expression in `x1..xn`, `r`, `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
    max_coord: usize,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser { s: source.as_bytes(), pos: 0, max_coord: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { root, source: source.to_string(), max_coord: p.max_coord })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Highest coordinate index referenced (`x3` → 3), 0 if none.
    pub fn max_coordinate(&self) -> usize {
        self.max_coord
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        eval(&self.root, x, r, t)
    }
}

fn eval(node: &Node, x: &[f64], r: f64, t: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Coord(k) => x.get(*k).copied().unwrap_or(0.0),
        Node::Radius => r,
        Node::Time => t,
        Node::Neg(a) => -eval(a, x, r, t),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, r, t), eval(b, x, r, t));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let mut v = args.iter().map(|a| eval(a, x, r, t));
            match f {
                Func::Abs => v.next().unwrap().abs(),
                Func::Sqrt => v.next().unwrap().sqrt(),
                Func::Exp => v.next().unwrap().exp(),
                Func::Ln => v.next().unwrap().ln(),
                Func::Sin => v.next().unwrap().sin(),
                Func::Cos => v.next().unwrap().cos(),
                Func::Max => v.fold(f64::NEG_INFINITY, f64::max),
                Func::Min => v.fold(f64::INFINITY, f64::min),
                Func::Pow => {
                    let a = v.next().unwrap();
                    a.powf(v.next().unwrap())
                }
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    max_coord: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { line: 1, message: format!("{msg} at column {}", self.pos + 1) }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Node::Num).map_err(|_| self.error(&format!("bad number {text:?}")))
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default().to_string();
        if self.peek() == Some(b'(') {
            let Some((func, arity)) = Func::lookup(&name) else {
                return Err(self.error(&format!("unknown function {name:?}")));
            };
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            if arity.is_some_and(|a| a != args.len()) {
                return Err(self.error(&format!("{name} takes {} argument(s)", arity.unwrap_or(0))));
            }
            return Ok(Node::Call(func, args));
        }
        match name.as_str() {
            "t" => Ok(Node::Time),
            "r" => Ok(Node::Radius),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            _ => {
                let k = name
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|k| (1..=4).contains(k))
                    .ok_or_else(|| self.error(&format!("unknown variable {name:?}")))?;
                self.max_coord = self.max_coord.max(k);
                Ok(Node::Coord(k - 1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64], t: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, t)
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1 + 2 * 3", &[], 0.0), 7.0);
        assert_eq!(ev("-2^2", &[], 0.0), -4.0);
        assert_eq!(ev("2^3^2", &[], 0.0), 512.0);
        assert_eq!(ev("0.5*(x1^2 + x2^2) + t", &[1.0, 2.0], 0.25), 2.75);
        assert_eq!(ev("max(0, r - 0.5)", &[3.0, 4.0], 0.0), 4.5);
        assert_eq!(ev("abs(x2) + min(1, 2, -3)", &[0.0, -2.0], 0.0), -1.0);
        assert!((ev("pow(2, 0.5) - sqrt(2)", &[], 0.0)).abs() < 1e-15);
        assert_eq!(ev("1.5e-1 * 2E1", &[], 0.0), 3.0);
        assert_eq!(Expr::parse("x1 + x3").unwrap().max_coordinate(), 3);
    }

    #[test]
    fn rejects_malformed() {
        for s in ["1 +", "foo(1)", "x5", "(1", "pow(1)", "2 3", "y"] {
            assert!(Expr::parse(s).is_err(), "{s}");
        }
    }
}

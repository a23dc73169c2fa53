//! A small closed-form expression language over points of ℝⁿ.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')' | '|' expr '|'
//! ```
//!
//! Identifiers: `x` (alias of `x1`), `x1`, `x2`, `x3`, `r` (Euclidean norm), `pi`, `e`.
//! `|x|` is the Euclidean norm of the point; `|e|` for any other `e` is the absolute value.
//!
//! Functions: `log`, `exp`, `sin`, `cos`, `abs`, `sqrt`, `chi(a,b)` (indicator of the
//! annulus `a <= |x| < b`), `indicator(a,b)` (indicator of the closed cube `[a,b]^n`)
//! and `step(t)` (1 for `t >= 0`, else 0).

use std::fmt;

use crate::error::{Result, VexError};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Radius,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Log,
    Exp,
    Sin,
    Cos,
    Abs,
    Sqrt,
    Chi,
    Indicator,
    Step,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "log" | "ln" => (Func::Log, 1),
            "exp" => (Func::Exp, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "chi" => (Func::Chi, 2),
            "indicator" => (Func::Indicator, 2),
            "step" => (Func::Step, 1),
            _ => return None,
        })
    }
}

/// A parsed expression together with its source text.
#[derive(Clone)]
pub struct Expr {
    source: String,
    root: Node,
    max_coord: usize,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(VexError::Spec(format!(
                "unexpected trailing input in expression {source:?}"
            )));
        }
        let max_coord = max_coord(&root);
        Ok(Self { source: source.trim().to_string(), root, max_coord })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Smallest dimension in which every referenced coordinate exists.
    pub fn min_dimension(&self) -> usize {
        self.max_coord.max(1)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval(&self.root, x)
    }
}

fn max_coord(node: &Node) -> usize {
    match node {
        Node::Coord(i) => i + 1,
        Node::Num(_) | Node::Radius => 0,
        Node::Neg(a) => max_coord(a),
        Node::Bin(_, a, b) => max_coord(a).max(max_coord(b)),
        Node::Call(_, args) => args.iter().map(max_coord).max().unwrap_or(0),
    }
}

fn norm(x: &[f64]) -> f64 {
    match x {
        [a] => a.abs(),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

fn eval(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Coord(i) => x.get(*i).copied().unwrap_or(f64::NAN),
        Node::Radius => norm(x),
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], x);
            match f {
                Func::Log => a.ln(),
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Abs => a.abs(),
                Func::Sqrt => a.sqrt(),
                Func::Step => {
                    if a >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Chi => {
                    let b = eval(&args[1], x);
                    let r = norm(x);
                    if r >= a && r < b {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Indicator => {
                    let b = eval(&args[1], x);
                    if x.iter().all(|&c| c >= a && c <= b) {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
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
            // scientific notation: 1e-3, 2.5E+4
            if i < chars.len()
                && (chars[i] == 'e' || chars[i] == 'E')
                && i + 1 < chars.len()
                && (chars[i + 1].is_ascii_digit()
                    || ((chars[i + 1] == '-' || chars[i + 1] == '+')
                        && i + 2 < chars.len()
                        && chars[i + 2].is_ascii_digit()))
            {
                i += 2;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| VexError::Spec(format!("bad number {text:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),|".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(VexError::Spec(format!("unexpected character {c:?} in expression")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(VexError::Spec(format!("expected {op:?} at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_op('+') {
                BinOp::Add
            } else if self.eat_op('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_op('*') {
                BinOp::Mul
            } else if self.eat_op('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| VexError::Spec("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Tok::Op('|') => {
                let inner = self.expr()?;
                self.expect_op('|')?;
                if inner == Node::Coord(0) && self.tokens[self.pos - 2] == Tok::Ident("x".into()) {
                    Ok(Node::Radius)
                } else {
                    Ok(Node::Call(Func::Abs, vec![inner]))
                }
            }
            Tok::Ident(name) => {
                if self.eat_op('(') {
                    let (func, arity) = Func::lookup(&name)
                        .ok_or_else(|| VexError::Spec(format!("unknown function {name:?}")))?;
                    let mut args = vec![self.expr()?];
                    while self.eat_op(',') {
                        args.push(self.expr()?);
                    }
                    self.expect_op(')')?;
                    if args.len() != arity {
                        return Err(VexError::Spec(format!(
                            "{name} takes {arity} argument(s), got {}",
                            args.len()
                        )));
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "x" | "x1" => Ok(Node::Coord(0)),
                    "x2" => Ok(Node::Coord(1)),
                    "x3" => Ok(Node::Coord(2)),
                    "r" => Ok(Node::Radius),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(VexError::Spec(format!("unknown identifier {name:?}"))),
                }
            }
            Tok::Op(c) => Err(VexError::Spec(format!("unexpected {c:?}"))),
        }
    }
}

//! Scalar expressions over `t`, `x1` and `x2` for coefficient functions.
//!
//! ```text
//! or      := and (("or" | "||") and)*
//! and     := cmp (("and" | "&&") cmp)*
//! cmp     := sum (("<" | "<=" | ">" | ">=" | "==") sum)*
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | "t" | "x1" | "x2" | "pi" | name "(" or ("," or)* ")" | "(" or ")"
//! ```
//!
//! Comparisons and logical operators yield 1.0 or 0.0 and both operands are
//! always evaluated.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fields::{ContinuousFunction, FieldError};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at t = {}, x1 = {}, x2 = {}", .point.0, .point.1, .point.2)]
pub struct EvalError {
    pub message: String,
    pub point: (f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X1,
    X2,
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
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
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
            let v = text.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                message: format!("invalid number '{text}'"),
            })?;
            out.push((Tok::Num(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let op = match two {
            "<=" | ">=" | "==" | "&&" | "||" => Some(match two {
                "<=" => "<=",
                ">=" => ">=",
                "==" => "==",
                "&&" => "and",
                _ => "or",
            }),
            _ => None,
        };
        if let Some(op) = op {
            out.push((Tok::Op(op), start));
            i += 2;
            continue;
        }
        let tok = match c {
            b'+' => Tok::Op("+"),
            b'-' => Tok::Op("-"),
            b'*' => Tok::Op("*"),
            b'/' => Tok::Op("/"),
            b'^' => Tok::Op("^"),
            b'<' => Tok::Op("<"),
            b'>' => Tok::Op(">"),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError { offset: start, message: format!("unexpected character '{ch}'") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        let found = match self.peek() {
            Tok::Op(op) => ops.iter().copied().find(|o| o == op),
            Tok::Ident(name) if name == "and" || name == "or" => ops.iter().copied().find(|o| *o == name),
            _ => None,
        };
        if found.is_some() {
            self.pos += 1;
        }
        found
    }

    fn binary(
        &mut self,
        ops: &[&'static str],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        while let Some(op) = self.eat_op(ops) {
            let rhs = next(self)?;
            let op = match op {
                "or" => BinOp::Or,
                "and" => BinOp::And,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "==" => BinOp::Eq,
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                _ => BinOp::Div,
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        self.binary(&["or"], Self::and)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        self.binary(&["and"], Self::cmp)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        self.binary(&["<=", ">=", "==", "<", ">"], Self::sum)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        self.binary(&["+", "-"], Self::product)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        self.binary(&["*", "/"], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&["-"]).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&["^"]).is_some() {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "t" => return Ok(Expr::Var(Var::T)),
                    "x1" => return Ok(Expr::Var(Var::X1)),
                    "x2" => return Ok(Expr::Var(Var::X2)),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    _ => {}
                }
                let Some(func) = Func::ALL.iter().copied().find(|f| f.name() == name) else {
                    return Err(ParseError { offset, message: format!("unknown identifier '{name}'") });
                };
                if *self.peek() != Tok::LParen {
                    return self.error(format!("expected '(' after function '{name}'"));
                }
                self.pos += 1;
                let mut args = vec![self.or()?];
                while *self.peek() == Tok::Comma {
                    self.pos += 1;
                    args.push(self.or()?);
                }
                self.expect(Tok::RParen, "')'")?;
                if args.len() != func.arity() {
                    return Err(ParseError {
                        offset,
                        message: format!("function '{name}' takes {} argument(s), got {}", func.arity(), args.len()),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            Tok::End => self.error("unexpected end of expression"),
            Tok::RParen => self.error("unexpected ')'"),
            Tok::Comma => self.error("unexpected ','"),
            Tok::Op(op) => self.error(format!("unexpected operator '{op}'")),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let e = p.or()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Expr {
    /// Evaluates at one point.
    pub fn eval(&self, t: f64, x1: f64, x2: f64) -> Result<f64, EvalError> {
        let fail = |message: String| EvalError { message, point: (t, x1, x2) };
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X1) => x1,
            Expr::Var(Var::X2) => x2,
            Expr::Neg(e) => -e.eval(t, x1, x2)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(t, x1, x2)?;
                let b = b.eval(t, x1, x2)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                    BinOp::Lt => indicator(a < b),
                    BinOp::Le => indicator(a <= b),
                    BinOp::Gt => indicator(a > b),
                    BinOp::Ge => indicator(a >= b),
                    BinOp::Eq => indicator(a == b),
                    BinOp::And => indicator(a != 0.0 && b != 0.0),
                    BinOp::Or => indicator(a != 0.0 || b != 0.0),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(t, x1, x2)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(fail(format!("ln of non-positive value {a}")));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(fail(format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                    Func::Min => a.min(args[1].eval(t, x1, x2)?),
                    Func::Max => a.max(args[1].eval(t, x1, x2)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    /// Evaluates at every point.
    pub fn evaluate(&self, t: f64, points: &[[f64; 2]]) -> Result<Vec<f64>, EvalError> {
        points.iter().map(|x| self.eval(t, x[0], x[1])).collect()
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::X1) => f.write_str("x1"),
            Expr::Var(Var::X2) => f.write_str("x2"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
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
                    BinOp::And => "and",
                    BinOp::Or => "or",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl ContinuousFunction for Expr {
    fn evaluate(&self, t: f64, points: &[[f64; 2]], out: &mut [f64]) -> Result<(), FieldError> {
        for (o, x) in out.iter_mut().zip(points) {
            *o = self.eval(t, x[0], x[1]).map_err(|e| FieldError::Evaluation {
                message: e.message,
                point: e.point,
            })?;
        }
        Ok(())
    }
}

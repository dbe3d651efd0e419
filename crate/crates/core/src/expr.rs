//! Arithmetic formulas over a single variable `t`.
//!
//! Workload increments and imbalance increments are written as small
//! formulas (`0.1`, `1/(0.4*t+1)`, `-(0.1*(t%17))+0.8`, `sin(pi*t/180)`).
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/' | '%') factor)*
//! factor := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
//! func   := 'sin' | 'floor'
//! ```
//!
//! `%` is the floating remainder and carries the sign of the dividend.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Rem => '%',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Floor,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Floor => "floor",
        }
    }
}

/// Abstract syntax of a formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, t: f64) -> std::result::Result<f64, ()> {
        Ok(match self {
            Node::Num(v) => *v,
            Node::Var => t,
            Node::Pi => std::f64::consts::PI,
            Node::Neg(inner) => -inner.eval(t)?,
            Node::Call(Func::Sin, arg) => arg.eval(t)?.sin(),
            Node::Call(Func::Floor, arg) => arg.eval(t)?.floor(),
            Node::Binary(op, lhs, rhs) => {
                let a = lhs.eval(t)?;
                let b = rhs.eval(t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div | BinOp::Rem if b == 0.0 => return Err(()),
                    BinOp::Div => a / b,
                    BinOp::Rem => a % b,
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, ..) => op.precedence(),
            _ => 3,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var => f.write_str("t"),
            Node::Pi => f.write_str("pi"),
            Node::Neg(inner) => {
                f.write_str("-")?;
                inner.write_operand(f, inner.precedence() < 3)
            }
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Node::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                lhs.write_operand(f, lhs.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                rhs.write_operand(f, rhs.precedence() <= p)
            }
        }
    }
}

/// A parsed formula together with the text it was parsed from.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self> {
        let root = Parser::new(text).parse()?;
        Ok(Self {
            source: text.to_string(),
            root,
        })
    }

    /// A constant formula.
    pub fn constant(value: f64) -> Self {
        Self {
            source: format!("{value}"),
            root: Node::Num(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates the formula. Fails on division or modulo by zero and on
    /// non-finite results.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self.root.eval(t) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(Error::NonFinite {
                expr: self.source.clone(),
                t,
            }),
            Err(()) => Err(Error::DivisionByZero {
                expr: self.source.clone(),
                t,
            }),
        }
    }

    /// True when the formula does not mention `t`.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Var => false,
                Node::Num(_) | Node::Pi => true,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Binary(_, a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

/// Canonical rendering with minimal parentheses; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Expr::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    peeked: Option<(usize, Token)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            pos: 0,
            peeked: None,
        }
    }

    fn parse(mut self) -> Result<Node> {
        if self.text.trim().is_empty() {
            return Err(self.syntax(0, "empty expression"));
        }
        let node = self.expr()?;
        match self.next()? {
            None => Ok(node),
            Some((at, tok)) => Err(self.syntax(at, format!("unexpected {}", describe(&tok)))),
        }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn lex(&mut self) -> Result<Option<(usize, Token)>> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok(None);
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut exp = end + 1;
                    if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                        exp += 1;
                    }
                    if exp < bytes.len() && bytes[exp].is_ascii_digit() {
                        while exp < bytes.len() && bytes[exp].is_ascii_digit() {
                            exp += 1;
                        }
                        end = exp;
                    }
                }
                let lit = &self.text[start..end];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| self.syntax(start, format!("malformed number `{lit}`")))?;
                if !value.is_finite() {
                    return Err(self.syntax(start, format!("number `{lit}` out of range")));
                }
                self.pos = end;
                Token::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                self.pos = end;
                Token::Ident(self.text[start..end].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'%' => {
                self.pos += 1;
                Token::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            _ => {
                let ch = self.text[start..].chars().next().unwrap_or('?');
                return Err(self.syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        Ok(Some((start, tok)))
    }

    fn peek(&mut self) -> Result<Option<&(usize, Token)>> {
        if self.peeked.is_none() {
            self.peeked = self.lex()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn next(&mut self) -> Result<Option<(usize, Token)>> {
        match self.peeked.take() {
            Some(tok) => Ok(Some(tok)),
            None => self.lex(),
        }
    }

    fn peek_op(&mut self, ops: &[char]) -> Result<Option<char>> {
        Ok(match self.peek()? {
            Some((_, Token::Op(c))) if ops.contains(c) => Some(*c),
            _ => None,
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek_op(&['+', '-'])? {
            self.next()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.peek_op(&['*', '/', '%'])? {
            self.next()?;
            let op = match c {
                '*' => BinOp::Mul,
                '/' => BinOp::Div,
                _ => BinOp::Rem,
            };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        let end = self.text.len();
        let Some((at, tok)) = self.next()? else {
            return Err(self.syntax(end, "unexpected end of expression"));
        };
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('-') => Ok(Node::Neg(Box::new(self.factor()?))),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(at)?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Node::Var),
                "pi" => Ok(Node::Pi),
                "sin" | "floor" => {
                    let func = if name == "sin" { Func::Sin } else { Func::Floor };
                    match self.next()? {
                        Some((open, Token::LParen)) => {
                            let arg = self.expr()?;
                            self.expect_rparen(open)?;
                            Ok(Node::Call(func, Box::new(arg)))
                        }
                        Some((pos, _)) => Err(self.syntax(pos, format!("expected `(` after `{name}`"))),
                        None => Err(self.syntax(end, format!("expected `(` after `{name}`"))),
                    }
                }
                _ => Err(Error::UnknownIdentifier { offset: at, name }),
            },
            other => Err(self.syntax(at, format!("unexpected {}", describe(&other)))),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        match self.next()? {
            Some((_, Token::RParen)) => Ok(()),
            Some((pos, tok)) => Err(self.syntax(pos, format!("expected `)`, found {}", describe(&tok)))),
            None => Err(self.syntax(open, "unclosed `(`")),
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num(v) => format!("number `{v}`"),
        Token::Ident(s) => format!("identifier `{s}`"),
        Token::Op(c) => format!("operator `{c}`"),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
    }
}

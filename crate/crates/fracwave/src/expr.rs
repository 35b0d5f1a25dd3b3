//! Arithmetic expressions for coefficients and data profiles in run
//! configurations: +, -, *, /, ^, sin, cos, exp, numeric literals, `pi`,
//! and one free variable.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at byte {1}")]
    BadChar(char, usize),
    #[error("unexpected token '{0}' at byte {1}")]
    BadToken(String, usize),
    #[error("unknown identifier '{0}' (variable is '{1}'; functions: sin cos exp; constants: pi)")]
    UnknownIdent(String, String),
    #[error("input ended unexpectedly")]
    UnexpectedEnd,
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
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Var,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

/// A parsed expression in one variable.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    pub text: String,
}

impl Expr {
    pub fn parse(text: &str, var: &str) -> Result<Self, ExprError> {
        let toks = lex(text)?;
        let mut p = Parser {
            toks: &toks,
            pos: 0,
            var,
        };
        let root = p.expression()?;
        if p.pos != p.toks.len() {
            return Err(ExprError::BadToken(format!("{:?}", p.toks[p.pos].0), p.toks[p.pos].1));
        }
        Ok(Self {
            root,
            text: text.to_string(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval(&self.root, x)
    }
}

fn eval(n: &Node, x: f64) -> f64 {
    match n {
        Node::Const(c) => *c,
        Node::Var => x,
        Node::Add(a, b) => eval(a, x) + eval(b, x),
        Node::Sub(a, b) => eval(a, x) - eval(b, x),
        Node::Mul(a, b) => eval(a, x) * eval(b, x),
        Node::Div(a, b) => eval(a, x) / eval(b, x),
        Node::Pow(a, b) => eval(a, x).powf(eval(b, x)),
        Node::Neg(a) => -eval(a, x),
        Node::Sin(a) => eval(a, x).sin(),
        Node::Cos(a) => eval(a, x).cos(),
        Node::Exp(a) => eval(a, x).exp(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && i > start
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| ExprError::BadToken(s.to_string(), start))?;
                out.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => return Err(ExprError::BadChar(other, i)),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<&Tok, ExprError> {
        let t = self.toks.get(self.pos).ok_or(ExprError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(&t.0)
    }

    fn expression(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            // right-associative, and unary minus binds below the exponent
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let start = self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(0);
        match self.next()? {
            Tok::Num(v) => Ok(Node::Const(*v)),
            Tok::LParen => {
                let inner = self.expression()?;
                match self.next()? {
                    Tok::RParen => Ok(inner),
                    other => Err(ExprError::BadToken(format!("{other:?}"), start)),
                }
            }
            Tok::Ident(name) => {
                let name = name.clone();
                if name == self.var {
                    return Ok(Node::Var);
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        match self.next()? {
                            Tok::LParen => {}
                            other => {
                                return Err(ExprError::BadToken(format!("{other:?}"), start))
                            }
                        }
                        let arg = self.expression()?;
                        match self.next()? {
                            Tok::RParen => {}
                            other => {
                                return Err(ExprError::BadToken(format!("{other:?}"), start))
                            }
                        }
                        Ok(match name.as_str() {
                            "sin" => Node::Sin(Box::new(arg)),
                            "cos" => Node::Cos(Box::new(arg)),
                            _ => Node::Exp(Box::new(arg)),
                        })
                    }
                    _ => Err(ExprError::UnknownIdent(name, self.var.to_string())),
                }
            }
            other => Err(ExprError::BadToken(format!("{other:?}"), start)),
        }
    }
}

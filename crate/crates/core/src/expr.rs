//! Small arithmetic expression language for coefficient functions.
//!
//! Grammar: numbers, the variables `x`, `t`, `lambda`, the constants `pi`
//! and `e`, the operators `+ - * / ^` (power binds tightest and is
//! right-associative) and the functions `sin cos exp ln sqrt abs gamma`.

use crate::error::{Error, Result};
use crate::special::gamma_fn;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    T,
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Gamma,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "gamma" => Func::Gamma,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Gamma => gamma_fn(v).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in (x, t) with λ bound at evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(Error::Expression(format!("unexpected `{tok:?}` in `{src}`")));
        }
        Ok(Self {
            root: fold(root),
            source: src.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, t: f64, lambda: f64) -> f64 {
        eval(&self.root, x, t, lambda)
    }

    pub fn uses(&self, var: Var) -> bool {
        uses(&self.root, var)
    }
}

fn eval(n: &Node, x: f64, t: f64, lambda: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(Var::X) => x,
        Node::Var(Var::T) => t,
        Node::Var(Var::Lambda) => lambda,
        Node::Neg(a) => -eval(a, x, t, lambda),
        Node::Call(f, a) => f.apply(eval(a, x, t, lambda)),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, t, lambda), eval(b, x, t, lambda));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => pow(a, b),
            }
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

fn uses(n: &Node, var: Var) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(v) => *v == var,
        Node::Neg(a) | Node::Call(_, a) => uses(a, var),
        Node::Bin(_, a, b) => uses(a, var) || uses(b, var),
    }
}

/// Fold constant subtrees (no variables) into numbers.
fn fold(n: Node) -> Node {
    let n = match n {
        Node::Neg(a) => Node::Neg(Box::new(fold(*a))),
        Node::Call(f, a) => Node::Call(f, Box::new(fold(*a))),
        Node::Bin(op, a, b) => Node::Bin(op, Box::new(fold(*a)), Box::new(fold(*b))),
        other => other,
    };
    if !matches!(n, Node::Num(_)) && !uses(&n, Var::X) && !uses(&n, Var::T) && !uses(&n, Var::Lambda) {
        Node::Num(eval(&n, 0.0, 0.0, 0.0))
    } else {
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                // accept ** as power
                if c == '*' && chars.get(i + 1) == Some(&'*') {
                    out.push(Tok::Op('^'));
                    i += 2;
                } else {
                    out.push(Tok::Op(c));
                    i += 1;
                }
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse()
                    .map_err(|_| Error::Expression(format!("bad number `{text}` in `{src}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::Expression(format!("unexpected character `{other}` in `{src}`")))
            }
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

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(Error::Expression("missing `)`".into())),
                }
            }
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.next() != Some(Tok::LParen) {
                        return Err(Error::Expression(format!("`{name}` must be called as `{name}(...)`")));
                    }
                    let arg = self.expr()?;
                    if self.next() != Some(Tok::RParen) {
                        return Err(Error::Expression(format!("missing `)` after `{name}(`")));
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Node::Var(Var::X)),
                    "t" => Ok(Node::Var(Var::T)),
                    "lambda" => Ok(Node::Var(Var::Lambda)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(Error::Expression(format!("unknown name `{name}`"))),
                }
            }
            Some(tok) => Err(Error::Expression(format!("unexpected `{tok:?}`"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}

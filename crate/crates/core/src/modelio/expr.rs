//! A tiny smooth expression language.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | name | func "(" sum ")" | "(" sum ")"
//! func    := sin | cos | exp | ln | sqrt
//! ```
//!
//! So `^` is right-associative and binds tighter than unary minus
//! (`-q^2 = -(q^2)`), and `×`, `÷` are accepted as synonyms of `*`, `/`.
//! `pi` is a constant unless declared as a variable.

use std::fmt;

use thiserror::Error;

use crate::jets::Scalar;

/// Half-open range of character offsets into the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed expression. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A domain violation during evaluation, located in the source.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{line}:{column}: {message} in `{snippet}`")]
pub struct DomainError {
    pub line: usize,
    pub column: usize,
    pub snippet: String,
    pub message: String,
}

/// 1-based line and column of a character offset.
fn locate(source: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut column = 1;
    for c in source.chars().take(offset) {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    (line, column)
}

#[derive(Clone, Debug, PartialEq)]
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

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

struct Parser<'a> {
    source: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
    /// Offset of the last non-whitespace character, where end-of-input
    /// errors are reported.
    last: usize,
    vars: Option<&'a [&'a str]>,
}

fn lex(source: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |at: usize, message: String| {
        let (line, column) = locate(source, at);
        ParseError {
            line,
            column,
            message,
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' | '×' => Some(Tok::Star),
            '/' | '÷' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, Span { start, end: i + 1 }));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
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
            let value: f64 = text
                .parse()
                .map_err(|_| err(start, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(err(start, format!("number `{text}` is out of range")));
            }
            out.push((Tok::Num(value), Span { start, end: i }));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((
                Tok::Ident(chars[start..i].iter().collect()),
                Span { start, end: i },
            ));
        } else {
            return Err(err(start, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

impl<'a> Parser<'a> {
    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = locate(self.source, offset);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eof_error(&self, message: &str) -> ParseError {
        self.error_at(self.last, message)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Plus) => Some(BinOp::Add),
            Some(Tok::Minus) => Some(BinOp::Sub),
            _ => None,
        } {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Star) => Some(BinOp::Mul),
            Some(Tok::Slash) => Some(BinOp::Div),
            _ => None,
        } {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            let (_, span) = self.next().expect("peeked");
            let inner = self.unary()?;
            let span = Span {
                start: span.start,
                end: inner.span.end,
            };
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn expect_close(&mut self, open: Span) -> Result<Span, ParseError> {
        match self.next() {
            Some((Tok::RParen, span)) => Ok(span),
            Some((tok, span)) => Err(self.error_at(
                span.start,
                format!(
                    "expected `)` to close `(` at column {}, found {tok}",
                    locate(self.source, open.start).1
                ),
            )),
            None => Err(self.eof_error("unbalanced parenthesis: missing `)`")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some((Tok::Num(v), span)) => Ok(Expr {
                kind: ExprKind::Num(v),
                span,
            }),
            Some((Tok::LParen, open)) => {
                let inner = self.sum()?;
                let close = self.expect_close(open)?;
                Ok(Expr {
                    kind: inner.kind,
                    span: Span {
                        start: open.start,
                        end: close.end,
                    },
                })
            }
            Some((Tok::Ident(name), span)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let func = Func::from_name(&name).ok_or_else(|| {
                        self.error_at(span.start, format!("unknown function `{name}`"))
                    })?;
                    let (_, open) = self.next().expect("peeked");
                    let arg = self.sum()?;
                    let close = self.expect_close(open)?;
                    return Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        span: Span {
                            start: span.start,
                            end: close.end,
                        },
                    });
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.error_at(
                        span.start,
                        format!("function `{name}` needs an argument in parentheses"),
                    ));
                }
                match self.vars {
                    Some(vars) if !vars.contains(&name.as_str()) && name != "pi" => {
                        Err(self.error_at(span.start, format!("unknown identifier `{name}`")))
                    }
                    _ => Ok(Expr {
                        kind: ExprKind::Var(name),
                        span,
                    }),
                }
            }
            Some((Tok::RParen, span)) => {
                Err(self.error_at(span.start, "unbalanced parenthesis: unexpected `)`"))
            }
            Some((tok, span)) => {
                Err(self.error_at(span.start, format!("expected a value, found {tok}")))
            }
            None => Err(self.eof_error("unexpected end of input")),
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = Span {
        start: lhs.span.start,
        end: rhs.span.end,
    };
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}

fn parse_impl(source: &str, vars: Option<&[&str]>) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let last = source
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .last()
        .map_or(0, |(i, _)| i);
    let mut parser = Parser {
        source,
        toks,
        pos: 0,
        last,
        vars,
    };
    let expr = parser.sum()?;
    if let Some((tok, span)) = parser.next() {
        let message = if tok == Tok::RParen {
            "unbalanced parenthesis: unexpected `)`".to_string()
        } else {
            format!("unexpected trailing {tok}")
        };
        return Err(parser.error_at(span.start, message));
    }
    Ok(expr)
}

/// Parses an expression; any identifier not followed by `(` is a variable.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    parse_impl(source, None)
}

/// Parses an expression whose variables must come from `vars`.
pub fn parse_with(source: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    parse_impl(source, Some(vars))
}

impl Expr {
    /// Sorted distinct variable names.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Var(name) => out.push(name.clone()),
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.collect_vars(out),
            ExprKind::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Binary(BinOp::Pow, ..) => 4,
            ExprKind::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            _ => 5,
        }
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints with the minimal parentheses that reproduce the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) if self.precedence() == 3 => write!(f, "-{}", -v),
            ExprKind::Num(v) => write!(f, "{v}"),
            ExprKind::Var(name) => f.write_str(name),
            ExprKind::Neg(a) => write!(f, "-{}", Wrapped(a, a.precedence() < 3)),
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
            ExprKind::Binary(op, a, b) => {
                let (symbol, level) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => (" * ", 2),
                    BinOp::Div => (" / ", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    write!(
                        f,
                        "{}^{}",
                        Wrapped(a, a.precedence() <= 4),
                        Wrapped(b, b.precedence() < 3)
                    )
                } else {
                    write!(
                        f,
                        "{}{symbol}{}",
                        Wrapped(a, a.precedence() < level),
                        Wrapped(b, b.precedence() <= level)
                    )
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>, Span),
    Call(Func, Box<Node>, Span),
}

/// An expression resolved against an ordered variable list, ready to
/// evaluate over any [`Scalar`].
#[derive(Clone, Debug)]
pub struct Compiled {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Compiled {
    /// Parses `source` against `vars` (argument order for evaluation).
    pub fn new(source: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let expr = parse_with(source, vars)?;
        Ok(Self {
            source: source.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root: lower(&expr, vars),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    fn domain_error(&self, span: Span, message: impl Into<String>) -> DomainError {
        let (line, column) = locate(&self.source, span.start);
        DomainError {
            line,
            column,
            snippet: self
                .source
                .chars()
                .skip(span.start)
                .take(span.end - span.start)
                .collect(),
            message: message.into(),
        }
    }

    /// Evaluates with domain checks on the value slot: division by zero,
    /// `ln` and `sqrt` outside their domains, non-integer powers of
    /// negative numbers, and overflow.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, DomainError> {
        assert_eq!(
            x.len(),
            self.vars.len(),
            "argument count of `{}`",
            self.source
        );
        self.eval_node(&self.root, x)
    }

    /// Evaluation without checks; violations propagate as NaN or infinity.
    pub fn eval_unchecked<S: Scalar>(&self, x: &[S]) -> S {
        self.eval(x).unwrap_or_else(|_| S::constant(f64::NAN))
    }

    fn eval_node<S: Scalar>(&self, node: &Node, x: &[S]) -> Result<S, DomainError> {
        Ok(match node {
            Node::Num(v) => S::constant(*v),
            Node::Var(i) => x[*i],
            Node::Neg(a) => -self.eval_node(a, x)?,
            Node::Call(func, a, span) => {
                let a = self.eval_node(a, x)?;
                let v = a.value();
                let out = match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln if v > 0.0 => a.ln(),
                    Func::Ln => return Err(self.domain_error(*span, format!("logarithm of {v}"))),
                    Func::Sqrt if v > 0.0 => a.sqrt(),
                    Func::Sqrt => {
                        return Err(self.domain_error(*span, format!("square root of {v}")))
                    }
                };
                if !out.value().is_finite() {
                    return Err(self.domain_error(*span, "overflow"));
                }
                out
            }
            Node::Binary(op, a, b, span) => {
                let lhs = self.eval_node(a, x)?;
                let out = match op {
                    BinOp::Add => lhs + self.eval_node(b, x)?,
                    BinOp::Sub => lhs - self.eval_node(b, x)?,
                    BinOp::Mul => lhs * self.eval_node(b, x)?,
                    BinOp::Div => {
                        let rhs = self.eval_node(b, x)?;
                        if rhs.value() == 0.0 {
                            return Err(self.domain_error(*span, "division by zero"));
                        }
                        lhs / rhs
                    }
                    BinOp::Pow => self.power(lhs, b, x, *span)?,
                };
                if !out.value().is_finite() {
                    return Err(self.domain_error(*span, "overflow"));
                }
                out
            }
        })
    }

    fn power<S: Scalar>(
        &self,
        base: S,
        exponent: &Node,
        x: &[S],
        span: Span,
    ) -> Result<S, DomainError> {
        let constant = match exponent {
            Node::Num(v) => Some(*v),
            Node::Neg(inner) => match inner.as_ref() {
                Node::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        };
        let b = base.value();
        match constant {
            Some(r) if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 => {
                if r < 0.0 && b == 0.0 {
                    return Err(self.domain_error(span, "negative power of zero"));
                }
                Ok(base.powi(r as i32))
            }
            Some(r) => {
                if b < 0.0 || (b == 0.0 && r < 1.0) {
                    return Err(self.domain_error(span, format!("power {r} of {b}")));
                }
                Ok(base.powf(r))
            }
            None => {
                if b <= 0.0 {
                    return Err(self.domain_error(span, format!("variable power of {b}")));
                }
                Ok(base.pow(self.eval_node(exponent, x)?))
            }
        }
    }
}

fn lower(expr: &Expr, vars: &[&str]) -> Node {
    match &expr.kind {
        ExprKind::Num(v) => Node::Num(*v),
        ExprKind::Var(name) => match vars.iter().position(|v| v == name) {
            Some(i) => Node::Var(i),
            None => Node::Num(std::f64::consts::PI),
        },
        ExprKind::Neg(a) => Node::Neg(Box::new(lower(a, vars))),
        ExprKind::Call(func, a) => Node::Call(*func, Box::new(lower(a, vars)), expr.span),
        ExprKind::Binary(op, a, b) => Node::Binary(
            *op,
            Box::new(lower(a, vars)),
            Box::new(lower(b, vars)),
            expr.span,
        ),
    }
}

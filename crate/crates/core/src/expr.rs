//! Guard, condition, and effect expressions.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! or      := and ("or" and)*
//! and     := not ("and" not)*
//! not     := "not" not | cmp
//! cmp     := sum (("<" | "<=" | ">" | ">=" | "==" | "!=") sum)?
//! sum     := product (("+" | "-") product)*
//! product := unary ("*" unary)*
//! unary   := "-" unary | atom
//! atom    := INT | "true" | "false" | IDENT | "(" or ")"
//! ```
//!
//! Effects are assignment lists: `IDENT "=" or` separated by `,` or `;`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Value {
    /// Parses `42`, `-3`, `true`, or `false`.
    pub fn parse(text: &str) -> Option<Value> {
        match text.trim() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            t => t.parse().ok().map(Value::Int),
        }
    }
}

/// Variable bindings visible to guards and effects.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Env {
    pub bindings: BTreeMap<String, Value>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.bindings.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: Value) {
        self.bindings.insert(name.to_string(), value);
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Not(e) => write!(f, "not ({e})"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: String,
    pub value: Expr,
}

/// Syntax error inside an expression; `offset` is a byte offset into the text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprSyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("type mismatch: {0}")]
    Type(String),
    #[error("integer overflow")]
    Overflow,
    #[error("{0}")]
    Syntax(#[from] ExprSyntaxError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Sep,
}

const KEYWORDS: [&str; 5] = ["and", "or", "not", "true", "false"];

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprSyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse().map_err(|_| ExprSyntaxError {
                offset: start,
                message: "integer literal out of range".into(),
            })?;
            out.push((start, Tok::Int(n)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        let two = text.get(i..i + 2).unwrap_or("");
        let op: Option<(&'static str, usize)> = match two {
            "<=" => Some(("<=", 2)),
            ">=" => Some((">=", 2)),
            "==" => Some(("==", 2)),
            "!=" => Some(("!=", 2)),
            _ => match c {
                '<' => Some(("<", 1)),
                '>' => Some((">", 1)),
                '=' => Some(("=", 1)),
                '+' => Some(("+", 1)),
                '-' => Some(("-", 1)),
                '*' => Some(("*", 1)),
                _ => None,
            },
        };
        if let Some((sym, len)) = op {
            out.push((start, Tok::Op(sym)));
            i += len;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' | ';' => Tok::Sep,
            _ => {
                return Err(ExprSyntaxError {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ExprSyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            len: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprSyntaxError> {
        Err(ExprSyntaxError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        match self.peek() {
            Some(Tok::Op(o)) if ops.contains(o) => {
                let o = *o;
                self.pos += 1;
                Some(o)
            }
            _ => None,
        }
    }

    fn or(&mut self) -> Result<Expr, ExprSyntaxError> {
        let mut lhs = self.and()?;
        while self.eat_word("or") {
            let rhs = self.and()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ExprSyntaxError> {
        let mut lhs = self.not()?;
        while self.eat_word("and") {
            let rhs = self.not()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ExprSyntaxError> {
        if self.eat_word("not") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Expr, ExprSyntaxError> {
        let lhs = self.sum()?;
        let op = match self.eat_op(&["<", "<=", ">", ">=", "==", "!="]) {
            Some("<") => BinOp::Lt,
            Some("<=") => BinOp::Le,
            Some(">") => BinOp::Gt,
            Some(">=") => BinOp::Ge,
            Some("==") => BinOp::Eq,
            Some(_) => BinOp::Ne,
            None => return Ok(lhs),
        };
        let rhs = self.sum()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, ExprSyntaxError> {
        let mut lhs = self.product()?;
        while let Some(op) = self.eat_op(&["+", "-"]) {
            let rhs = self.product()?;
            let op = if op == "+" { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprSyntaxError> {
        let mut lhs = self.unary()?;
        while self.eat_op(&["*"]).is_some() {
            let rhs = self.unary()?;
            lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprSyntaxError> {
        if self.eat_op(&["-"]).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExprSyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(w)) => match w.as_str() {
                "true" | "false" => {
                    self.pos += 1;
                    Ok(Expr::Bool(w == "true"))
                }
                w if KEYWORDS.contains(&w) => self.error(format!("unexpected keyword `{w}`")),
                _ => {
                    self.pos += 1;
                    Ok(Expr::Var(w))
                }
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.error("expected an operand"),
            None => self.error("unexpected end of expression"),
        }
    }

    fn finish(&self) -> Result<(), ExprSyntaxError> {
        if self.pos < self.toks.len() {
            return self.error("unexpected trailing input");
        }
        Ok(())
    }
}

/// Parses a guard or condition.
pub fn parse_expr(text: &str) -> Result<Expr, ExprSyntaxError> {
    let mut p = Parser::new(text)?;
    let e = p.or()?;
    p.finish()?;
    Ok(e)
}

/// Parses an effect such as `i = i + 1, done = false`. Empty text is an empty list.
pub fn parse_effect(text: &str) -> Result<Vec<Assignment>, ExprSyntaxError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while p.peek().is_some() {
        let target = match p.peek().cloned() {
            Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()) => w,
            _ => return p.error("expected an assignment target"),
        };
        p.pos += 1;
        if p.eat_op(&["="]).is_none() {
            return p.error("expected `=`");
        }
        let value = p.or()?;
        out.push(Assignment { target, value });
        match p.peek() {
            Some(Tok::Sep) => p.pos += 1,
            None => break,
            Some(_) => return p.error("expected `,` between assignments"),
        }
    }
    Ok(out)
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<Value, EvalError> {
        match self {
            Expr::Int(i) => Ok(Value::Int(*i)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(v) => env.get(v).ok_or_else(|| EvalError::Unbound(v.clone())),
            Expr::Not(e) => Ok(Value::Bool(!as_bool(e.eval(env)?, "not")?)),
            Expr::Neg(e) => as_int(e.eval(env)?, "-")?
                .checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow),
            Expr::Binary(op, l, r) => {
                match op {
                    // short-circuit, so `x > 0 and y` does not need y bound when x <= 0
                    BinOp::And => {
                        if !as_bool(l.eval(env)?, "and")? {
                            return Ok(Value::Bool(false));
                        }
                        return Ok(Value::Bool(as_bool(r.eval(env)?, "and")?));
                    }
                    BinOp::Or => {
                        if as_bool(l.eval(env)?, "or")? {
                            return Ok(Value::Bool(true));
                        }
                        return Ok(Value::Bool(as_bool(r.eval(env)?, "or")?));
                    }
                    _ => {}
                }
                let (lv, rv) = (l.eval(env)?, r.eval(env)?);
                match op {
                    BinOp::Eq => return same_type(lv, rv, "==").map(|_| Value::Bool(lv == rv)),
                    BinOp::Ne => return same_type(lv, rv, "!=").map(|_| Value::Bool(lv != rv)),
                    _ => {}
                }
                let sym = op.symbol();
                let (a, b) = (as_int(lv, sym)?, as_int(rv, sym)?);
                Ok(match op {
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    BinOp::Add => Value::Int(a.checked_add(b).ok_or(EvalError::Overflow)?),
                    BinOp::Sub => Value::Int(a.checked_sub(b).ok_or(EvalError::Overflow)?),
                    BinOp::Mul => Value::Int(a.checked_mul(b).ok_or(EvalError::Overflow)?),
                    BinOp::And | BinOp::Or | BinOp::Eq | BinOp::Ne => unreachable!(),
                })
            }
        }
    }
}

fn as_bool(v: Value, op: &str) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Int(i) => Err(EvalError::Type(format!("`{op}` expects a boolean, got {i}"))),
    }
}

fn as_int(v: Value, op: &str) -> Result<i64, EvalError> {
    match v {
        Value::Int(i) => Ok(i),
        Value::Bool(b) => Err(EvalError::Type(format!("`{op}` expects an integer, got {b}"))),
    }
}

fn same_type(a: Value, b: Value, op: &str) -> Result<(), EvalError> {
    match (a, b) {
        (Value::Int(_), Value::Int(_)) | (Value::Bool(_), Value::Bool(_)) => Ok(()),
        _ => Err(EvalError::Type(format!("`{op}` compares {a} with {b}"))),
    }
}

/// Evaluates a guard to a boolean.
pub fn eval_guard(expr: &str, env: &Env) -> Result<bool, EvalError> {
    let e = parse_expr(expr)?;
    as_bool(e.eval(env)?, "guard")
}

/// Applies assignments left to right; later ones see earlier results.
pub fn apply_effect(assignments: &[Assignment], env: &mut Env) -> Result<(), EvalError> {
    for a in assignments {
        let v = a.value.eval(env)?;
        env.set(&a.target, v);
    }
    Ok(())
}

/// Compares two conditions: structurally when both parse, textually otherwise.
pub fn conditions_equal(a: &str, b: &str) -> bool {
    match (parse_expr(a), parse_expr(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => crate::model::normalize_label(a) == crate::model::normalize_label(b),
    }
}

/// Text of the logical negation of `cond`.
pub fn negate(cond: &str) -> String {
    format!("not ({})", cond.trim())
}

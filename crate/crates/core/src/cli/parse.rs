//! Expression parser: precedence climbing over `+ - * / ^`, parentheses,
//! integer literals, atom names and function application.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exterior::{Basis, Form};
use crate::symexpr::{Context, Expr};

/// Declared opaque function: its derivative and optional square relation are
/// expressions in which a bare function name stands for that function applied
/// to the same argument (`derivative = "-4*f"`, `square = "1 - s^2"`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FnDecl {
    pub derivative: Option<String>,
    pub square: Option<String>,
}

/// Function declarations shared by every parse over one context.
#[derive(Clone, Debug, Default)]
pub struct Functions {
    pub decls: BTreeMap<String, FnDecl>,
}

const BUILTINS: [(&str, &str); 8] = [
    ("sin", "cos"),
    ("cos", "-sin"),
    ("exp", "exp"),
    ("log", "1/#"),
    ("atan", "1/(1 + #^2)"),
    ("tan", "1 + tan^2"),
    ("sinh", "cosh"),
    ("cosh", "sinh"),
];

impl Functions {
    pub fn new() -> Functions {
        Functions::default()
    }

    pub fn declare(&mut self, name: &str, decl: FnDecl) {
        self.decls.insert(name.to_string(), decl);
    }

    fn known(&self, name: &str) -> bool {
        self.decls.contains_key(name) || BUILTINS.iter().any(|(n, _)| *n == name)
    }

    fn derivative_template(&self, name: &str) -> Option<String> {
        if let Some(d) = self.decls.get(name) {
            return d.derivative.clone();
        }
        BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, d)| d.to_string())
    }

    /// Atom for `name(arg)`, declaring its derivative and square relation on first use.
    pub fn apply(&self, ctx: &Context, name: &str, arg: &Expr) -> Result<Expr> {
        if let Some(k) = ctx.find_function(name, arg) {
            return Ok(Expr::atom(ctx, k));
        }
        if !self.known(name) {
            return Err(Error::UnknownAtom(format!("{name}(..)")));
        }
        let k = ctx.function(name, arg)?;
        if let Some(t) = self.derivative_template(name) {
            let d = Parser::new(&t, ctx, self, Some(arg)).parse()?;
            ctx.set_derivative(k, &d)?;
        }
        if let Some(sq) = self.decls.get(name).and_then(|d| d.square.clone()) {
            let s = Parser::new(&sq, ctx, self, Some(arg)).parse()?;
            ctx.set_square(k, &s)?;
        }
        Ok(Expr::atom(ctx, k))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let v = s[st..i].parse::<i64>().map_err(|_| Error::Parse { offset: st, msg: "integer literal too large".into() })?;
            out.push((st, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'\'') {
                i += 1;
            }
            out.push((st, Tok::Ident(s[st..i].to_string())));
        } else if "+-*/^()#".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse { offset: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

pub struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ctx: &'a Context,
    funcs: &'a Functions,
    /// Argument for bare function names and `#` in derivative templates.
    implicit: Option<&'a Expr>,
    lex_error: Option<Error>,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str, ctx: &'a Context, funcs: &'a Functions, implicit: Option<&'a Expr>) -> Parser<'a> {
        let (toks, lex_error) = match lex(src) {
            Ok(t) => (t, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        Parser { src, toks, pos: 0, ctx, funcs, implicit, lex_error }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.src.len())
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { offset: self.offset(), msg: msg.to_string() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn parse(mut self) -> Result<Expr> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if self.toks.is_empty() {
            return self.err("empty expression");
        }
        let e = self.expr(0)?;
        if self.pos < self.toks.len() {
            return self.err("unexpected token");
        }
        Ok(e)
    }

    fn binding(op: char) -> Option<(u8, bool)> {
        // (precedence, right associative)
        match op {
            '+' | '-' => Some((1, false)),
            '*' | '/' => Some((2, false)),
            '^' => Some((4, true)),
            _ => None,
        }
    }

    fn expr(&mut self, min: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let Some(Tok::Op(op)) = self.peek().cloned() else { break };
            let Some((prec, right)) = Parser::binding(op) else { break };
            if prec < min {
                break;
            }
            self.pos += 1;
            if op == '^' {
                let e = self.exponent()?;
                lhs = lhs.powi(e).map_err(|_| Error::Parse { offset: self.offset(), msg: "zero raised to a negative power".into() })?;
                continue;
            }
            let next = if right { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            lhs = match op {
                '+' => &lhs + &rhs,
                '-' => &lhs - &rhs,
                '*' => &lhs * &rhs,
                '/' => lhs.div(&rhs)?,
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn exponent(&mut self) -> Result<i32> {
        let neg_paren = self.eat('(');
        let neg = self.eat('-');
        let v = match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                v
            }
            _ => return self.err("exponent must be an integer"),
        };
        if neg_paren && !self.eat(')') {
            return self.err("expected `)`");
        }
        let v = i32::try_from(v).map_err(|_| Error::Parse { offset: self.offset(), msg: "exponent too large".into() })?;
        Ok(if neg { -v } else { v })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            // binds looser than `^`: -x^2 = -(x^2)
            return Ok(self.expr(3)?.neg());
        }
        if self.eat('+') {
            return self.expr(3);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::int(self.ctx, v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr(0)?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Tok::Op('#') => {
                self.pos += 1;
                match self.implicit {
                    Some(a) => Ok(a.clone()),
                    None => self.err("`#` outside a derivative template"),
                }
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.expr(0)?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return self.funcs.apply(self.ctx, &name, &arg).map_err(|e| match e {
                        Error::UnknownAtom(_) => Error::Parse { offset: at, msg: format!("unknown function `{name}`") },
                        e => e,
                    });
                }
                if let Some(k) = self.ctx.lookup(&name) {
                    return Ok(Expr::atom(self.ctx, k));
                }
                if let Some(a) = self.implicit {
                    if self.funcs.known(&name) {
                        return self.funcs.apply(self.ctx, &name, a);
                    }
                }
                Err(Error::Parse { offset: at, msg: format!("unknown identifier `{name}`") })
            }
            Tok::Op(c) => self.err(&format!("unexpected `{c}`")),
        }
    }
}

/// Parses `s` over `ctx`.
pub fn parse_expr(s: &str, ctx: &Context, funcs: &Functions) -> Result<Expr> {
    Parser::new(s, ctx, funcs, None).parse()
}

/// Builds a form on `b` from `(key, coefficient)` pairs whose keys are basis
/// element names joined by `^`, such as `"dx^dy"`. All keys share one degree.
pub fn parse_form<K: AsRef<str>, V: AsRef<str>>(b: &Basis, terms: &[(K, V)], funcs: &Functions) -> Result<Form> {
    let ctx = b.ctx();
    let mut items = Vec::new();
    let mut deg = None;
    for (k, v) in terms {
        let k = k.as_ref();
        let mut idx = Vec::new();
        for name in k.split(['^', '∧']).map(str::trim) {
            let i = b.names().iter().position(|n| n == name).ok_or_else(|| Error::Input(format!("`{name}` is not an element of the basis")))?;
            idx.push(i);
        }
        if *deg.get_or_insert(idx.len()) != idx.len() {
            return Err(Error::Input(format!("form term `{k}` has the wrong degree")));
        }
        items.push((idx, parse_expr(v.as_ref(), ctx, funcs)?));
    }
    let Some(deg) = deg else {
        return Err(Error::Input("empty form".into()));
    };
    Form::from_terms(b, deg, items)
}

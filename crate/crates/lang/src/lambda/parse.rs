//! Surface syntax:
//!
//! ```text
//! e ::= \x:T. e | e e | succ e | e (+) e | n | x | Ω | ω | (e)
//! T ::= nat | T -> T | rec t. T | t | (T)
//! ```
//!
//! `λ`, `→` and `⊕` are accepted for `\`, `->` and `(+)`; `omega` for `Ω`.

use thiserror::Error;

use super::types::{LType, TypeExpr};
use super::{abs, app, choice, omega, small_omega, succ, Expr};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lambda,
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Colon,
    Dot,
    Arrow,
    Choice,
    BigOmega,
    SmallOmega,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, ch)) = it.peek() {
        let rest = &src[i..];
        let (tok, len) = if ch.is_whitespace() {
            it.next();
            continue;
        } else if rest.starts_with("(+)") {
            (Tok::Choice, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else {
            match ch {
                '\\' | 'λ' => (Tok::Lambda, ch.len_utf8()),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ':' => (Tok::Colon, 1),
                '.' => (Tok::Dot, 1),
                '→' => (Tok::Arrow, ch.len_utf8()),
                '⊕' => (Tok::Choice, ch.len_utf8()),
                'Ω' => (Tok::BigOmega, ch.len_utf8()),
                'ω' => (Tok::SmallOmega, ch.len_utf8()),
                c if c.is_ascii_digit() => {
                    let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                    let n = rest[..len].parse().map_err(|_| ParseError {
                        offset: i,
                        message: "numeral out of range".into(),
                    })?;
                    (Tok::Num(n), len)
                }
                c if c.is_alphabetic() || c == '_' => {
                    let len = rest
                        .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
                        .unwrap_or(rest.len());
                    match &rest[..len] {
                        "omega" => (Tok::BigOmega, len),
                        w => (Tok::Ident(w.to_string()), len),
                    }
                }
                c => return Err(ParseError { offset: i, message: format!("unexpected character `{c}`") }),
            }
        };
        out.push((i, tok));
        while it.peek().is_some_and(|&(j, _)| j < i + len) {
            it.next();
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(o, _)| o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !is_keyword(x) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.app()?;
        while self.peek() == Some(&Tok::Choice) {
            self.pos += 1;
            e = choice(e, self.app()?);
        }
        Ok(e)
    }

    fn starts_unary(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Lambda | Tok::Num(_) | Tok::LParen | Tok::BigOmega | Tok::SmallOmega | Tok::Ident(_))
        )
    }

    fn app(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        while self.starts_unary() {
            let lambda = self.peek() == Some(&Tok::Lambda);
            e = app(e, self.unary()?);
            if lambda {
                break;
            }
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == "succ") {
            self.pos += 1;
            return Ok(succ(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Nat(n))
            }
            Some(Tok::BigOmega) => {
                self.pos += 1;
                Ok(omega())
            }
            Some(Tok::SmallOmega) => {
                self.pos += 1;
                Ok(small_omega())
            }
            Some(Tok::Ident(_)) => Ok(Expr::Var(self.ident()?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Lambda) => {
                self.pos += 1;
                let x = self.ident()?;
                self.expect(Tok::Colon, "`:` and a type annotation")?;
                let t = self.ty()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.expr()?;
                let t = LType::from_syntax(&t).map_err(|e| ParseError { offset: self.offset(), message: e.to_string() })?;
                Ok(abs(&x, t, body))
            }
            _ => self.err("expected an expression"),
        }
    }

    fn ty(&mut self) -> Result<TypeExpr, ParseError> {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == "rec") {
            self.pos += 1;
            let t = self.ident()?;
            self.expect(Tok::Dot, "`.` after the recursion variable")?;
            return Ok(TypeExpr::Rec(t, Box::new(self.ty()?)));
        }
        let a = self.ty_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            return Ok(TypeExpr::Arrow(Box::new(a), Box::new(self.ty()?)));
        }
        Ok(a)
    }

    fn ty_atom(&mut self) -> Result<TypeExpr, ParseError> {
        match self.peek() {
            Some(Tok::Ident(w)) if w == "nat" => {
                self.pos += 1;
                Ok(TypeExpr::Nat)
            }
            Some(Tok::Ident(_)) => Ok(TypeExpr::Var(self.ident()?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.err("expected a type"),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() { Ok(()) } else { self.err("unexpected trailing input") }
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(w, "succ" | "rec" | "nat")
}

fn parser(src: &str) -> Result<Parser, ParseError> {
    Ok(Parser { toks: lex(src)?, pos: 0, end: src.len() })
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_type(src: &str) -> Result<LType, ParseError> {
    let mut p = parser(src)?;
    let t = p.ty()?;
    p.finish()?;
    LType::from_syntax(&t).map_err(|e| ParseError { offset: 0, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::var;

    #[test]
    fn parses_the_basic_forms() {
        let n = LType::nat();
        assert_eq!(parse_expr("(\\x:nat. x) 3").unwrap(), app(abs("x", n.clone(), var("x")), Expr::Nat(3)));
        assert_eq!(parse_expr("λx:nat.x").unwrap(), abs("x", n.clone(), var("x")));
        assert_eq!(parse_expr("succ succ 0").unwrap(), succ(succ(Expr::Nat(0))));
        assert_eq!(parse_expr("1 (+) 2 ⊕ 3").unwrap(), choice(choice(Expr::Nat(1), Expr::Nat(2)), Expr::Nat(3)));
        assert_eq!(parse_expr("omega").unwrap(), omega());
        assert_eq!(parse_expr("ω ω").unwrap(), omega());
        assert_eq!(parse_expr("\\x:rec t. t -> nat. x x").unwrap(), small_omega());
        assert_eq!(parse_type("nat -> nat -> nat").unwrap(), LType::arrow(&n, &LType::arrow(&n, &n)));
    }

    #[test]
    fn reports_errors() {
        assert!(parse_expr("(\\x:nat. x").is_err());
        assert!(parse_expr("\\x. x").is_err());
        assert!(parse_expr("1 2 )").is_err());
        assert!(parse_type("rec t. t").is_err());
        assert_eq!(parse_expr("#").unwrap_err().offset, 0);
    }
}

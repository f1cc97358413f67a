//! Java-like surface syntax for class tables and expressions.
//!
//! ```text
//! program ::= decl* (e ;?)?
//! decl    ::= class C (extends D)? (implements I, ...)? { (T f;)* (T m(T x, ...) { return e; })* }
//!           | interface I (extends J, ...)? { (T m(T x, ...);)* }
//! e       ::= \x y. e | \(x, y). e | (T) e | <T> e | p | p.f = e
//! p       ::= x | #n | new C(e, ...) | (e) | p.f | p.m(e, ...)
//! ```

use thiserror::Error;

use super::{ClassTable, FjExpr, Method, Name, Signature, TableError, TypeDecl};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FjParseError {
    #[error("parse error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("ill-formed class table: {0}")]
    Table(#[from] TableError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub table: ClassTable,
    pub main: Option<FjExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Oid(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Eq,
    Lambda,
    Lt,
    Gt,
}

fn syntax<T>(offset: usize, message: impl Into<String>) -> Result<T, FjParseError> {
    Err(FjParseError::Syntax { offset, message: message.into() })
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, FjParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, ch)) = it.peek() {
        let rest = &src[i..];
        if ch.is_whitespace() {
            it.next();
            continue;
        }
        if rest.starts_with("//") {
            while it.peek().is_some_and(|&(_, c)| c != '\n') {
                it.next();
            }
            continue;
        }
        let (tok, len) = match ch {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ';' => (Tok::Semi, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '=' => (Tok::Eq, 1),
            '<' => (Tok::Lt, 1),
            '>' => (Tok::Gt, 1),
            '\\' | 'λ' => (Tok::Lambda, ch.len_utf8()),
            '#' => {
                let len = rest[1..].find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len() - 1);
                match rest[1..1 + len].parse() {
                    Ok(n) => (Tok::Oid(n), 1 + len),
                    Err(_) => return syntax(i, "expected an object identifier after `#`"),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let len = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
                (Tok::Ident(rest[..len].to_string()), len)
            }
            c => return syntax(i, format!("unexpected character `{c}`")),
        };
        out.push((i, tok));
        while it.peek().is_some_and(|&(j, _)| j < i + len) {
            it.next();
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 6] = ["class", "interface", "extends", "implements", "return", "new"];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(o, _)| o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FjParseError> {
        syntax(self.offset(), message)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FjParseError> {
        if self.eat(&t) { Ok(()) } else { self.err(format!("expected {what}")) }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == w)
    }

    fn keyword(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Name, FjParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn name_list(&mut self) -> Result<Vec<Name>, FjParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn params(&mut self) -> Result<Vec<(Name, Name)>, FjParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let t = self.ident()?;
                out.push((t, self.ident()?));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(out)
    }

    fn class(&mut self) -> Result<TypeDecl, FjParseError> {
        let name = self.ident()?;
        let superclass = if self.keyword("extends") { Some(self.ident()?) } else { None };
        let interfaces = if self.keyword("implements") { self.name_list()? } else { Vec::new() };
        self.expect(Tok::LBrace, "`{`")?;
        let (mut fields, mut methods) = (Vec::new(), Vec::new());
        while !self.eat(&Tok::RBrace) {
            let t = self.ident()?;
            let x = self.ident()?;
            if self.eat(&Tok::Semi) {
                fields.push((t, x));
                continue;
            }
            let params = self.params()?;
            self.expect(Tok::LBrace, "`{`")?;
            if !self.keyword("return") {
                return self.err("expected `return`");
            }
            let body = self.expr()?;
            self.expect(Tok::Semi, "`;`")?;
            self.expect(Tok::RBrace, "`}`")?;
            methods.push(Method { sig: Signature { ret: t, name: x, params }, body });
        }
        Ok(TypeDecl::Class { name, superclass, interfaces, fields, methods })
    }

    fn interface(&mut self) -> Result<TypeDecl, FjParseError> {
        let name = self.ident()?;
        let extends = if self.keyword("extends") { self.name_list()? } else { Vec::new() };
        self.expect(Tok::LBrace, "`{`")?;
        let mut methods = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let ret = self.ident()?;
            let m = self.ident()?;
            let params = self.params()?;
            self.expect(Tok::Semi, "`;`")?;
            methods.push(Signature { ret, name: m, params });
        }
        Ok(TypeDecl::Interface { name, extends, methods })
    }

    fn args(&mut self) -> Result<Vec<FjExpr>, FjParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                out.push(self.expr()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(out)
    }

    fn starts_expr(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_) | Tok::Oid(_) | Tok::LParen | Tok::Lambda | Tok::Lt))
    }

    /// `( T )` followed by the start of an expression.
    fn at_cast(&self) -> bool {
        matches!(
            (self.peek(), self.peek_at(1), self.peek_at(2)),
            (Some(Tok::LParen), Some(Tok::Ident(t)), Some(Tok::RParen)) if !KEYWORDS.contains(&t.as_str())
        ) && matches!(
            self.peek_at(3),
            Some(Tok::Ident(_) | Tok::Oid(_) | Tok::LParen | Tok::Lambda | Tok::Lt)
        )
    }

    fn expr(&mut self) -> Result<FjExpr, FjParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            return self.lambda();
        }
        if self.at_cast() || self.peek() == Some(&Tok::Lt) {
            return self.unary();
        }
        let start = self.offset();
        let e = self.postfix()?;
        if self.eat(&Tok::Eq) {
            let FjExpr::Field(r, f) = e else {
                return syntax(start, "only a field access can be assigned to");
            };
            return Ok(FjExpr::Assign(r, f, Box::new(self.expr()?)));
        }
        Ok(e)
    }

    fn lambda(&mut self) -> Result<FjExpr, FjParseError> {
        self.expect(Tok::Lambda, "`\\`")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.eat(&Tok::RParen) {
                params = self.name_list()?;
                self.expect(Tok::RParen, "`)`")?;
            }
        } else {
            while matches!(self.peek(), Some(Tok::Ident(_))) {
                params.push(self.ident()?);
            }
        }
        self.expect(Tok::Dot, "`.` after the λ parameters")?;
        Ok(FjExpr::Lambda(params, Box::new(self.expr()?)))
    }

    fn unary(&mut self) -> Result<FjExpr, FjParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            return self.lambda();
        }
        if self.at_cast() {
            self.pos += 1;
            let t = self.ident()?;
            self.pos += 1;
            return Ok(FjExpr::Cast(t, Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Lt) {
            let t = self.ident()?;
            self.expect(Tok::Gt, "`>`")?;
            return Ok(FjExpr::Cast(t, Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<FjExpr, FjParseError> {
        let mut e = self.primary()?;
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let n = self.ident()?;
            e = if self.peek() == Some(&Tok::LParen) {
                FjExpr::Invoke(Box::new(e), n, self.args()?)
            } else {
                FjExpr::Field(Box::new(e), n)
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<FjExpr, FjParseError> {
        match self.peek().cloned() {
            Some(Tok::Oid(n)) => {
                self.pos += 1;
                Ok(FjExpr::Oid(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(w)) if w == "new" => {
                self.pos += 1;
                let c = self.ident()?;
                Ok(FjExpr::New(c, self.args()?))
            }
            Some(Tok::Ident(_)) => Ok(FjExpr::Var(self.ident()?)),
            _ => self.err("expected an expression"),
        }
    }

    fn finish(&self) -> Result<(), FjParseError> {
        if self.pos == self.toks.len() { Ok(()) } else { self.err("unexpected trailing input") }
    }
}

fn parser(src: &str) -> Result<Parser, FjParseError> {
    Ok(Parser { toks: lex(src)?, pos: 0, end: src.len() })
}

/// Parses declarations followed by an optional main expression. The class
/// table is checked structurally; method bodies are checked per dialect.
pub fn parse_program(src: &str) -> Result<Program, FjParseError> {
    let mut p = parser(src)?;
    let mut decls = Vec::new();
    loop {
        if p.keyword("class") {
            decls.push(p.class()?);
        } else if p.keyword("interface") {
            decls.push(p.interface()?);
        } else {
            break;
        }
    }
    let main = if p.starts_expr() {
        let e = p.expr()?;
        p.eat(&Tok::Semi);
        Some(e)
    } else {
        None
    };
    p.finish()?;
    Ok(Program { table: ClassTable::new(decls)?, main })
}

pub fn parse_fj_expr(src: &str) -> Result<FjExpr, FjParseError> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_forms() {
        let e = parse_fj_expr("new C((I) \\x. x)").unwrap();
        assert_eq!(e, FjExpr::new_obj("C", vec![FjExpr::cast("I", FjExpr::lambda(&["x"], FjExpr::var("x")))]));
        assert_eq!(parse_fj_expr("new C(<I> λx. x)").unwrap(), e);
        assert_eq!(
            parse_fj_expr("new D().m(\\x. x)").unwrap(),
            FjExpr::invoke(FjExpr::new_obj("D", vec![]), "m", vec![FjExpr::lambda(&["x"], FjExpr::var("x"))])
        );
        assert_eq!(
            parse_fj_expr("this.f = x.g").unwrap(),
            FjExpr::assign(FjExpr::var("this"), "f", FjExpr::field(FjExpr::var("x"), "g"))
        );
        assert_eq!(parse_fj_expr("\\(x, y). #3").unwrap(), FjExpr::Lambda(vec!["x".into(), "y".into()], Box::new(FjExpr::Oid(3))));
        assert_eq!(parse_fj_expr("(x).f").unwrap(), FjExpr::field(FjExpr::var("x"), "f"));
        assert_eq!(
            parse_fj_expr("((I) x).m(y)").unwrap(),
            FjExpr::invoke(FjExpr::cast("I", FjExpr::var("x")), "m", vec![FjExpr::var("y")])
        );
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "new C((I) \\x. x)",
            "new D().m(\\x. x).n(new A())",
            "((I) y).m(new A())",
            "x.f = y.f = new B(#0)",
            "(x.f = y).g",
            "\\(). new A()",
            "\\(x, y). x",
            "(\\x. x).m()",
        ] {
            let e = parse_fj_expr(src).unwrap();
            assert_eq!(e.to_string(), src);
            assert_eq!(parse_fj_expr(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn programs() {
        let p = parse_program("class A {} // trailing comment\nnew A();").unwrap();
        assert_eq!(p.main, Some(FjExpr::new_obj("A", vec![])));
        assert!(parse_program("class A {} class A {}").is_err());
        assert!(parse_program("class A { A m() { this; } }").is_err());
        assert!(parse_fj_expr("new A() = x").is_err());
    }
}

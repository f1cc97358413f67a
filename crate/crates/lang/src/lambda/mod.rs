//! Call-by-value λ-calculus with naturals, successor and binary choice.
//! Abstractions carry (equi-recursive) type annotations.

mod parse;
mod semantics;
pub mod types;
mod typing;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse_expr, parse_type, ParseError};
pub use semantics::{AppStrategy, LambdaSemantics};
pub use types::{type_equal, LType, TypeExpr};
pub use typing::{typecheck, SimpleTypes, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Nat(u64),
    Abs(String, LType, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Succ(Box<Expr>),
    Choice(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(u64),
    Abs(String, LType, Box<Expr>),
}

pub fn var(x: &str) -> Expr {
    Expr::Var(x.to_string())
}

pub fn abs(x: &str, t: LType, body: Expr) -> Expr {
    Expr::Abs(x.to_string(), t, Box::new(body))
}

pub fn app(f: Expr, a: Expr) -> Expr {
    Expr::App(Box::new(f), Box::new(a))
}

pub fn succ(e: Expr) -> Expr {
    Expr::Succ(Box::new(e))
}

pub fn choice(a: Expr, b: Expr) -> Expr {
    Expr::Choice(Box::new(a), Box::new(b))
}

/// The annotation of ω's binder: `T = T → nat`.
pub fn omega_type() -> LType {
    LType::self_arrow(&LType::nat())
}

/// ω = λx:T. x x
pub fn small_omega() -> Expr {
    abs("x", omega_type(), app(var("x"), var("x")))
}

/// Ω = ω ω
pub fn omega() -> Expr {
    app(small_omega(), small_omega())
}

impl Value {
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Nat(n) => Expr::Nat(*n),
            Value::Abs(x, t, b) => Expr::Abs(x.clone(), t.clone(), b.clone()),
        }
    }
}

impl Expr {
    pub fn as_value(&self) -> Option<Value> {
        match self {
            Expr::Nat(n) => Some(Value::Nat(*n)),
            Expr::Abs(x, t, b) => Some(Value::Abs(x.clone(), t.clone(), b.clone())),
            _ => None,
        }
    }

    /// Leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Nat(_) => 1,
            Expr::Abs(_, _, b) | Expr::Succ(b) => 1 + b.depth(),
            Expr::App(a, b) | Expr::Choice(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) if !bound.contains(x) => {
                out.insert(x.clone());
            }
            Expr::Var(_) | Expr::Nat(_) => {}
            Expr::Abs(x, _, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Expr::Succ(a) => a.collect_free(bound, out),
            Expr::App(a, b) | Expr::Choice(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Expr) -> Expr {
        let fv = v.free_vars();
        self.subst_with(x, v, &fv)
    }

    fn subst_with(&self, x: &str, v: &Expr, fv: &BTreeSet<String>) -> Expr {
        match self {
            Expr::Var(y) if y == x => v.clone(),
            Expr::Var(_) | Expr::Nat(_) => self.clone(),
            Expr::Abs(y, _, _) if y == x => self.clone(),
            Expr::Abs(y, t, b) if fv.contains(y) => {
                let mut avoid = b.free_vars();
                avoid.extend(fv.iter().cloned());
                let mut fresh = format!("{y}'");
                while avoid.contains(&fresh) {
                    fresh.push('\'');
                }
                let b = b.subst_with(y, &Expr::Var(fresh.clone()), &[fresh.clone()].into_iter().collect());
                Expr::Abs(fresh, t.clone(), Box::new(b.subst_with(x, v, fv)))
            }
            Expr::Abs(y, t, b) => Expr::Abs(y.clone(), t.clone(), Box::new(b.subst_with(x, v, fv))),
            Expr::App(a, b) => app(a.subst_with(x, v, fv), b.subst_with(x, v, fv)),
            Expr::Succ(a) => succ(a.subst_with(x, v, fv)),
            Expr::Choice(a, b) => choice(a.subst_with(x, v, fv), b.subst_with(x, v, fv)),
        }
    }

    /// Printed form with `Ω` and `ω` abbreviating the divergence fixtures.
    pub fn show_abbrev(&self) -> String {
        let mut s = String::new();
        write_expr(&mut s, self, 0, true).expect("writing to a string");
        s
    }
}

const TOP: u8 = 0;
const APP: u8 = 1;
const UNARY: u8 = 2;
const ATOM: u8 = 3;

fn write_expr(out: &mut impl fmt::Write, e: &Expr, prec: u8, abbrev: bool) -> fmt::Result {
    if abbrev {
        if *e == omega() {
            return write!(out, "Ω");
        }
        if *e == small_omega() {
            return write!(out, "ω");
        }
    }
    let needed = match e {
        Expr::Var(_) | Expr::Nat(_) => ATOM,
        Expr::Abs(..) | Expr::Choice(..) => TOP,
        Expr::App(..) => APP,
        Expr::Succ(_) => UNARY,
    };
    if needed < prec {
        out.write_char('(')?;
        write_expr(out, e, TOP, abbrev)?;
        return out.write_char(')');
    }
    match e {
        Expr::Var(x) => write!(out, "{x}"),
        Expr::Nat(n) => write!(out, "{n}"),
        Expr::Abs(x, t, b) => {
            write!(out, "\\{x}:{t}. ")?;
            write_expr(out, b, TOP, abbrev)
        }
        Expr::App(a, b) => {
            write_expr(out, a, APP, abbrev)?;
            out.write_char(' ')?;
            write_expr(out, b, ATOM, abbrev)
        }
        Expr::Succ(a) => {
            write!(out, "succ ")?;
            write_expr(out, a, UNARY, abbrev)
        }
        Expr::Choice(a, b) => {
            write_expr(out, a, APP, abbrev)?;
            write!(out, " (+) ")?;
            write_expr(out, b, APP, abbrev)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, TOP, false)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Largest natural literal produced by [`enumerate_terms`].
pub const K_MAX: u64 = 3;

/// Annotation alphabet of [`enumerate_terms`]: `nat`, `nat → nat` and `T = T → nat`.
pub fn annotation_alphabet() -> Vec<LType> {
    let n = LType::nat();
    vec![n.clone(), LType::arrow(&n, &n), omega_type()]
}

/// All terms of depth at most `depth` over the binder `x`, the literals
/// `0..=K_MAX` and [`annotation_alphabet`], in a fixed order.
pub fn enumerate_terms(depth: usize, closed_only: bool) -> Vec<Expr> {
    fn gen(d: usize, x_bound: bool, annots: &[LType]) -> Vec<Expr> {
        if d == 0 {
            return Vec::new();
        }
        let mut out: Vec<Expr> = (0..=K_MAX).map(Expr::Nat).collect();
        if x_bound {
            out.push(var("x"));
        }
        if d == 1 {
            return out;
        }
        let sub = gen(d - 1, x_bound, annots);
        let body = gen(d - 1, true, annots);
        for t in annots {
            for b in &body {
                out.push(abs("x", t.clone(), b.clone()));
            }
        }
        for a in &sub {
            out.push(succ(a.clone()));
        }
        for a in &sub {
            for b in &sub {
                out.push(app(a.clone(), b.clone()));
            }
        }
        for a in &sub {
            for b in &sub {
                out.push(choice(a.clone(), b.clone()));
            }
        }
        out
    }
    gen(depth, !closed_only, &annotation_alphabet())
}

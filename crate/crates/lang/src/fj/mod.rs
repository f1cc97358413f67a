//! Featherweight Java variants sharing one abstract syntax and class table:
//! [`minifj`] (functional, with λ-expressions and functional interfaces) and
//! [`imperative`] (field update over a heap of object states).

pub mod imperative;
pub mod minifj;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::{parse_fj_expr, parse_program, FjParseError, Program};

pub type Name = String;

/// The implicit root class.
pub const OBJECT: &str = "Object";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FjExpr {
    Var(Name),
    Field(Box<FjExpr>, Name),
    New(Name, Vec<FjExpr>),
    Invoke(Box<FjExpr>, Name, Vec<FjExpr>),
    Lambda(Vec<Name>, Box<FjExpr>),
    /// Upcast `(T) e`.
    Cast(Name, Box<FjExpr>),
    /// Field update `e.f = e'`.
    Assign(Box<FjExpr>, Name, Box<FjExpr>),
    /// Object identifier, only in imperative runtime configurations.
    Oid(usize),
}

impl FjExpr {
    pub fn var(x: &str) -> Self {
        FjExpr::Var(x.to_string())
    }

    pub fn new_obj(c: &str, args: Vec<FjExpr>) -> Self {
        FjExpr::New(c.to_string(), args)
    }

    pub fn field(e: FjExpr, f: &str) -> Self {
        FjExpr::Field(Box::new(e), f.to_string())
    }

    pub fn invoke(e: FjExpr, m: &str, args: Vec<FjExpr>) -> Self {
        FjExpr::Invoke(Box::new(e), m.to_string(), args)
    }

    pub fn lambda(params: &[&str], body: FjExpr) -> Self {
        FjExpr::Lambda(params.iter().map(|p| p.to_string()).collect(), Box::new(body))
    }

    pub fn cast(t: &str, e: FjExpr) -> Self {
        FjExpr::Cast(t.to_string(), Box::new(e))
    }

    pub fn assign(e: FjExpr, f: &str, v: FjExpr) -> Self {
        FjExpr::Assign(Box::new(e), f.to_string(), Box::new(v))
    }

    pub fn depth(&self) -> usize {
        let sub = |es: &[FjExpr]| es.iter().map(FjExpr::depth).max().unwrap_or(0);
        match self {
            FjExpr::Var(_) | FjExpr::Oid(_) => 1,
            FjExpr::New(_, es) => 1 + sub(es),
            FjExpr::Field(e, _) | FjExpr::Lambda(_, e) | FjExpr::Cast(_, e) => 1 + e.depth(),
            FjExpr::Invoke(e, _, es) => 1 + e.depth().max(sub(es)),
            FjExpr::Assign(a, _, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Replaces free variables; λ parameters shadow.
    pub fn subst(&self, map: &BTreeMap<Name, FjExpr>) -> FjExpr {
        let all = |es: &[FjExpr]| es.iter().map(|e| e.subst(map)).collect();
        match self {
            FjExpr::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            FjExpr::Oid(_) => self.clone(),
            FjExpr::Field(e, f) => FjExpr::Field(Box::new(e.subst(map)), f.clone()),
            FjExpr::New(c, es) => FjExpr::New(c.clone(), all(es)),
            FjExpr::Invoke(e, m, es) => FjExpr::Invoke(Box::new(e.subst(map)), m.clone(), all(es)),
            FjExpr::Lambda(ps, b) => {
                let inner: BTreeMap<Name, FjExpr> =
                    map.iter().filter(|(k, _)| !ps.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                FjExpr::Lambda(ps.clone(), Box::new(b.subst(&inner)))
            }
            FjExpr::Cast(t, e) => FjExpr::Cast(t.clone(), Box::new(e.subst(map))),
            FjExpr::Assign(a, f, b) => FjExpr::Assign(Box::new(a.subst(map)), f.clone(), Box::new(b.subst(map))),
        }
    }
}

const LOW: u8 = 0;
const UNARY: u8 = 1;
const POSTFIX: u8 = 2;

pub(crate) fn write_fj(out: &mut impl fmt::Write, e: &FjExpr, prec: u8) -> fmt::Result {
    let needed = match e {
        FjExpr::Lambda(..) | FjExpr::Assign(..) => LOW,
        FjExpr::Cast(..) => UNARY,
        _ => POSTFIX,
    };
    if needed < prec {
        out.write_char('(')?;
        write_fj(out, e, LOW)?;
        return out.write_char(')');
    }
    let args = |out: &mut dyn fmt::Write, es: &[FjExpr]| -> fmt::Result {
        for (i, a) in es.iter().enumerate() {
            if i > 0 {
                out.write_str(", ")?;
            }
            let mut s = String::new();
            write_fj(&mut s, a, LOW)?;
            out.write_str(&s)?;
        }
        Ok(())
    };
    match e {
        FjExpr::Var(x) => write!(out, "{x}"),
        FjExpr::Oid(i) => write!(out, "#{i}"),
        FjExpr::Field(r, f) => {
            write_fj(out, r, POSTFIX)?;
            write!(out, ".{f}")
        }
        FjExpr::New(c, es) => {
            write!(out, "new {c}(")?;
            args(out, es)?;
            out.write_char(')')
        }
        FjExpr::Invoke(r, m, es) => {
            write_fj(out, r, POSTFIX)?;
            write!(out, ".{m}(")?;
            args(out, es)?;
            out.write_char(')')
        }
        FjExpr::Lambda(ps, b) => {
            match ps.len() {
                1 => write!(out, "\\{}. ", ps[0])?,
                _ => write!(out, "\\({}). ", ps.join(", "))?,
            }
            write_fj(out, b, LOW)
        }
        FjExpr::Cast(t, b) => {
            write!(out, "({t}) ")?;
            let lambda = matches!(**b, FjExpr::Lambda(..));
            write_fj(out, b, if lambda { LOW } else { UNARY })
        }
        FjExpr::Assign(r, f, v) => {
            write_fj(out, r, POSTFIX)?;
            write!(out, ".{f} = ")?;
            write_fj(out, v, LOW)
        }
    }
}

impl fmt::Display for FjExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fj(f, self, LOW)
    }
}

/// Which constructs the expression enumerator may use besides variables,
/// `new`, field access and invocation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grammar {
    pub lambdas: bool,
    pub casts: bool,
    pub assigns: bool,
}

const LAMBDA_PARAMS: [&str; 3] = ["x", "y", "z"];

/// All expressions of depth at most `depth` over `vars`, built from the
/// names in the class table. Arities follow the declarations. Closed
/// expressions rejected by `keep` are dropped before they are used as
/// subterms.
pub(crate) fn enumerate_exprs(
    ct: &ClassTable,
    depth: usize,
    vars: &[Name],
    g: Grammar,
    keep: &dyn Fn(&FjExpr) -> bool,
) -> Vec<FjExpr> {
    let mut memo = BTreeMap::new();
    enumerate_rec(ct, depth, vars.iter().cloned().collect(), g, keep, &mut memo)
}

fn enumerate_rec(
    ct: &ClassTable,
    depth: usize,
    vars: BTreeSet<Name>,
    g: Grammar,
    keep: &dyn Fn(&FjExpr) -> bool,
    memo: &mut BTreeMap<(usize, BTreeSet<Name>), Vec<FjExpr>>,
) -> Vec<FjExpr> {
    if depth == 0 {
        return Vec::new();
    }
    if let Some(hit) = memo.get(&(depth, vars.clone())) {
        return hit.clone();
    }
    let sub = enumerate_rec(ct, depth - 1, vars.clone(), g, keep, memo);
    let tuples = |n: usize| {
        let mut out: Vec<Vec<FjExpr>> = vec![Vec::new()];
        for _ in 0..n {
            out = out.into_iter().flat_map(|t| sub.iter().map(move |e| [t.clone(), vec![e.clone()]].concat())).collect();
        }
        out
    };
    let mut out: Vec<FjExpr> = vars.iter().map(|x| FjExpr::Var(x.clone())).collect();
    let mut field_names = BTreeSet::new();
    let mut methods = BTreeSet::new();
    for d in ct.decls() {
        match d {
            TypeDecl::Class { name, fields, methods: ms, .. } => {
                field_names.extend(fields.iter().map(|(_, f)| f.clone()));
                methods.extend(ms.iter().map(|m| (m.sig.name.clone(), m.sig.params.len())));
                let arity = ct.fields(name).map_or(0, |fs| fs.len());
                out.extend(tuples(arity).into_iter().map(|args| FjExpr::New(name.clone(), args)));
            }
            TypeDecl::Interface { methods: ms, .. } => {
                methods.extend(ms.iter().map(|s| (s.name.clone(), s.params.len())));
            }
        }
    }
    for e in &sub {
        for f in &field_names {
            out.push(FjExpr::Field(Box::new(e.clone()), f.clone()));
        }
    }
    for (m, n) in &methods {
        for recv in &sub {
            for args in tuples(*n) {
                out.push(FjExpr::Invoke(Box::new(recv.clone()), m.clone(), args));
            }
        }
    }
    if g.casts {
        for i in ct.decls().filter(|d| matches!(d, TypeDecl::Interface { .. })) {
            out.extend(sub.iter().map(|e| FjExpr::Cast(i.name().to_string(), Box::new(e.clone()))));
        }
    }
    if g.lambdas {
        let arities: BTreeSet<usize> =
            ct.functional_interfaces().iter().filter_map(|i| ct.umtype(i)).map(|(ps, _)| ps.len()).collect();
        for n in arities.into_iter().filter(|&n| n <= LAMBDA_PARAMS.len()) {
            let params: Vec<Name> = LAMBDA_PARAMS[..n].iter().map(|p| p.to_string()).collect();
            let mut inner = vars.clone();
            inner.extend(params.iter().cloned());
            for b in enumerate_rec(ct, depth - 1, inner, g, keep, memo) {
                out.push(FjExpr::Lambda(params.clone(), Box::new(b)));
            }
        }
    }
    if g.assigns {
        for r in &sub {
            for f in &field_names {
                for v in &sub {
                    out.push(FjExpr::Assign(Box::new(r.clone()), f.clone(), Box::new(v.clone())));
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|e| seen.insert(e.clone()) && (!vars.is_empty() || keep(e)));
    memo.insert((depth, vars), out.clone());
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub ret: Name,
    pub name: Name,
    /// Parameter types and names.
    pub params: Vec<(Name, Name)>,
}

impl Signature {
    pub fn param_types(&self) -> Vec<Name> {
        self.params.iter().map(|(t, _)| t.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Method {
    pub sig: Signature,
    pub body: FjExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDecl {
    Class {
        name: Name,
        superclass: Option<Name>,
        interfaces: Vec<Name>,
        /// Field types and names declared in this class.
        fields: Vec<(Name, Name)>,
        methods: Vec<Method>,
    },
    Interface {
        name: Name,
        extends: Vec<Name>,
        methods: Vec<Signature>,
    },
}

impl TypeDecl {
    pub fn name(&self) -> &str {
        match self {
            TypeDecl::Class { name, .. } | TypeDecl::Interface { name, .. } => name,
        }
    }
}

/// Method type: parameter types and return type.
pub type MethodType = (Vec<Name>, Name);

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("type `{0}` is declared twice")]
    Duplicate(Name),
    #[error("`{0}` refers to the unknown type `{1}`")]
    UnknownType(Name, Name),
    #[error("`{0}` must extend a class and implement interfaces")]
    KindMismatch(Name),
    #[error("the subtype relation is cyclic through `{0}`")]
    Cyclic(Name),
    #[error("field `{1}` of `{0}` is declared more than once along the class chain")]
    FieldClash(Name, Name),
    #[error("method `{1}` of `{0}` has conflicting signatures")]
    SignatureClash(Name, Name),
    #[error("class `{0}` does not implement `{1}`")]
    MissingMethod(Name, Name),
    #[error("body of `{0}.{1}` is ill-typed: {2}")]
    IllTypedBody(Name, Name, String),
}

impl TableError {
    /// The well-formedness condition a failure violates.
    pub fn condition(&self) -> &'static str {
        match self {
            TableError::FieldClash(..) => "IF",
            TableError::SignatureClash(..) | TableError::MissingMethod(..) => "IM",
            TableError::IllTypedBody(..) => "MB",
            TableError::Cyclic(_) => "acyclic",
            TableError::Duplicate(_) | TableError::UnknownType(..) | TableError::KindMismatch(_) => "names",
        }
    }
}

/// Structural conditions plus method bodies checked by `body`, which
/// returns the type error of one method.
pub(crate) fn wf_with(
    ct: &ClassTable,
    body: impl Fn(&Name, &Method) -> Result<(), String>,
) -> Result<(), Vec<TableError>> {
    let mut out = ct.inheritance_failures();
    for d in ct.decls() {
        if let TypeDecl::Class { name, methods, .. } = d {
            for m in methods {
                if let Err(e) = body(name, m) {
                    out.push(TableError::IllTypedBody(name.clone(), m.sig.name.clone(), e));
                }
            }
        }
    }
    if out.is_empty() { Ok(()) } else { Err(out) }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTable {
    decls: BTreeMap<Name, TypeDecl>,
}

impl ClassTable {
    pub fn new(decls: Vec<TypeDecl>) -> Result<Self, TableError> {
        let mut map = BTreeMap::new();
        for d in decls {
            let name = d.name().to_string();
            if name == OBJECT || map.insert(name.clone(), d).is_some() {
                return Err(TableError::Duplicate(name));
            }
        }
        let ct = ClassTable { decls: map };
        ct.check_structure()?;
        Ok(ct)
    }

    pub fn decl(&self, n: &str) -> Option<&TypeDecl> {
        self.decls.get(n)
    }

    pub fn decls(&self) -> impl Iterator<Item = &TypeDecl> {
        self.decls.values()
    }

    pub fn is_class(&self, n: &str) -> bool {
        n == OBJECT || matches!(self.decls.get(n), Some(TypeDecl::Class { .. }))
    }

    pub fn is_interface(&self, n: &str) -> bool {
        matches!(self.decls.get(n), Some(TypeDecl::Interface { .. }))
    }

    pub fn is_type(&self, n: &str) -> bool {
        self.is_class(n) || self.is_interface(n)
    }

    /// All type names, `Object` included.
    pub fn type_names(&self) -> Vec<Name> {
        let mut out = vec![OBJECT.to_string()];
        out.extend(self.decls.keys().cloned());
        out
    }

    fn direct_supertypes(&self, n: &str) -> Vec<Name> {
        match self.decls.get(n) {
            Some(TypeDecl::Class { superclass, interfaces, .. }) => {
                let mut out = vec![superclass.clone().unwrap_or_else(|| OBJECT.to_string())];
                out.extend(interfaces.iter().cloned());
                out
            }
            Some(TypeDecl::Interface { extends, .. }) => extends.clone(),
            None => Vec::new(),
        }
    }

    /// Reflexive and transitive closure of `extends` and `implements`.
    /// Every class is a subtype of `Object`.
    pub fn subtype(&self, a: &str, b: &str) -> bool {
        if a == b || (b == OBJECT && self.is_type(a)) {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut todo = vec![a.to_string()];
        while let Some(t) = todo.pop() {
            if t == b {
                return true;
            }
            if seen.insert(t.clone()) {
                todo.extend(self.direct_supertypes(&t));
            }
        }
        false
    }

    /// Fields of a class, inherited ones first.
    pub fn fields(&self, c: &str) -> Option<Vec<(Name, Name)>> {
        if c == OBJECT {
            return Some(Vec::new());
        }
        match self.decls.get(c)? {
            TypeDecl::Class { superclass, fields, .. } => {
                let mut out = match superclass {
                    Some(s) => self.fields(s)?,
                    None => Vec::new(),
                };
                out.extend(fields.iter().cloned());
                Some(out)
            }
            TypeDecl::Interface { .. } => None,
        }
    }

    pub fn field_index(&self, c: &str, f: &str) -> Option<(usize, Name)> {
        self.fields(c)?.into_iter().enumerate().find(|(_, (_, g))| g == f).map(|(i, (t, _))| (i, t))
    }

    fn signature(&self, t: &str, m: &str) -> Option<Signature> {
        match self.decls.get(t)? {
            TypeDecl::Class { superclass, interfaces, methods, .. } => methods
                .iter()
                .find(|d| d.sig.name == m)
                .map(|d| d.sig.clone())
                .or_else(|| superclass.as_deref().and_then(|s| self.signature(s, m)))
                .or_else(|| interfaces.iter().find_map(|i| self.signature(i, m))),
            TypeDecl::Interface { extends, methods, .. } => methods
                .iter()
                .find(|s| s.name == m)
                .cloned()
                .or_else(|| extends.iter().find_map(|i| self.signature(i, m))),
        }
    }

    pub fn mtype(&self, t: &str, m: &str) -> Option<MethodType> {
        self.signature(t, m).map(|s| (s.param_types(), s.ret))
    }

    /// Parameter names and body of the implementation of `m` in class `c`.
    pub fn mbody(&self, c: &str, m: &str) -> Option<(Vec<Name>, FjExpr)> {
        match self.decls.get(c)? {
            TypeDecl::Class { superclass, methods, .. } => match methods.iter().find(|d| d.sig.name == m) {
                Some(d) => Some((d.sig.params.iter().map(|(_, x)| x.clone()).collect(), d.body.clone())),
                None => self.mbody(superclass.as_deref()?, m),
            },
            TypeDecl::Interface { .. } => None,
        }
    }

    /// Method names visible in `t`.
    pub fn method_names(&self, t: &str) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut todo = vec![t.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(u) = todo.pop() {
            if !seen.insert(u.clone()) {
                continue;
            }
            match self.decls.get(&u) {
                Some(TypeDecl::Class { methods, .. }) => out.extend(methods.iter().map(|m| m.sig.name.clone())),
                Some(TypeDecl::Interface { methods, .. }) => out.extend(methods.iter().map(|s| s.name.clone())),
                None => {}
            }
            todo.extend(self.direct_supertypes(&u));
        }
        out
    }

    /// The single abstract method type of a functional interface.
    pub fn umtype(&self, i: &str) -> Option<MethodType> {
        if !self.is_interface(i) {
            return None;
        }
        let names = self.method_names(i);
        let [m] = names.iter().collect::<Vec<_>>()[..] else {
            return None;
        };
        self.mtype(i, m)
    }

    pub fn functional_interfaces(&self) -> Vec<Name> {
        self.decls.keys().filter(|n| self.umtype(n).is_some()).cloned().collect()
    }

    /// Known names, class and interface kinds respected and an acyclic
    /// hierarchy; lookups rely on these.
    fn check_structure(&self) -> Result<(), TableError> {
        let known = |owner: &str, t: &str| {
            if self.is_type(t) { Ok(()) } else { Err(TableError::UnknownType(owner.into(), t.into())) }
        };
        for d in self.decls.values() {
            let n = d.name();
            match d {
                TypeDecl::Class { superclass, interfaces, fields, methods, .. } => {
                    if let Some(s) = superclass {
                        known(n, s)?;
                        if !self.is_class(s) {
                            return Err(TableError::KindMismatch(n.into()));
                        }
                    }
                    for i in interfaces {
                        known(n, i)?;
                        if !self.is_interface(i) {
                            return Err(TableError::KindMismatch(n.into()));
                        }
                    }
                    for (t, _) in fields {
                        known(n, t)?;
                    }
                    for m in methods {
                        known(n, &m.sig.ret)?;
                        for (t, _) in &m.sig.params {
                            known(n, t)?;
                        }
                    }
                }
                TypeDecl::Interface { extends, methods, .. } => {
                    for i in extends {
                        known(n, i)?;
                        if !self.is_interface(i) {
                            return Err(TableError::KindMismatch(n.into()));
                        }
                    }
                    for s in methods {
                        known(n, &s.ret)?;
                        for (t, _) in &s.params {
                            known(n, t)?;
                        }
                    }
                }
            }
        }
        for n in self.decls.keys() {
            if self.direct_supertypes(n).iter().any(|s| self.subtype(s, n)) {
                return Err(TableError::Cyclic(n.clone()));
            }
        }
        Ok(())
    }

    /// Inheritance conditions: no field declared twice along a class chain
    /// (IF), invariant method types along subtyping and every method of a
    /// class implemented (IM).
    pub fn inheritance_failures(&self) -> Vec<TableError> {
        let mut out = Vec::new();
        for n in self.decls.keys() {
            if let Some(fs) = self.fields(n) {
                let mut seen = BTreeSet::new();
                for (_, f) in fs {
                    if !seen.insert(f.clone()) {
                        out.push(TableError::FieldClash(n.clone(), f));
                    }
                }
            }
            for m in self.method_names(n) {
                let mine = self.mtype(n, &m);
                for sup in self.type_names() {
                    if sup != *n && self.subtype(n, &sup) {
                        if let Some(theirs) = self.mtype(&sup, &m) {
                            if mine.as_ref() != Some(&theirs) {
                                out.push(TableError::SignatureClash(n.clone(), m.clone()));
                            }
                        }
                    }
                }
                if self.is_class(n) && self.mbody(n, &m).is_none() {
                    out.push(TableError::MissingMethod(n.clone(), m));
                }
            }
        }
        out.dedup();
        out
    }
}

impl fmt::Display for ClassTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = |ps: &[(Name, Name)]| ps.iter().map(|(t, x)| format!("{t} {x}")).collect::<Vec<_>>().join(", ");
        for d in self.decls.values() {
            match d {
                TypeDecl::Class { name, superclass, interfaces, fields, methods } => {
                    write!(f, "class {name}")?;
                    if let Some(s) = superclass {
                        write!(f, " extends {s}")?;
                    }
                    if !interfaces.is_empty() {
                        write!(f, " implements {}", interfaces.join(", "))?;
                    }
                    writeln!(f, " {{")?;
                    for (t, x) in fields {
                        writeln!(f, "  {t} {x};")?;
                    }
                    for m in methods {
                        writeln!(f, "  {} {}({}) {{ return {}; }}", m.sig.ret, m.sig.name, params(&m.sig.params), m.body)?;
                    }
                    writeln!(f, "}}")?;
                }
                TypeDecl::Interface { name, extends, methods } => {
                    write!(f, "interface {name}")?;
                    if !extends.is_empty() {
                        write!(f, " extends {}", extends.join(", "))?;
                    }
                    writeln!(f, " {{")?;
                    for s in methods {
                        writeln!(f, "  {} {}({});", s.ret, s.name, params(&s.params))?;
                    }
                    writeln!(f, "}}")?;
                }
            }
        }
        Ok(())
    }
}

/// The functional-interface example table. `A` is declared so that the
/// signature of `I.m` refers to a known class.
pub const FJ_LAMBDA_FIXTURE: &str = "\
interface J {}
interface I extends J { A m(A x); }
class A {}
class C { J f; }
class D {
  D m(I y) { return new D().n(y); }
  D n(J y) { return new D(); }
}
";

/// Two classes with a field update, used for the imperative corpus.
pub const IMPERATIVE_FIXTURE: &str = "\
class A {
  A self() { return this; }
}
class B {
  A f;
  A get() { return this.f; }
  A put(A x) { return this.f = x; }
  B with(A x) { return this.keep(this.f = x); }
  B keep(A y) { return this; }
}
";

/// A tiny table with a method that calls itself forever.
pub const LOOP_FIXTURE: &str = "\
class L {
  L loop() { return this.loop(); }
}
";

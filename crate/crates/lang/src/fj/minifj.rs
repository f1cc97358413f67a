//! Functional Featherweight Java with λ-expressions and functional
//! interfaces. Configurations pair a variable environment with an
//! expression; λ-values do not close over the environment, their bodies only
//! see their parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use bsm_core::bigstep::{ActivationOf, ContinuationOf, StartStepOf};
use bsm_core::soundness::IndexedPredicate;
use bsm_core::{Activation, Continuation, LanguageSemantics, StartStep};
use thiserror::Error;

use super::{enumerate_exprs, write_fj, wf_with, ClassTable, FjExpr, Grammar, Name, TableError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FjValue {
    Obj(Name, Vec<FjValue>),
    Lambda(Vec<Name>, FjExpr),
}

impl fmt::Display for FjValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FjValue::Obj(c, vs) => {
                write!(f, "obj {c}(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            FjValue::Lambda(ps, b) => write_fj(f, &FjExpr::Lambda(ps.clone(), Box::new(b.clone())), 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MiniConf {
    pub env: BTreeMap<Name, FjValue>,
    pub expr: FjExpr,
}

impl MiniConf {
    pub fn closed(expr: FjExpr) -> Self {
        MiniConf { env: BTreeMap::new(), expr }
    }
}

impl fmt::Display for MiniConf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.env.is_empty() {
            f.write_str("{")?;
            for (i, (x, v)) in self.env.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{x} = {v}")?;
            }
            f.write_str("} ")?;
        }
        write!(f, "{}", self.expr)
    }
}

#[derive(Clone, Debug)]
pub struct MiniFj {
    pub table: Arc<ClassTable>,
}

impl MiniFj {
    pub fn new(table: ClassTable) -> Self {
        MiniFj { table: Arc::new(table) }
    }

    fn body_config(&self, recv: &FjValue, m: &str, args: &[FjValue]) -> Option<(&'static str, MiniConf)> {
        match recv {
            FjValue::Obj(c, _) => {
                let (xs, body) = self.table.mbody(c, m)?;
                if xs.len() != args.len() {
                    return None;
                }
                let mut env: BTreeMap<Name, FjValue> = xs.into_iter().zip(args.iter().cloned()).collect();
                env.insert("this".into(), recv.clone());
                Some(("invk", MiniConf { env, expr: body }))
            }
            FjValue::Lambda(ps, body) => {
                if ps.len() != args.len() {
                    return None;
                }
                let env = ps.iter().cloned().zip(args.iter().cloned()).collect();
                Some(("λ-invk", MiniConf { env, expr: body.clone() }))
            }
        }
    }

    fn receiver_rule(&self, recv: &FjValue, m: &str, n: usize) -> Option<&'static str> {
        match recv {
            FjValue::Obj(c, _) => self.table.mbody(c, m).filter(|(xs, _)| xs.len() == n).map(|_| "invk"),
            FjValue::Lambda(ps, _) => (ps.len() == n).then_some("λ-invk"),
        }
    }
}

impl LanguageSemantics for MiniFj {
    type Config = MiniConf;
    type Res = FjValue;
    type Bindings = ();

    fn start(&self, c: &MiniConf) -> Vec<StartStepOf<Self>> {
        let sub = |e: &FjExpr| MiniConf { env: c.env.clone(), expr: e.clone() };
        let first = |rule, e: &FjExpr| vec![StartStep::FirstPremise(Activation::first(rule, (), c.clone(), sub(e)))];
        match &c.expr {
            FjExpr::Var(x) => match c.env.get(x) {
                Some(v) => vec![StartStep::Axiom { rule: "var", result: v.clone() }],
                None => vec![],
            },
            FjExpr::Lambda(ps, b) => vec![StartStep::Axiom { rule: "λ", result: FjValue::Lambda(ps.clone(), (**b).clone()) }],
            FjExpr::New(k, es) => match es.first() {
                None => vec![StartStep::Axiom { rule: "new", result: FjValue::Obj(k.clone(), vec![]) }],
                Some(e) => first("new", e),
            },
            FjExpr::Field(e, _) => first("field", e),
            FjExpr::Invoke(e, _, _) => first("invk", e),
            FjExpr::Cast(_, e) => first("upcast", e),
            FjExpr::Assign(..) | FjExpr::Oid(_) => vec![],
        }
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &FjValue) -> Vec<ContinuationOf<Self>> {
        let env = &a.conclusion.env;
        let sub = |e: &FjExpr| MiniConf { env: env.clone(), expr: e.clone() };
        let finish = |rule, result| vec![Continuation::Finished { rule, result }];
        let k = a.completed.len();
        match &a.conclusion.expr {
            FjExpr::New(c, es) => {
                if k + 1 < es.len() {
                    return vec![Continuation::Demand(a.then(r.clone(), "new", (), sub(&es[k + 1])))];
                }
                let mut vs: Vec<FjValue> = a.completed.iter().map(|j| j.result.clone()).collect();
                vs.push(r.clone());
                finish("new", FjValue::Obj(c.clone(), vs))
            }
            FjExpr::Field(_, f) => match r {
                FjValue::Obj(c, vs) => match self.table.fields(c) {
                    Some(fs) if fs.len() == vs.len() => match fs.iter().position(|(_, g)| g == f) {
                        Some(i) => finish("field", vs[i].clone()),
                        None => vec![],
                    },
                    _ => vec![],
                },
                FjValue::Lambda(..) => vec![],
            },
            FjExpr::Cast(..) => finish("upcast", r.clone()),
            FjExpr::Invoke(_, m, es) => {
                let n = es.len();
                let recv = if k == 0 { r } else { &a.completed[0].result };
                let Some(rule) = self.receiver_rule(recv, m, n) else {
                    return vec![];
                };
                if k < n {
                    return vec![Continuation::Demand(a.then(r.clone(), rule, (), sub(&es[k])))];
                }
                if k == n {
                    let mut args: Vec<FjValue> = a.completed.iter().skip(1).map(|j| j.result.clone()).collect();
                    if n > 0 {
                        args.push(r.clone());
                    }
                    return match self.body_config(recv, m, &args) {
                        Some((rule, body)) => vec![Continuation::Demand(a.then(r.clone(), rule, (), body))],
                        None => vec![],
                    };
                }
                finish(rule, r.clone())
            }
            _ => vec![],
        }
    }

    fn premise_bound(&self, c: &MiniConf) -> usize {
        match &c.expr {
            FjExpr::New(_, es) => es.len(),
            FjExpr::Invoke(_, _, es) => es.len() + 2,
            FjExpr::Field(..) | FjExpr::Cast(..) => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FjTypeError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("unknown type `{0}`")]
    UnknownType(Name),
    #[error("type `{0}` has no field `{1}`")]
    NoField(Name, Name),
    #[error("type `{0}` has no method `{1}`")]
    NoMethod(Name, Name),
    #[error("`{0}` has the wrong number of arguments")]
    Arity(String),
    #[error("`{0}` has type {1}, which is not a subtype of {2}")]
    NotSubtype(String, Name, Name),
    #[error("λ-expression `{0}` needs a functional interface as target type")]
    LambdaTarget(String),
    #[error("`{0}` does not check against {1}")]
    LambdaMismatch(String, Name),
    #[error("`{0}` is not part of this language")]
    NotInDialect(String),
    #[error("value `{0}` is ill-typed")]
    IllTypedValue(String),
}

pub type TypeEnv = BTreeMap<Name, Name>;

/// Synthesizes the type of a non-λ expression.
pub fn infer(ct: &ClassTable, gamma: &TypeEnv, e: &FjExpr) -> Result<Name, FjTypeError> {
    match e {
        FjExpr::Var(x) => gamma.get(x).cloned().ok_or_else(|| FjTypeError::Unbound(x.clone())),
        FjExpr::Field(r, f) => {
            let t = infer(ct, gamma, r)?;
            ct.field_index(&t, f).map(|(_, ft)| ft).ok_or(FjTypeError::NoField(t, f.clone()))
        }
        FjExpr::New(c, es) => {
            let fs = ct.fields(c).ok_or_else(|| FjTypeError::UnknownType(c.clone()))?;
            if fs.len() != es.len() {
                return Err(FjTypeError::Arity(e.to_string()));
            }
            for (a, (t, _)) in es.iter().zip(&fs) {
                check(ct, gamma, a, t)?;
            }
            Ok(c.clone())
        }
        FjExpr::Invoke(r, m, es) => {
            let t = infer(ct, gamma, r)?;
            let (ps, ret) = ct.mtype(&t, m).ok_or(FjTypeError::NoMethod(t, m.clone()))?;
            if ps.len() != es.len() {
                return Err(FjTypeError::Arity(e.to_string()));
            }
            for (a, t) in es.iter().zip(&ps) {
                check(ct, gamma, a, t)?;
            }
            Ok(ret)
        }
        FjExpr::Cast(t, b) => {
            if !ct.is_type(t) {
                return Err(FjTypeError::UnknownType(t.clone()));
            }
            check(ct, gamma, b, t)?;
            Ok(t.clone())
        }
        FjExpr::Lambda(..) => Err(FjTypeError::LambdaTarget(e.to_string())),
        FjExpr::Assign(..) | FjExpr::Oid(_) => Err(FjTypeError::NotInDialect(e.to_string())),
    }
}

/// `e` has a subtype of `t`; a λ-expression must target exactly the
/// functional interface `t`.
pub fn check(ct: &ClassTable, gamma: &TypeEnv, e: &FjExpr, t: &str) -> Result<(), FjTypeError> {
    if let FjExpr::Lambda(ps, b) = e {
        return check_lambda(ct, ps, b, t);
    }
    let found = infer(ct, gamma, e)?;
    if ct.subtype(&found, t) { Ok(()) } else { Err(FjTypeError::NotSubtype(e.to_string(), found, t.to_string())) }
}

fn check_lambda(ct: &ClassTable, ps: &[Name], body: &FjExpr, t: &str) -> Result<(), FjTypeError> {
    let shown = || FjExpr::Lambda(ps.to_vec(), Box::new(body.clone())).to_string();
    let (ts, ret) = ct.umtype(t).ok_or_else(|| FjTypeError::LambdaTarget(shown()))?;
    let nested = matches!(body, FjExpr::Lambda(..));
    if nested || ts.len() != ps.len() || ps.iter().collect::<BTreeSet<_>>().len() != ps.len() {
        return Err(FjTypeError::LambdaMismatch(shown(), t.to_string()));
    }
    let inner = ps.iter().cloned().zip(ts).collect();
    check(ct, &inner, body, &ret)
}

/// Minimal types of a value: its class for objects, every functional
/// interface it checks against for λ-values.
pub fn value_types(ct: &ClassTable, v: &FjValue) -> Vec<Name> {
    match v {
        FjValue::Obj(c, vs) => {
            let ok = ct.fields(c).is_some_and(|fs| {
                fs.len() == vs.len() && vs.iter().zip(&fs).all(|(v, (t, _))| value_has_type(ct, v, t))
            });
            if ok { vec![c.clone()] } else { vec![] }
        }
        FjValue::Lambda(ps, b) => {
            ct.functional_interfaces().into_iter().filter(|i| check_lambda(ct, ps, b, i).is_ok()).collect()
        }
    }
}

pub fn value_has_type(ct: &ClassTable, v: &FjValue, t: &str) -> bool {
    value_types(ct, v).iter().any(|u| ct.subtype(u, t))
}

/// Minimal types of a configuration, over every typing of its environment.
pub fn config_types(ct: &ClassTable, c: &MiniConf) -> Vec<Name> {
    let mut envs: Vec<TypeEnv> = vec![TypeEnv::new()];
    for (x, v) in &c.env {
        let ts = value_types(ct, v);
        envs = envs
            .into_iter()
            .flat_map(|g| {
                ts.iter().map(move |t| {
                    let mut g = g.clone();
                    g.insert(x.clone(), t.clone());
                    g
                })
            })
            .collect();
    }
    let mut out = BTreeSet::new();
    for g in &envs {
        match &c.expr {
            FjExpr::Lambda(..) => {
                out.extend(ct.functional_interfaces().into_iter().filter(|i| check(ct, g, &c.expr, i).is_ok()))
            }
            e => out.extend(infer(ct, g, e).ok()),
        }
    }
    out.into_iter().collect()
}

pub fn typecheck_config(ct: &ClassTable, c: &MiniConf) -> Result<Vec<Name>, FjTypeError> {
    for v in c.env.values() {
        if value_types(ct, v).is_empty() {
            return Err(FjTypeError::IllTypedValue(v.to_string()));
        }
    }
    let ts = config_types(ct, c);
    if !ts.is_empty() {
        return Ok(ts);
    }
    // Report the error of the first environment typing for a useful message.
    let gamma: TypeEnv = c.env.iter().map(|(x, v)| (x.clone(), value_types(ct, v)[0].clone())).collect();
    match &c.expr {
        FjExpr::Lambda(..) => Err(FjTypeError::LambdaTarget(c.expr.to_string())),
        e => infer(ct, &gamma, e).map(|t| vec![t]),
    }
}

/// Class-table well-formedness: IF, IM and method bodies (MB) checked
/// against their declared return types.
pub fn class_table_wf(ct: &ClassTable) -> Result<(), Vec<TableError>> {
    wf_with(ct, |class, m| {
        let mut gamma: TypeEnv = m.sig.params.iter().map(|(t, x)| (x.clone(), t.clone())).collect();
        gamma.insert("this".into(), class.clone());
        check(ct, &gamma, &m.body, &m.sig.ret).map_err(|e| e.to_string())
    })
}

/// Configurations indexed by every supertype of one of their minimal types.
#[derive(Clone, Debug)]
pub struct MiniFjTypes {
    pub table: Arc<ClassTable>,
}

impl IndexedPredicate<MiniConf, FjValue> for MiniFjTypes {
    type Index = Name;

    fn indices_of_config(&self, c: &MiniConf) -> Vec<Name> {
        let ct = &*self.table;
        if c.env.values().any(|v| value_types(ct, v).is_empty()) {
            return vec![];
        }
        let mins = config_types(ct, c);
        ct.type_names().into_iter().filter(|t| mins.iter().any(|m| ct.subtype(m, t))).collect()
    }

    fn holds_result(&self, r: &FjValue, idx: &Name) -> bool {
        value_has_type(&self.table, r, idx)
    }
}

const GRAMMAR: Grammar = Grammar { lambdas: true, casts: true, assigns: false };

/// Closed expressions of depth at most `depth` over the names of the
/// table, typed or not.
pub fn enumerate_closed(ct: &ClassTable, depth: usize) -> Vec<MiniConf> {
    enumerate_exprs(ct, depth, &[], GRAMMAR, &|_| true).into_iter().map(MiniConf::closed).collect()
}

/// The well-typed part of [`enumerate_closed`]. Every closed non-λ subterm
/// of a well-typed expression is itself typable, so ill-typed subterms are
/// pruned during enumeration.
pub fn typed_corpus(ct: &ClassTable, depth: usize) -> Vec<MiniConf> {
    let typable = |e: &FjExpr| matches!(e, FjExpr::Lambda(..)) || infer(ct, &TypeEnv::new(), e).is_ok();
    enumerate_exprs(ct, depth, &[], GRAMMAR, &typable)
        .into_iter()
        .map(MiniConf::closed)
        .filter(|c| !config_types(ct, c).is_empty())
        .collect()
}

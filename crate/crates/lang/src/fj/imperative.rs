//! Imperative Featherweight Java: objects live in a memory of states
//! `C(ι1, ..., ιn)` and expressions evaluate to object identifiers.
//! Memories are threaded left to right through the premises.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use bsm_core::bigstep::{ActivationOf, ContinuationOf, StartStepOf};
use bsm_core::soundness::IndexedPredicate;
use bsm_core::{Activation, Continuation, LanguageSemantics, StartStep};

use super::minifj::FjTypeError;
use super::{enumerate_exprs, wf_with, ClassTable, FjExpr, Grammar, Name, TableError};

pub type Oid = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjState {
    pub class: Name,
    pub fields: Vec<Oid>,
}

impl fmt::Display for ObjState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs: Vec<String> = self.fields.iter().map(|i| format!("#{i}")).collect();
        write!(f, "{}({})", self.class, fs.join(", "))
    }
}

pub type Memory = Vec<ObjState>;

fn write_memory(f: &mut fmt::Formatter<'_>, mem: &Memory) -> fmt::Result {
    f.write_str("[")?;
    for (i, s) in mem.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "#{i} ↦ {s}")?;
    }
    f.write_str("]")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImpConf {
    pub mem: Memory,
    pub expr: FjExpr,
}

impl ImpConf {
    pub fn closed(expr: FjExpr) -> Self {
        ImpConf { mem: Memory::new(), expr }
    }
}

impl fmt::Display for ImpConf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        write_memory(f, &self.mem)?;
        write!(f, ", {}⟩", self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImpRes {
    pub mem: Memory,
    pub oid: Oid,
}

impl fmt::Display for ImpRes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        write_memory(f, &self.mem)?;
        write!(f, ", #{}⟩", self.oid)
    }
}

#[derive(Clone, Debug)]
pub struct ImperativeFj {
    pub table: Arc<ClassTable>,
}

impl ImperativeFj {
    pub fn new(table: ClassTable) -> Self {
        ImperativeFj { table: Arc::new(table) }
    }

    fn field_slot(&self, mem: &Memory, oid: Oid, f: &str) -> Option<usize> {
        let s = mem.get(oid)?;
        let fs = self.table.fields(&s.class)?;
        if fs.len() != s.fields.len() {
            return None;
        }
        fs.iter().position(|(_, g)| g == f)
    }
}

impl LanguageSemantics for ImperativeFj {
    type Config = ImpConf;
    type Res = ImpRes;
    type Bindings = ();

    fn start(&self, c: &ImpConf) -> Vec<StartStepOf<Self>> {
        let at = |e: &FjExpr| ImpConf { mem: c.mem.clone(), expr: e.clone() };
        let first = |rule, e: &FjExpr| vec![StartStep::FirstPremise(Activation::first(rule, (), c.clone(), at(e)))];
        match &c.expr {
            FjExpr::Oid(i) => vec![StartStep::Axiom { rule: "obj", result: ImpRes { mem: c.mem.clone(), oid: *i } }],
            FjExpr::New(k, es) => match es.first() {
                None => {
                    let mut mem = c.mem.clone();
                    mem.push(ObjState { class: k.clone(), fields: vec![] });
                    vec![StartStep::Axiom { rule: "new", result: ImpRes { oid: mem.len() - 1, mem } }]
                }
                Some(e) => first("new", e),
            },
            FjExpr::Field(e, _) => first("fld", e),
            FjExpr::Invoke(e, _, _) => first("invk", e),
            FjExpr::Assign(e, _, _) => first("fld-up", e),
            FjExpr::Var(_) | FjExpr::Lambda(..) | FjExpr::Cast(..) => vec![],
        }
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &ImpRes) -> Vec<ContinuationOf<Self>> {
        let at = |e: &FjExpr| ImpConf { mem: r.mem.clone(), expr: e.clone() };
        let demand = |rule, next| vec![Continuation::Demand(a.then(r.clone(), rule, (), next))];
        let finish = |rule, result| vec![Continuation::Finished { rule, result }];
        let k = a.completed.len();
        match &a.conclusion.expr {
            FjExpr::New(c, es) => {
                if k + 1 < es.len() {
                    return demand("new", at(&es[k + 1]));
                }
                let mut fields: Vec<Oid> = a.completed.iter().map(|j| j.result.oid).collect();
                fields.push(r.oid);
                let mut mem = r.mem.clone();
                mem.push(ObjState { class: c.clone(), fields });
                finish("new", ImpRes { oid: mem.len() - 1, mem })
            }
            FjExpr::Field(_, f) => match self.field_slot(&r.mem, r.oid, f) {
                Some(i) => finish("fld", ImpRes { mem: r.mem.clone(), oid: r.mem[r.oid].fields[i] }),
                None => vec![],
            },
            FjExpr::Assign(_, f, v) => {
                if k == 0 {
                    return match self.field_slot(&r.mem, r.oid, f) {
                        Some(_) => demand("fld-up", at(v)),
                        None => vec![],
                    };
                }
                let target = a.completed[0].result.oid;
                // The target was checked in the memory before evaluating the
                // right-hand side; objects are never removed, only updated.
                let Some(i) = self.field_slot(&r.mem, target, f) else {
                    return vec![];
                };
                let mut mem = r.mem.clone();
                mem[target].fields[i] = r.oid;
                finish("fld-up", ImpRes { mem, oid: r.oid })
            }
            FjExpr::Invoke(_, m, es) => {
                let n = es.len();
                let recv = if k == 0 { r.oid } else { a.completed[0].result.oid };
                if k == n + 1 {
                    return finish("invk", r.clone());
                }
                // The receiver's class is read in the memory produced by premise 1.
                let class = match a.completed.first().map(|j| &j.result).unwrap_or(r).mem.get(recv) {
                    Some(s) => s.class.clone(),
                    None => return vec![],
                };
                let Some((xs, body)) = self.table.mbody(&class, m).filter(|(xs, _)| xs.len() == n) else {
                    return vec![];
                };
                if k < n {
                    return demand("invk", at(&es[k]));
                }
                let mut args: Vec<Oid> = a.completed.iter().skip(1).map(|j| j.result.oid).collect();
                if n > 0 {
                    args.push(r.oid);
                }
                let mut map: BTreeMap<Name, FjExpr> = xs.into_iter().zip(args.into_iter().map(FjExpr::Oid)).collect();
                map.insert("this".into(), FjExpr::Oid(recv));
                demand("invk", at(&body.subst(&map)))
            }
            _ => vec![],
        }
    }

    fn premise_bound(&self, c: &ImpConf) -> usize {
        match &c.expr {
            FjExpr::New(_, es) => es.len(),
            FjExpr::Invoke(_, _, es) => es.len() + 2,
            FjExpr::Assign(..) => 2,
            FjExpr::Field(..) => 1,
            _ => 0,
        }
    }
}

/// Memory typing: the class of each object identifier.
pub type Sigma = Vec<Name>;

pub fn sigma_of(mem: &Memory) -> Sigma {
    mem.iter().map(|s| s.class.clone()).collect()
}

pub type TypeEnv = BTreeMap<Name, Name>;

pub fn infer(ct: &ClassTable, sigma: &Sigma, gamma: &TypeEnv, e: &FjExpr) -> Result<Name, FjTypeError> {
    let sub = |e: &FjExpr, t: &str| -> Result<(), FjTypeError> {
        let found = infer(ct, sigma, gamma, e)?;
        if ct.subtype(&found, t) { Ok(()) } else { Err(FjTypeError::NotSubtype(e.to_string(), found, t.to_string())) }
    };
    match e {
        FjExpr::Var(x) => gamma.get(x).cloned().ok_or_else(|| FjTypeError::Unbound(x.clone())),
        FjExpr::Oid(i) => sigma.get(*i).cloned().ok_or_else(|| FjTypeError::Unbound(format!("#{i}"))),
        FjExpr::Field(r, f) => {
            let t = infer(ct, sigma, gamma, r)?;
            ct.field_index(&t, f).map(|(_, ft)| ft).ok_or(FjTypeError::NoField(t, f.clone()))
        }
        FjExpr::New(c, es) => {
            let fs = ct.fields(c).ok_or_else(|| FjTypeError::UnknownType(c.clone()))?;
            if fs.len() != es.len() {
                return Err(FjTypeError::Arity(e.to_string()));
            }
            for (a, (t, _)) in es.iter().zip(&fs) {
                sub(a, t)?;
            }
            Ok(c.clone())
        }
        FjExpr::Invoke(r, m, es) => {
            let t = infer(ct, sigma, gamma, r)?;
            let (ps, ret) = ct.mtype(&t, m).ok_or(FjTypeError::NoMethod(t, m.clone()))?;
            if ps.len() != es.len() {
                return Err(FjTypeError::Arity(e.to_string()));
            }
            for (a, t) in es.iter().zip(&ps) {
                sub(a, t)?;
            }
            Ok(ret)
        }
        FjExpr::Assign(r, f, v) => {
            let t = infer(ct, sigma, gamma, r)?;
            let (_, ft) = ct.field_index(&t, f).ok_or(FjTypeError::NoField(t, f.clone()))?;
            let vt = infer(ct, sigma, gamma, v)?;
            if ct.subtype(&vt, &ft) { Ok(vt) } else { Err(FjTypeError::NotSubtype(v.to_string(), vt, ft)) }
        }
        FjExpr::Lambda(..) | FjExpr::Cast(..) => Err(FjTypeError::NotInDialect(e.to_string())),
    }
}

/// Every object state has the declared number of fields, each pointing to
/// an object whose class fits the field type.
pub fn memory_well_typed(ct: &ClassTable, mem: &Memory) -> bool {
    mem.iter().all(|s| {
        ct.is_class(&s.class)
            && ct.fields(&s.class).is_some_and(|fs| {
                fs.len() == s.fields.len()
                    && s.fields.iter().zip(&fs).all(|(&i, (t, _))| mem.get(i).is_some_and(|o| ct.subtype(&o.class, t)))
            })
    })
}

/// The memory typing and type of a configuration, if any.
pub fn typecheck_config(ct: &ClassTable, c: &ImpConf) -> Result<(Sigma, Name), FjTypeError> {
    if !memory_well_typed(ct, &c.mem) {
        return Err(FjTypeError::IllTypedValue(format!("{c}")));
    }
    let sigma = sigma_of(&c.mem);
    let t = infer(ct, &sigma, &TypeEnv::new(), &c.expr)?;
    Ok((sigma, t))
}

pub fn class_table_wf(ct: &ClassTable) -> Result<(), Vec<TableError>> {
    wf_with(ct, |class, m| {
        let mut gamma: TypeEnv = m.sig.params.iter().map(|(t, x)| (x.clone(), t.clone())).collect();
        gamma.insert("this".into(), class.clone());
        let t = infer(ct, &Sigma::new(), &gamma, &m.body).map_err(|e| e.to_string())?;
        if ct.subtype(&t, &m.sig.ret) {
            Ok(())
        } else {
            Err(FjTypeError::NotSubtype(m.body.to_string(), t, m.sig.ret.clone()).to_string())
        }
    })
}

/// Configurations indexed by `⟨Σ, T⟩`; a result `⟨μ', ι⟩` belongs to the
/// index when `μ'` is well typed by some `Σ' ⊇ Σ` with `Σ'(ι) <: T`.
#[derive(Clone, Debug)]
pub struct ImperativeTypes {
    pub table: Arc<ClassTable>,
}

impl IndexedPredicate<ImpConf, ImpRes> for ImperativeTypes {
    type Index = (Sigma, Name);

    fn indices_of_config(&self, c: &ImpConf) -> Vec<(Sigma, Name)> {
        let ct = &*self.table;
        match typecheck_config(ct, c) {
            Ok((sigma, t)) => {
                ct.type_names().into_iter().filter(|u| ct.subtype(&t, u)).map(|u| (sigma.clone(), u)).collect()
            }
            Err(_) => vec![],
        }
    }

    fn holds_result(&self, r: &ImpRes, (sigma, t): &(Sigma, Name)) -> bool {
        let ct = &*self.table;
        let extended = sigma_of(&r.mem);
        memory_well_typed(ct, &r.mem)
            && extended.starts_with(sigma)
            && extended.get(r.oid).is_some_and(|c| ct.subtype(c, t))
    }
}

const GRAMMAR: Grammar = Grammar { lambdas: false, casts: false, assigns: true };

/// Closed expressions of depth at most `depth` over the names of the
/// table, typed or not, in the empty memory.
pub fn enumerate_closed(ct: &ClassTable, depth: usize) -> Vec<ImpConf> {
    enumerate_exprs(ct, depth, &[], GRAMMAR, &|_| true).into_iter().map(ImpConf::closed).collect()
}

/// The well-typed part of [`enumerate_closed`], pruning ill-typed
/// subterms during enumeration.
pub fn typed_corpus(ct: &ClassTable, depth: usize) -> Vec<ImpConf> {
    let typable = |e: &FjExpr| infer(ct, &Sigma::new(), &TypeEnv::new(), e).is_ok();
    enumerate_exprs(ct, depth, &[], GRAMMAR, &typable).into_iter().map(ImpConf::closed).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fj::{parse_fj_expr, parse_program, IMPERATIVE_FIXTURE};
    use bsm_core::pet::run_first;

    fn sem() -> ImperativeFj {
        let ct = parse_program(IMPERATIVE_FIXTURE).unwrap().table;
        class_table_wf(&ct).unwrap();
        ImperativeFj::new(ct)
    }

    #[test]
    fn field_update_threads_memory() {
        let s = sem();
        let e = parse_fj_expr("new B(new A()).put(new A())").unwrap();
        let out = run_first(&s, &ImpConf::closed(e), 100);
        let r = out.result().unwrap();
        assert_eq!(r.oid, 2);
        assert_eq!(r.mem[1], ObjState { class: "B".into(), fields: vec![2] });
        let pred = ImperativeTypes { table: s.table.clone() };
        assert_eq!(pred.indices_of_config(&ImpConf::closed(parse_fj_expr("new B(new A()).get()").unwrap()))[1].1, "A");
    }

    #[test]
    fn dangling_identifiers_are_ill_typed() {
        assert!(typecheck_config(&sem().table, &ImpConf::closed(FjExpr::Oid(0))).is_err());
        let mem = vec![ObjState { class: "B".into(), fields: vec![5] }];
        assert!(!memory_well_typed(&sem().table, &mem));
    }
}

use std::collections::{BTreeSet, HashMap, HashSet};

use bsm_core::bigstep::{rule_instances, Judgment, RuleInstance};
use bsm_core::constructions::{
    eval_div, eval_total, eval_trace, eval_wrong, forget_outcome, DivOutcome, TotResult, TotalOutcome,
    TraceOutcome, TraceResult, WrongOutcome,
};
use bsm_core::pet::{
    active_path, check_pet_invariants, divergence_certificate_check, run, run_first, step, tree_leq, Outcome, Pet,
    Strategy as Explore, StuckKind,
};
use bsm_core::soundness::{
    audit_progress, check_progress_implies_may, progress_audit, soundness_may_audit, soundness_must_audit,
    Condition,
};
use bsm_core::{Continuation, LanguageSemantics, StartStep};
use bsm_lang::lambda::*;
use proptest::prelude::*;

type Tree = Pet<Expr, Value, ()>;

fn lr() -> LambdaSemantics {
    LambdaSemantics::new(AppStrategy::LeftToRight)
}

fn p(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn history(sem: &LambdaSemantics, c: &Expr, fuel: usize) -> Vec<Tree> {
    let mut out = vec![Pet::leaf(c.clone())];
    while out.len() <= fuel {
        match step(sem, out.last().unwrap()).into_iter().next() {
            Some(t) => out.push(t),
            None => break,
        }
    }
    out
}

/// `config ⇒ result` labels in prefix order, one string per node.
fn shape(t: &Tree) -> String {
    let kids: Vec<String> = t.children.iter().map(|c| shape(c)).collect();
    let label = format!("{} ⇒ {}", t.config, t.result);
    if kids.is_empty() { label } else { format!("{label} [{}]", kids.join(", ")) }
}

#[test]
fn identity_application_steps_like_the_figure() {
    let c = p("(\\x:nat. x) 5");
    let h = history(&lr(), &c, 100);
    let shapes: Vec<String> = h[1..].iter().map(shape).collect();
    let id = "\\x:nat. x";
    let root = "(\\x:nat. x) 5";
    assert_eq!(
        shapes,
        vec![
            format!("{root} ⇒ ? [{id} ⇒ ?]"),
            format!("{root} ⇒ ? [{id} ⇒ {id}]"),
            format!("{root} ⇒ ? [{id} ⇒ {id}, 5 ⇒ ?]"),
            format!("{root} ⇒ ? [{id} ⇒ {id}, 5 ⇒ 5]"),
            format!("{root} ⇒ ? [{id} ⇒ {id}, 5 ⇒ 5, 5 ⇒ ?]"),
            format!("{root} ⇒ ? [{id} ⇒ {id}, 5 ⇒ 5, 5 ⇒ 5]"),
            format!("{root} ⇒ 5 [{id} ⇒ {id}, 5 ⇒ 5, 5 ⇒ 5]"),
        ]
    );
    let path = active_path(&h[3]).unwrap();
    assert_eq!(path.iter().map(|e| (e.rule, e.premise_index)).collect::<Vec<_>>(), vec![("app", Some(2)), ("start", None)]);
    for w in h.windows(2) {
        assert!(tree_leq(&w[0], &w[1]) && !tree_leq(&w[1], &w[0]));
    }
    assert!(h.iter().all(|t| check_pet_invariants(t).is_ok()));
}

#[test]
fn omega_diverges_and_never_goes_wrong() {
    let o = run_first(&lr(), &omega(), 200);
    let Outcome::Diverges { certificate, steps, tree } = o else { panic!("{o:?}") };
    assert_eq!(steps, 5);
    assert_eq!(active_path(&tree).unwrap().iter().map(|e| e.config.clone()).collect::<Vec<_>>(), vec![omega(), omega()]);
    assert!(certificate.stem.is_empty());
    assert_eq!(certificate.entry(), &omega());
    assert_eq!(divergence_certificate_check(&lr(), &certificate, 200), Ok(()));
    assert_eq!(typecheck(&[], &omega()), Ok(LType::nat()));

    let div = eval_div(&lr(), &omega(), 200, Explore::Exhaustive);
    assert!(matches!(div[..], [DivOutcome::Infinity(_)]));
    let wrong = eval_wrong(&lr(), &omega(), 200, Explore::Exhaustive);
    assert!(matches!(wrong[..], [WrongOutcome::Diverges(_)]));
    let trace = eval_trace(&lr(), &omega(), 200, Explore::First);
    let [TraceOutcome::Result(TraceResult::Inf(t))] = &trace[..] else { panic!("{trace:?}") };
    assert!(t.prefix().is_empty());
    assert_eq!(t.period(), &[omega(), small_omega(), small_omega()]);
    let total = eval_total(&lr(), &omega(), 200, Explore::Exhaustive);
    assert!(matches!(total[..], [TotalOutcome::Infinity(_)]));
}

#[test]
fn wrong_goldens() {
    for (src, kind) in [("0 0", StuckKind::NoContinuation), ("succ (\\x:nat. x)", StuckKind::NoContinuation), ("x", StuckKind::NoRule)] {
        let e = p(src);
        assert_eq!(eval_wrong(&lr(), &e, 100, Explore::Exhaustive), vec![WrongOutcome::Wrong], "{src}");
        let Outcome::Stuck { info, .. } = run_first(&lr(), &e, 100) else { panic!("{src}") };
        assert_eq!(info.kind, kind, "{src}");
    }
    let Outcome::Stuck { info, .. } = run_first(&lr(), &p("0 0"), 100) else { panic!() };
    assert_eq!((info.rule, info.premise_index, info.offending), (Some("app"), Some(1), Some(Value::Nat(0))));
}

#[test]
fn premise_order_changes_what_is_observed() {
    let e = p("Ω (0 0)");
    assert!(matches!(run_first(&lr(), &e, 200), Outcome::Diverges { .. }));
    assert!(matches!(run_first(&LambdaSemantics::new(AppStrategy::RightToLeft), &e, 200), Outcome::Stuck { .. }));
    let e = p("0 Ω");
    assert!(matches!(run_first(&lr(), &e, 200), Outcome::Stuck { .. }));
    let late = LambdaSemantics::new(AppStrategy::Late);
    assert!(matches!(run_first(&late, &e, 200), Outcome::Diverges { .. }));
    let Outcome::Stuck { info, .. } = run_first(&late, &p("0 1"), 200) else { panic!() };
    assert_eq!((info.rule, info.premise_index), (Some("app-late"), Some(3)));
    for s in [AppStrategy::LeftToRight, AppStrategy::RightToLeft, AppStrategy::Late] {
        let o = run_first(&LambdaSemantics::new(s), &p("(\\x:nat. succ x) 2"), 100);
        assert_eq!(o.result(), Some(&Value::Nat(3)));
    }
}

#[test]
fn choice_collects_every_branch() {
    let results: HashSet<Value> =
        run(&lr(), &p("1 (+) 2"), 100, Explore::Exhaustive).iter().filter_map(|o| o.result().cloned()).collect();
    assert_eq!(results, [Value::Nat(1), Value::Nat(2)].into_iter().collect());
    let total: HashSet<_> =
        eval_total(&lr(), &p("Ω (+) 0"), 200, Explore::Exhaustive).iter().filter_map(TotalOutcome::tot_result).collect();
    assert_eq!(total, [TotResult::Infinity, TotResult::Ok(Value::Nat(0))].into_iter().collect());
}

/// Results by direct recursion over the rules, for terminating terms.
fn direct_results(s: AppStrategy, e: &Expr) -> BTreeSet<Value> {
    match e {
        Expr::Nat(_) | Expr::Abs(..) => [e.as_value().unwrap()].into_iter().collect(),
        Expr::Var(_) => BTreeSet::new(),
        Expr::Succ(a) => direct_results(s, a)
            .into_iter()
            .filter_map(|v| match v {
                Value::Nat(n) => Some(Value::Nat(n + 1)),
                _ => None,
            })
            .collect(),
        Expr::Choice(a, b) => direct_results(s, a).into_iter().chain(direct_results(s, b)).collect(),
        Expr::App(f, a) => {
            let mut out = BTreeSet::new();
            for vf in direct_results(s, f) {
                for va in direct_results(s, a) {
                    if let Value::Abs(x, _, body) = &vf {
                        out.extend(direct_results(s, &body.subst(x, &va.to_expr())));
                    }
                }
            }
            out
        }
    }
}

/// Rule instances with the given premise results, written from the rule schemas.
fn direct_instances(
    s: AppStrategy,
    c: &Expr,
    res: &dyn Fn(&Expr) -> Vec<Value>,
) -> HashSet<RuleInstance<Expr, Value>> {
    let j = |c: &Expr, r: &Value| Judgment::new(c.clone(), r.clone());
    let inst = |rule, premises: Vec<Judgment<Expr, Value>>, r: Value| RuleInstance {
        rule,
        premises,
        conclusion: Judgment::new(c.clone(), r),
    };
    let mut out = HashSet::new();
    match c {
        Expr::Nat(_) | Expr::Abs(..) => {
            out.insert(inst("val", vec![], c.as_value().unwrap()));
        }
        Expr::Var(_) => {}
        Expr::Succ(a) => {
            for v in res(a) {
                if let Value::Nat(n) = v {
                    out.insert(inst("succ", vec![j(a, &v)], Value::Nat(n + 1)));
                }
            }
        }
        Expr::Choice(a, b) => {
            for v in res(a) {
                out.insert(inst("choice-1", vec![j(a, &v)], v));
            }
            if a != b {
                for v in res(b) {
                    out.insert(inst("choice-2", vec![j(b, &v)], v));
                }
            }
        }
        Expr::App(f, a) => {
            for vf in res(f) {
                for va in res(a) {
                    let Value::Abs(x, _, body) = &vf else {
                        continue;
                    };
                    let e = body.subst(x, &va.to_expr());
                    for v in res(&e) {
                        let premises = match s {
                            AppStrategy::LeftToRight => vec![j(f, &vf), j(a, &va), j(&e, &v)],
                            AppStrategy::RightToLeft => vec![j(a, &va), j(f, &vf), j(&e, &v)],
                            AppStrategy::Late => vec![j(f, &vf), j(a, &va), j(&vf.to_expr(), &vf), j(&e, &v)],
                        };
                        out.insert(inst(s.rule(), premises, v));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn oracle_is_faithful_on_small_terms() {
    for s in [AppStrategy::LeftToRight, AppStrategy::RightToLeft, AppStrategy::Late] {
        let sem = LambdaSemantics::new(s);
        let res = |e: &Expr| direct_results(s, e).into_iter().collect::<Vec<_>>();
        for c in enumerate_terms(3, true).iter().chain(&enumerate_terms(2, false)) {
            assert_eq!(rule_instances(&sem, c, &res), direct_instances(s, c, &res), "{c} under {s:?}");
            let bound = sem.premise_bound(c);
            assert!(rule_instances(&sem, c, &res).iter().all(|i| i.premises.len() <= bound));
        }
    }
}

#[test]
fn equal_prefixes_share_one_activation() {
    let sem = lr();
    for c in enumerate_terms(3, true) {
        let mut seen: HashMap<(Vec<Judgment<Expr, Value>>, Expr), _> = HashMap::new();
        let mut todo: Vec<_> = sem
            .start(&c)
            .into_iter()
            .filter_map(|s| match s {
                StartStep::FirstPremise(a) => Some(a),
                _ => None,
            })
            .collect();
        while let Some(a) = todo.pop() {
            let key = (a.completed.clone(), a.demanded.clone());
            if let Some(prev) = seen.insert(key, a.clone()) {
                assert_eq!(prev, a, "{c}");
            }
            for v in direct_results(AppStrategy::LeftToRight, &a.demanded) {
                for k in sem.advance(&a, &v) {
                    if let Continuation::Demand(b) = k {
                        todo.push(b);
                    }
                }
            }
        }
    }
}

fn wrong_direct(e: &Expr) -> BTreeSet<Option<Value>> {
    let wrong = || [None].into_iter().collect::<BTreeSet<_>>();
    match e {
        Expr::Nat(_) | Expr::Abs(..) => [e.as_value()].into_iter().collect(),
        Expr::Var(_) => wrong(),
        Expr::Succ(a) => wrong_direct(a)
            .into_iter()
            .map(|r| match r {
                Some(Value::Nat(n)) => Some(Value::Nat(n + 1)),
                _ => None,
            })
            .collect(),
        Expr::Choice(a, b) => wrong_direct(a).into_iter().chain(wrong_direct(b)).collect(),
        Expr::App(f, a) => {
            let mut out = BTreeSet::new();
            for rf in wrong_direct(f) {
                let Some(Value::Abs(x, _, body)) = rf else {
                    out.insert(None);
                    continue;
                };
                for ra in wrong_direct(a) {
                    match ra {
                        None => {
                            out.insert(None);
                        }
                        Some(va) => out.extend(wrong_direct(&body.subst(&x, &va.to_expr()))),
                    }
                }
            }
            out
        }
    }
}

fn trace_direct(e: &Expr) -> BTreeSet<Option<(Vec<Expr>, Value)>> {
    let here = |mut rest: Vec<Expr>| {
        rest.insert(0, e.clone());
        rest
    };
    match e {
        Expr::Nat(_) | Expr::Abs(..) => [Some((vec![e.clone()], e.as_value().unwrap()))].into_iter().collect(),
        Expr::Var(_) => [None].into_iter().collect(),
        Expr::Succ(a) => trace_direct(a)
            .into_iter()
            .map(|r| match r {
                Some((t, Value::Nat(n))) => Some((here(t), Value::Nat(n + 1))),
                _ => None,
            })
            .collect(),
        Expr::Choice(a, b) => trace_direct(a)
            .into_iter()
            .chain(trace_direct(b))
            .map(|r| r.map(|(t, v)| (here(t), v)))
            .collect(),
        Expr::App(f, a) => {
            let mut out = BTreeSet::new();
            for rf in trace_direct(f) {
                let Some((tf, Value::Abs(x, _, body))) = rf else {
                    out.insert(None);
                    continue;
                };
                for ra in trace_direct(a) {
                    let Some((ta, va)) = ra else {
                        out.insert(None);
                        continue;
                    };
                    for rb in trace_direct(&body.subst(&x, &va.to_expr())) {
                        out.insert(rb.map(|(tb, v)| {
                            let mut t = tf.clone();
                            t.extend(ta.iter().cloned());
                            t.extend(tb);
                            (here(t), v)
                        }));
                    }
                }
            }
            out
        }
    }
}

#[test]
fn constructions_match_direct_derivation_search() {
    let sem = lr();
    for c in enumerate_terms(2, true).iter().chain(&enumerate_terms(2, false)) {
        let wrong: BTreeSet<Option<Value>> = eval_wrong(&sem, c, 200, Explore::Exhaustive)
            .into_iter()
            .map(|o| match o {
                WrongOutcome::Ok(v) => Some(v),
                WrongOutcome::Wrong => None,
                o => panic!("{c}: {o:?}"),
            })
            .collect();
        assert_eq!(wrong, wrong_direct(c), "{c}");
        let trace: BTreeSet<_> = eval_trace(&sem, c, 200, Explore::Exhaustive)
            .into_iter()
            .map(|o| match o {
                TraceOutcome::Result(TraceResult::Fin(t, v)) => Some((t, v)),
                TraceOutcome::Stuck(_) => None,
                o => panic!("{c}: {o:?}"),
            })
            .collect();
        assert_eq!(trace, trace_direct(c), "{c}");
    }
}

#[test]
fn typed_terms_are_sound_and_counterexamples_are_caught() {
    let corpus = enumerate_terms(2, true);
    let must = soundness_must_audit(&lr(), &SimpleTypes::default(), &corpus, 200);
    assert!(must.passed(), "{:?}", must.violations);
    assert!(must.stats.audited > 0 && must.stats.skipped > 0);
    let may = soundness_may_audit(&lr(), &SimpleTypes::default(), &corpus, 200);
    assert!(may.passed());
    let progress = progress_audit(&lr(), &SimpleTypes::default(), &corpus, 200);
    assert_eq!(check_progress_implies_may(&progress, &may), Ok(()));

    let dropped = LambdaSemantics { strategy: AppStrategy::LeftToRight, drop_succ: true };
    let v = audit_progress(&dropped, &SimpleTypes::default(), &p("succ 2"), 100);
    let [violation] = v.violations() else { panic!("{v:?}") };
    assert_eq!((violation.condition, &violation.at), (Condition::ExistsP, &p("succ 2")));

    let fool = SimpleTypes { fool: true };
    let v = audit_progress(&lr(), &fool, &p("0 0"), 100);
    let [violation] = v.violations() else { panic!("{v:?}") };
    assert_eq!(violation.condition, Condition::ForallP);
    assert_eq!((violation.rule, violation.premise_index), (Some("app"), Some(1)));
    assert_eq!(violation.offending, Some(Value::Nat(0)));
}

fn ltype() -> impl proptest::strategy::Strategy<Value = LType> {
    let leaf = prop_oneof![Just(LType::nat()), Just(omega_type())];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LType::arrow(&a, &b)),
            inner.prop_map(|t| LType::self_arrow(&t)),
        ]
    })
}

fn expr() -> impl proptest::strategy::Strategy<Value = Expr> {
    let leaf = prop_oneof![(0u64..4).prop_map(Expr::Nat), prop_oneof![Just("x"), Just("y")].prop_map(var)];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just("x"), Just("y")], ltype(), inner.clone()).prop_map(|(x, t, b)| abs(x, t, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| app(a, b)),
            inner.clone().prop_map(succ),
            (inner.clone(), inner).prop_map(|(a, b)| choice(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn printing_round_trips(e in expr()) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e.clone());
        prop_assert_eq!(parse_expr(&e.show_abbrev()).unwrap(), e);
    }

    #[test]
    fn types_round_trip(t in ltype()) {
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t.clone());
        prop_assert!(type_equal(&t, &t));
    }

    #[test]
    fn well_typed_terms_do_not_go_wrong(e in expr()) {
        if e.is_closed() && typecheck(&[], &e).is_ok() {
            for o in eval_wrong(&lr(), &e, 300, Explore::Exhaustive) {
                prop_assert!(o != WrongOutcome::Wrong, "{}", e);
            }
        }
    }

    #[test]
    fn forgetting_traces_agrees_with_divergence(e in expr()) {
        let a: HashSet<_> = eval_trace(&lr(), &e, 100, Explore::Exhaustive).iter().map(forget_outcome).collect();
        let b: HashSet<_> = eval_div(&lr(), &e, 100, Explore::Exhaustive).iter().map(DivOutcome::inf_result).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn parse_print_round_trips_on_the_corpus() {
    for e in enumerate_terms(3, true).iter().chain(&enumerate_terms(2, false)) {
        assert_eq!(&parse_expr(&e.to_string()).unwrap(), e);
    }
}

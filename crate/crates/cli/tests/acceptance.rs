//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use bsm_core::constructions::{
    eval_div, eval_total, eval_trace, eval_wrong, forget_outcome, DivOutcome, DivSemantics, InfResult,
    TotalOutcome, TotalSemantics, TraceOutcome, TraceResult, TraceSemantics, WrongOutcome, WrongSemantics,
};
use bsm_core::inference::{
    interp_coinductive, interp_corules, interp_inductive, max_elem_system, reachable_universe, GeneralizedSystem,
    InferenceSystem, MaxElem, RationalList, Universe,
};
use bsm_core::pet::{
    check_pet_invariants, divergence_certificate_check, run_observed, step, tree_leq,
    DivergenceCertificate, Outcome, Pet, PetOf, Strategy, UnResult,
};
use bsm_core::soundness::{
    check_progress_implies_may, progress_audit, soundness_may_audit, soundness_must_audit, Condition,
    IndexedPredicate,
};
use bsm_core::LanguageSemantics;
use bsm_lang::fj::imperative::{self, ImpConf, ImperativeFj, ImperativeTypes};
use bsm_lang::fj::minifj::{self, FjValue, MiniConf, MiniFj, MiniFjTypes};
use bsm_lang::fj::{parse_fj_expr, parse_program, ClassTable, FjExpr, FJ_LAMBDA_FIXTURE, IMPERATIVE_FIXTURE, LOOP_FIXTURE};
use bsm_lang::lambda::{
    enumerate_terms, omega, parse_expr, small_omega, AppStrategy, Expr, LambdaSemantics, SimpleTypes, Value,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const FUEL: usize = 200;

type Criterion = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

/// Trees and certificates seen by earlier criteria, checked by later ones.
#[derive(Default)]
struct Seen {
    trees: usize,
    bad_tree: Option<String>,
    certificates: usize,
    bad_certificate: Option<String>,
}

impl Seen {
    fn tree<C: Clone + Eq + std::fmt::Debug, R: Clone + Eq, B: Clone>(&mut self, t: &Pet<C, R, B>) {
        self.trees += 1;
        if self.bad_tree.is_none() {
            if let Err(e) = check_pet_invariants(t) {
                self.bad_tree = Some(format!("{e} in tree rooted at {:?}", t.config));
            }
        }
    }

    fn certificate<L: LanguageSemantics>(&mut self, sem: &L, cert: &DivergenceCertificate<L::Config, L::Res>)
    where
        L::Config: std::fmt::Debug,
    {
        self.certificates += 1;
        if self.bad_certificate.is_none() {
            if let Err(e) = divergence_certificate_check(sem, cert, FUEL) {
                self.bad_certificate = Some(format!("{e} for {:?}", cert.entry()));
            }
        }
    }

    /// Runs `c`, recording every tree and every certificate.
    fn run<L: LanguageSemantics>(&mut self, sem: &L, c: &L::Config, strategy: Strategy) -> Vec<Outcome<L::Config, L::Res, L::Bindings>>
    where
        L::Config: std::fmt::Debug,
    {
        let outs = run_observed(sem, c, FUEL, strategy, &mut |t| self.tree(t));
        for o in &outs {
            if let Outcome::Diverges { certificate, .. } = o {
                self.certificate(sem, certificate);
            }
        }
        outs
    }
}

fn lr() -> LambdaSemantics {
    LambdaSemantics::new(AppStrategy::LeftToRight)
}

fn p(s: &str) -> Expr {
    parse_expr(s).expect("fixture parses")
}

/// A tree as `config ⇒ result [children]`, with configurations renamed.
fn skeleton<B>(t: &Pet<Expr, Value, B>, name: &dyn Fn(&Expr) -> String) -> String {
    let res = match &t.result {
        UnResult::Known(v) => name(&v.to_expr()),
        UnResult::Unknown => "?".into(),
    };
    let label = format!("{} ⇒ {}", name(&t.config), res);
    if t.children.is_empty() {
        return label;
    }
    let kids: Vec<String> = t.children.iter().map(|c| skeleton(c, name)).collect();
    format!("{label} [{}]", kids.join(", "))
}

fn fig5_golden(seen: &mut Seen) -> Criterion {
    let sem = lr();
    let root = p("(\\x:nat. x) 3");
    let id = p("\\x:nat. x");
    let name = |e: &Expr| {
        if *e == root {
            "(λx.x) n".to_string()
        } else if *e == id {
            "λx.x".to_string()
        } else if *e == Expr::Nat(3) {
            "n".to_string()
        } else {
            format!("{e}")
        }
    };
    let mut trees: Vec<PetOf<LambdaSemantics>> = Vec::new();
    let outs = run_observed(&sem, &root, 100, Strategy::First, &mut |t| {
        seen.tree(t);
        trees.push(t.clone());
    });
    let [Outcome::Converged { result, steps, .. }] = &outs[..] else {
        return Err(format!("expected one converged outcome, got {outs:?}"));
    };
    ensure(*result == Value::Nat(3), || format!("result {result}"))?;
    ensure(*steps == 7, || format!("{steps} transitions"))?;
    let got: Vec<String> = trees.iter().map(|t| skeleton(t, &name)).collect();
    let (r, f) = ("(λx.x) n", "λx.x");
    let expected = vec![
        format!("{r} ⇒ ?"),
        format!("{r} ⇒ ? [{f} ⇒ ?]"),
        format!("{r} ⇒ ? [{f} ⇒ {f}]"),
        format!("{r} ⇒ ? [{f} ⇒ {f}, n ⇒ ?]"),
        format!("{r} ⇒ ? [{f} ⇒ {f}, n ⇒ n]"),
        format!("{r} ⇒ ? [{f} ⇒ {f}, n ⇒ n, n ⇒ ?]"),
        format!("{r} ⇒ ? [{f} ⇒ {f}, n ⇒ n, n ⇒ n]"),
        format!("{r} ⇒ n [{f} ⇒ {f}, n ⇒ n, n ⇒ n]"),
    ];
    ensure(got == expected, || format!("sequence differs: {got:#?}"))?;
    Ok("7 transitions, 8 trees match".into())
}

fn omega_triple(seen: &mut Seen) -> Criterion {
    let sem = lr();
    let div = eval_div(&sem, &omega(), FUEL, Strategy::Exhaustive);
    let [DivOutcome::Infinity(cert)] = &div[..] else {
        return Err(format!("eval_div(Ω) = {div:?}"));
    };
    seen.certificate(&sem, cert);
    let trace = eval_trace(&sem, &omega(), FUEL, Strategy::Exhaustive);
    let [TraceOutcome::Result(TraceResult::Inf(t))] = &trace[..] else {
        return Err(format!("eval_trace(Ω) = {trace:?}"));
    };
    let period = [omega(), small_omega(), small_omega()];
    ensure(t.prefix().is_empty() && t.period() == period, || format!("trace {t}"))?;
    let wrong = eval_wrong(&sem, &omega(), FUEL, Strategy::Exhaustive);
    ensure(!wrong.contains(&WrongOutcome::Wrong), || format!("eval_wrong(Ω) = {wrong:?}"))?;
    for o in &wrong {
        if let WrongOutcome::Diverges(c) = o {
            seen.certificate(&sem, c);
        }
    }
    seen.run(&sem, &omega(), Strategy::Exhaustive);
    Ok("∞ only; period [Ω, ω, ω]; never wrong".into())
}

fn wrong_goldens(seen: &mut Seen) -> Criterion {
    let sem = lr();
    let cases = [("0 0", Some("app"), Some(1)), ("succ (\\x:nat. x)", Some("succ"), Some(1)), ("x", None, None)];
    for (src, rule, premise) in cases {
        let e = p(src);
        let w = eval_wrong(&sem, &e, FUEL, Strategy::Exhaustive);
        ensure(w == vec![WrongOutcome::Wrong], || format!("{src}: {w:?}"))?;
        let outs = seen.run(&sem, &e, Strategy::Exhaustive);
        let [Outcome::Stuck { info, .. }] = &outs[..] else {
            return Err(format!("{src}: base run {outs:?}"));
        };
        ensure(info.rule == rule && info.premise_index == premise, || format!("{src}: stuck at {info:?}"))?;
        run_observed(&WrongSemantics(&sem), &e, FUEL, Strategy::Exhaustive, &mut |t| seen.tree(t));
    }
    Ok("0 0, succ(λ), free variable".into())
}

fn max_elem() -> Criterion {
    let sys = max_elem_system();
    let l = RationalList::new(vec![], vec![1, 2]);
    let goals: Vec<MaxElem> = [1, 2, 5].iter().map(|&n| MaxElem::new(l.clone(), n)).collect();
    let u = reachable_universe(&sys.with_corules(), goals.clone(), 10_000).map_err(|e| e.to_string())?;
    let flex = interp_corules(&sys, &u);
    let co = interp_coinductive(&sys.rules, &u);
    let [one, two, five] = &goals[..] else { unreachable!() };
    ensure(flex.contains(two), || "corules reject maxElem(L, 2)".into())?;
    ensure(!flex.contains(five) && !flex.contains(one), || "corules accept a wrong maximum".into())?;
    ensure(co.contains(two) && co.contains(five), || "coinduction misses 2 or 5".into())?;
    Ok(format!("|U| = {}", u.len()))
}

fn ok_set<T: Ord>(items: impl IntoIterator<Item = Option<T>>) -> BTreeSet<T> {
    items.into_iter().flatten().collect()
}

fn conservativity(corpus: &[Expr], seen: &mut Seen) -> Criterion {
    let sem = lr();
    let mut bad = Vec::new();
    for c in corpus {
        let base = seen.run(&sem, c, Strategy::Exhaustive);
        let want: BTreeSet<Value> = ok_set(base.iter().map(|o| o.result().cloned()));
        let wrong = eval_wrong(&sem, c, FUEL, Strategy::Exhaustive);
        let div = eval_div(&sem, c, FUEL, Strategy::Exhaustive);
        let trace = eval_trace(&sem, c, FUEL, Strategy::Exhaustive);
        let total = eval_total(&sem, c, FUEL, Strategy::Exhaustive);
        for o in &wrong {
            if let WrongOutcome::Diverges(cert) = o {
                seen.certificate(&sem, cert);
            }
        }
        for o in &div {
            if let DivOutcome::Infinity(cert) = o {
                seen.certificate(&sem, cert);
            }
        }
        for o in &total {
            if let TotalOutcome::Infinity(cert) = o {
                seen.certificate(&sem, cert);
            }
        }
        let projections = [
            ok_set(wrong.iter().map(|o| match o {
                WrongOutcome::Ok(v) => Some(v.clone()),
                _ => None,
            })),
            ok_set(div.iter().map(|o| match o {
                DivOutcome::Ok(v) => Some(v.clone()),
                _ => None,
            })),
            ok_set(trace.iter().map(|o| match forget_outcome(o) {
                Some(InfResult::Ok(v)) => Some(v),
                _ => None,
            })),
            ok_set(total.iter().map(|o| match o {
                TotalOutcome::Ok(v) => Some(v.clone()),
                _ => None,
            })),
        ];
        if projections.iter().any(|s| *s != want) {
            bad.push(c.clone());
        }
    }
    ensure(bad.is_empty(), || format!("{} discrepancies, first {}", bad.len(), bad[0]))?;
    Ok(format!("{} terms, 0 discrepancies", corpus.len()))
}

/// Outcome shape shared by the divergence and forgetful trace semantics.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Shape {
    Ok(Value),
    Infinity,
    Stuck,
    OutOfFuel,
}

fn abstraction_square(corpus: &[Expr]) -> Criterion {
    let sem = lr();
    let mut bad = Vec::new();
    for c in corpus {
        let div: BTreeSet<Shape> = eval_div(&sem, c, FUEL, Strategy::Exhaustive)
            .into_iter()
            .map(|o| match o {
                DivOutcome::Ok(v) => Shape::Ok(v),
                DivOutcome::Infinity(_) => Shape::Infinity,
                DivOutcome::NoJudgment(_) => Shape::Stuck,
                DivOutcome::OutOfFuel => Shape::OutOfFuel,
            })
            .collect();
        let trace: BTreeSet<Shape> = eval_trace(&sem, c, FUEL, Strategy::Exhaustive)
            .iter()
            .map(|o| match (o, forget_outcome(o)) {
                (_, Some(InfResult::Ok(v))) => Shape::Ok(v),
                (_, Some(InfResult::Infinity)) => Shape::Infinity,
                (TraceOutcome::Stuck(_), None) => Shape::Stuck,
                _ => Shape::OutOfFuel,
            })
            .collect();
        if div != trace {
            bad.push(c.clone());
        }
    }
    ensure(bad.is_empty(), || format!("{} discrepancies, first {}", bad.len(), bad[0]))?;
    Ok(format!("{} terms, 0 discrepancies", corpus.len()))
}

type Tree = PetOf<LambdaSemantics>;

fn first_history(sem: &LambdaSemantics, c: &Expr, fuel: usize) -> Vec<Tree> {
    let mut h = vec![Pet::leaf(c.clone())];
    while h.len() <= fuel {
        match step(sem, h.last().expect("nonempty")).into_iter().next() {
            Some(t) => h.push(t),
            None => break,
        }
    }
    h
}

/// Breadth-first search for `target` among the trees reachable from `t`.
fn reachable(sem: &LambdaSemantics, t: &Tree, target: &Tree, fuel: usize) -> bool {
    let mut seen = HashSet::new();
    let mut todo = VecDeque::from([(t.clone(), 0)]);
    while let Some((u, d)) = todo.pop_front() {
        if u == *target {
            return true;
        }
        if d < fuel {
            for s in step(sem, &u) {
                if seen.insert(s.clone()) {
                    todo.push_back((s, d + 1));
                }
            }
        }
    }
    false
}

fn order_laws(corpus: &[Expr], seen: &mut Seen) -> Criterion {
    let sem = lr();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let fuel = 60;
    let (mut steps, mut pairs) = (0, 0);
    while steps < 1000 {
        let c = &corpus[rng.gen_range(0..corpus.len())];
        let h = first_history(&sem, c, fuel);
        let t = &h[rng.gen_range(0..h.len())];
        let succs = step(&sem, t);
        if succs.is_empty() {
            continue;
        }
        let s = &succs[rng.gen_range(0..succs.len())];
        seen.tree(t);
        seen.tree(s);
        ensure(tree_leq(t, s) && !tree_leq(s, t), || format!("step from {} is not strictly above", t.config))?;
        steps += 1;
    }
    while pairs < 200 {
        let c = &corpus[rng.gen_range(0..corpus.len())];
        let h = first_history(&sem, c, fuel);
        if h.len() < 2 {
            continue;
        }
        let i = rng.gen_range(0..h.len() - 1);
        let j = rng.gen_range(i + 1..h.len());
        ensure(tree_leq(&h[i], &h[j]), || format!("history of {c} is not increasing"))?;
        ensure(reachable(&sem, &h[i], &h[j], fuel), || format!("{c}: tree {j} not reachable from tree {i}"))?;
        pairs += 1;
    }
    Ok(format!("{steps} step pairs, {pairs} history pairs"))
}

fn pet_invariants(corpus: &[Expr], seen: &mut Seen) -> Criterion {
    let sem = lr();
    for c in corpus {
        for strategy in [Strategy::First, Strategy::Exhaustive] {
            run_observed(&WrongSemantics(&sem), c, FUEL, strategy, &mut |t| seen.tree(t));
            run_observed(&DivSemantics(&sem), c, FUEL, strategy, &mut |t| seen.tree(t));
            run_observed(&TraceSemantics(&sem), c, FUEL, strategy, &mut |t| seen.tree(t));
            run_observed(&TotalSemantics(&sem), c, FUEL, strategy, &mut |t| seen.tree(t));
        }
    }
    if let Some(e) = &seen.bad_tree {
        return Err(e.clone());
    }
    Ok(format!("{} trees", seen.trees))
}

fn lambda_soundness(corpus: &[Expr], seen: &mut Seen) -> Criterion {
    let sem = lr();
    let pred = SimpleTypes::default();
    let must = soundness_must_audit(&sem, &pred, corpus, FUEL);
    ensure(must.passed(), || format!("typed corpus: {:?}", must.violations.first()))?;
    ensure(must.stats.audited > 0, || "nothing audited".into())?;
    let may = soundness_may_audit(&sem, &pred, corpus, FUEL);
    let progress = progress_audit(&sem, &pred, corpus, FUEL);
    ensure(may.passed(), || "may audit failed".into())?;
    check_progress_implies_may(&progress, &may).map_err(|bad| format!("progress without may at {}", bad[0]))?;

    let dropped = LambdaSemantics { strategy: AppStrategy::LeftToRight, drop_succ: true };
    let report = soundness_must_audit(&dropped, &pred, corpus, FUEL);
    let at_succ = |e: &Expr| matches!(e, Expr::Succ(n) if matches!(**n, Expr::Nat(_)));
    let exists: Vec<_> = report.violations.iter().filter(|v| v.condition == Condition::ExistsP).collect();
    ensure(!exists.is_empty(), || "dropped succ: no ∃P violation".into())?;
    ensure(exists.iter().any(|v| at_succ(&v.at)), || "dropped succ: no ∃P violation at succ n".into())?;
    ensure(exists.iter().all(|v| matches!(v.at, Expr::Succ(_))), || "dropped succ: ∃P away from succ".into())?;

    let fool = SimpleTypes { fool: true };
    let report = soundness_must_audit(&sem, &fool, corpus, FUEL);
    let forall: Vec<_> = report.violations.iter().filter(|v| v.condition == Condition::ForallP).collect();
    ensure(!forall.is_empty(), || "fool rule: no ∀P violation".into())?;
    ensure(
        forall.iter().all(|v| v.rule == Some("app") && v.premise_index == Some(1)),
        || format!("fool rule: misattributed {:?}", forall.iter().find(|v| v.rule != Some("app"))),
    )?;
    for c in corpus.iter().step_by(7) {
        seen.run(&sem, c, Strategy::Exhaustive);
    }
    Ok(format!(
        "{} audited, 0 violations; ∃P at succ n ({}); ∀P at app premise 1 ({})",
        must.stats.audited,
        exists.len(),
        forall.len()
    ))
}

fn table(src: &str) -> ClassTable {
    parse_program(src).expect("fixture parses").table
}

fn fj(s: &str) -> FjExpr {
    parse_fj_expr(s).expect("fixture parses")
}

fn fj_goldens(seen: &mut Seen) -> Criterion {
    let ct = table(FJ_LAMBDA_FIXTURE);
    minifj::class_table_wf(&ct).map_err(|e| format!("{e:?}"))?;
    let sem = MiniFj::new(ct.clone());
    let pred = MiniFjTypes { table: sem.table.clone() };

    let c = MiniConf::closed(fj("new C(<I> \\x. x)"));
    let outs = seen.run(&sem, &c, Strategy::First);
    let v = outs.first().and_then(|o| o.result()).ok_or("new C(<I> λx.x) does not converge")?;
    ensure(v.to_string() == "obj C(\\x. x)", || format!("evaluates to {v}"))?;
    let types = minifj::typecheck_config(&ct, &c).map_err(|e| e.to_string())?;
    ensure(types.contains(&"C".to_string()), || format!("types {types:?}"))?;
    ensure(pred.holds_result(v, &"C".into()), || "result not typed at C".into())?;
    let bare = MiniConf::closed(fj("new C(\\x. x)"));
    ensure(minifj::typecheck_config(&ct, &bare).is_err(), || "new C(λx.x) accepted".into())?;
    let d = MiniConf::closed(fj("new D().m(\\x. x)"));
    let types = minifj::typecheck_config(&ct, &d).map_err(|e| e.to_string())?;
    ensure(types.contains(&"D".to_string()), || format!("new D().m(λx.x) types {types:?}"))?;
    ensure(
        seen.run(&sem, &d, Strategy::First).first().and_then(|o| o.result()) == Some(&FjValue::Obj("D".into(), vec![])),
        || "new D().m(λx.x) does not evaluate to obj D()".into(),
    )?;

    let ct = table(IMPERATIVE_FIXTURE);
    imperative::class_table_wf(&ct).map_err(|e| format!("{e:?}"))?;
    let sem = ImperativeFj::new(ct.clone());
    let pred = ImperativeTypes { table: sem.table.clone() };
    let corpus = imperative::typed_corpus(&ct, 3);
    ensure(!corpus.is_empty(), || "empty imperative corpus".into())?;
    for c in &corpus {
        let w = eval_wrong(&sem, c, FUEL, Strategy::Exhaustive);
        ensure(!w.contains(&bsm_core::constructions::WrongOutcome::Wrong), || format!("{c} goes wrong"))?;
        seen.run(&sem, c, Strategy::Exhaustive);
    }
    let must = soundness_must_audit(&sem, &pred, &corpus, FUEL);
    ensure(must.passed(), || format!("imperative: {:?}", must.violations.first()))?;
    Ok(format!("goldens hold; {} typed imperative terms, 0 wrong, preservation holds", corpus.len()))
}

fn certificates(seen: &mut Seen) -> Criterion {
    // Divergent FJ programs and the larger typed corpora.
    let ct = table(&format!("{FJ_LAMBDA_FIXTURE}{LOOP_FIXTURE}"));
    let sem = MiniFj::new(ct.clone());
    let pred = MiniFjTypes { table: sem.table.clone() };
    let corpus: Vec<MiniConf> = minifj::typed_corpus(&ct, 4);
    for c in corpus.iter().chain([&MiniConf::closed(fj("new L().loop()"))]) {
        seen.run(&sem, c, Strategy::Exhaustive);
    }
    let may = soundness_may_audit(&sem, &pred, &corpus, FUEL);
    let progress = progress_audit(&sem, &pred, &corpus, FUEL);
    check_progress_implies_may(&progress, &may).map_err(|bad| format!("MiniFJ: progress without may at {}", bad[0]))?;

    let ct = table(&format!("{IMPERATIVE_FIXTURE}{LOOP_FIXTURE}"));
    let sem = ImperativeFj::new(ct.clone());
    let pred = ImperativeTypes { table: sem.table.clone() };
    let corpus: Vec<ImpConf> = imperative::typed_corpus(&ct, 4);
    for c in &corpus {
        seen.run(&sem, c, Strategy::Exhaustive);
    }
    let may = soundness_may_audit(&sem, &pred, &corpus, FUEL);
    let progress = progress_audit(&sem, &pred, &corpus, FUEL);
    check_progress_implies_may(&progress, &may).map_err(|bad| format!("imperative: progress without may at {}", bad[0]))?;

    let lambda = enumerate_terms(3, true);
    let sem = lr();
    for pred in [SimpleTypes::default(), SimpleTypes { fool: true }] {
        let may = soundness_may_audit(&sem, &pred, &lambda, FUEL);
        let progress = progress_audit(&sem, &pred, &lambda, FUEL);
        check_progress_implies_may(&progress, &may).map_err(|bad| format!("λ: progress without may at {}", bad[0]))?;
    }
    let dropped = LambdaSemantics { strategy: AppStrategy::LeftToRight, drop_succ: true };
    let may = soundness_may_audit(&dropped, &SimpleTypes::default(), &lambda, FUEL);
    let progress = progress_audit(&dropped, &SimpleTypes::default(), &lambda, FUEL);
    check_progress_implies_may(&progress, &may).map_err(|bad| format!("dropped succ: progress without may at {}", bad[0]))?;

    if let Some(e) = &seen.bad_certificate {
        return Err(e.clone());
    }
    ensure(seen.certificates > 0, || "no certificate produced".into())?;
    if let Some(e) = &seen.bad_tree {
        return Err(e.clone());
    }
    Ok(format!("{} certificates check; progress ⇒ may on 5 corpora", seen.certificates))
}

#[derive(Clone, Debug)]
struct Table(Vec<Vec<Vec<u8>>>);

impl InferenceSystem for Table {
    type Judgment = u8;

    fn premise_candidates(&self, j: &u8) -> Vec<Vec<u8>> {
        self.0.get(*j as usize).cloned().unwrap_or_default()
    }
}

fn random_table(rng: &mut StdRng, n: usize, max_rules: usize) -> Table {
    Table(
        (0..n)
            .map(|_| {
                (0..rng.gen_range(0..=max_rules))
                    .map(|_| (0..n as u8).filter(|_| rng.gen_bool(0.3)).collect())
                    .collect()
            })
            .collect(),
    )
}

fn fixpoint_oracles() -> Criterion {
    let mut rng = StdRng::seed_from_u64(12);
    for round in 0..5 {
        let n = rng.gen_range(4..=8);
        let rules = random_table(&mut rng, n, 3);
        let corules = random_table(&mut rng, n, 2);
        let u: Universe<u8> = (0..n as u8).collect();
        let subsets: Vec<HashSet<u8>> =
            (0u32..1 << n).map(|m| (0..n as u8).filter(|&i| m & (1 << i) != 0).collect()).collect();
        let fires = |t: &Table, j: u8, x: &HashSet<u8>| t.premise_candidates(&j).iter().any(|ps| ps.iter().all(|q| x.contains(q)));
        let closed = |t: &Table, x: &HashSet<u8>| (0..n as u8).all(|j| x.contains(&j) || !fires(t, j, x));
        let consistent = |t: &Table, x: &HashSet<u8>| x.iter().all(|&j| fires(t, j, x));
        // Least closed set is the intersection of all closed sets; greatest
        // consistent set the union of all consistent ones.
        let lfp = |t: &Table| {
            subsets.iter().filter(|x| closed(t, x)).fold(u.clone(), |acc, x| acc.intersection(x).copied().collect())
        };
        let gfp_within = |t: &Table, bound: &HashSet<u8>| {
            subsets
                .iter()
                .filter(|x| x.is_subset(bound) && consistent(t, x))
                .fold(HashSet::new(), |acc, x| acc.union(x).copied().collect())
        };
        let both = Table(rules.0.iter().zip(&corules.0).map(|(a, b)| a.iter().chain(b).cloned().collect()).collect());
        ensure(interp_inductive(&rules, &u) == lfp(&rules), || format!("system {round}: inductive differs"))?;
        ensure(interp_coinductive(&rules, &u) == gfp_within(&rules, &u), || format!("system {round}: coinductive differs"))?;
        let flex = interp_corules(&GeneralizedSystem::new(rules.clone(), corules), &u);
        ensure(flex == gfp_within(&rules, &lfp(&both)), || format!("system {round}: corules differ"))?;
    }
    Ok("5 systems agree with subset enumeration".into())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut seen = Seen::default();
    let corpus = enumerate_terms(3, true);
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut(&mut Seen) -> Criterion, seen: &mut Seen| {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(|| f(seen))).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} ({secs:.1}s)");
            }
        }
    };
    report(1, "identity application golden run", &mut fig5_golden, &mut seen);
    report(2, "Ω divergence, trace and wrong", &mut omega_triple, &mut seen);
    report(3, "wrong goldens", &mut wrong_goldens, &mut seen);
    report(4, "maxElem with corules", &mut |_| max_elem(), &mut seen);
    report(5, "conservativity of the constructions", &mut |s| conservativity(&corpus, s), &mut seen);
    report(6, "trace abstraction square", &mut |_| abstraction_square(&corpus), &mut seen);
    report(7, "stepper order laws", &mut |s| order_laws(&corpus, s), &mut seen);
    report(8, "partial tree invariants", &mut |s| pet_invariants(&corpus, s), &mut seen);
    report(9, "λ soundness audits", &mut |s| lambda_soundness(&corpus, s), &mut seen);
    report(10, "FJ goldens and imperative corpus", &mut fj_goldens, &mut seen);
    report(11, "divergence certificates and progress ⇒ may", &mut certificates, &mut seen);
    report(12, "fixpoints against brute force", &mut |_| fixpoint_oracles(), &mut seen);
    let secs = started.elapsed().as_secs_f64();
    println!("{} of 12 criteria passed in {secs:.1}s", 12 - failed);
    if failed == 0 && secs < 60.0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

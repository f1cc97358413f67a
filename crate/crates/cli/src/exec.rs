use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use bsm_core::constructions::{
    eval_div, eval_total, eval_trace, eval_wrong, DivOutcome, TotalOutcome, TraceOutcome, TraceResult, WrongOutcome,
};
use bsm_core::inference::{
    interp_coinductive, interp_corules, interp_inductive, max_elem_system, reachable_universe, MaxElem, RationalList,
};
use bsm_core::pet::{run, run_observed, Outcome, Strategy};
use bsm_core::soundness::{
    check_progress_implies_may, progress_audit, soundness_may_audit, soundness_must_audit, IndexedPredicate,
};
use bsm_lang::fj::imperative::{self, ImpConf, ImperativeFj, ImperativeTypes};
use bsm_lang::fj::minifj::{self, MiniConf, MiniFj, MiniFjTypes};
use bsm_lang::fj::{parse_program, ClassTable, Program, FJ_LAMBDA_FIXTURE, IMPERATIVE_FIXTURE, LOOP_FIXTURE};
use bsm_lang::lambda::{self, enumerate_terms, parse_expr, AppStrategy, LambdaSemantics, SimpleTypes};
use serde_json::{json, Value};

use crate::args::{
    AppOrder, Command, CorulesArgs, EvalArgs, Flavor, Lang, LangArgs, Mode, SoundnessArgs, StepArgs, TypecheckArgs,
};
use crate::render::{self, Show};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WRONG: i32 = 2;
pub const EXIT_DIVERGES: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;
pub const EXIT_VIOLATIONS: i32 = 5;

/// Exit code of an outcome document kind.
pub fn kind_code(kind: &str) -> i32 {
    match kind {
        "ok" => EXIT_OK,
        "wrong" | "stuck" => EXIT_WRONG,
        "infinity" => EXIT_DIVERGES,
        _ => EXIT_TIMEOUT,
    }
}

/// Several outcomes report the most severe one: wrong before divergence
/// before timeout.
fn combined_code(docs: &[Value]) -> i32 {
    docs.iter()
        .map(|d| kind_code(d["kind"].as_str().unwrap_or("timeout")))
        .filter(|&c| c != EXIT_OK)
        .min()
        .unwrap_or(EXIT_OK)
}

/// Input, parse and well-formedness errors; reported on standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

fn err(e: impl fmt::Display) -> CliError {
    CliError(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub docs: Vec<Value>,
    pub code: i32,
}

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Eval(a) => eval(a),
        Command::Step(a) => step(a),
        Command::Typecheck(a) => typecheck(a),
        Command::Soundness(a) => soundness(a),
        Command::Corules(a) => corules(a),
    }
}

fn read_input(s: &str) -> Result<String, CliError> {
    let p = Path::new(s);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| CliError(format!("{s}: {e}")))
    } else {
        Ok(s.to_string())
    }
}

fn app_strategy(o: AppOrder) -> AppStrategy {
    match o {
        AppOrder::App => AppStrategy::LeftToRight,
        AppOrder::AppR => AppStrategy::RightToLeft,
        AppOrder::AppLate => AppStrategy::Late,
    }
}

fn fj_fixture(lang: Lang, name: Option<&str>) -> Result<String, CliError> {
    let default = if lang == Lang::Fj { "lambda" } else { "imperative" };
    Ok(match name.unwrap_or(default) {
        "lambda" => FJ_LAMBDA_FIXTURE.to_string(),
        "imperative" => format!("{IMPERATIVE_FIXTURE}{LOOP_FIXTURE}"),
        "loop" => LOOP_FIXTURE.to_string(),
        "none" => String::new(),
        other => return Err(CliError(format!("unknown class-table fixture `{other}`"))),
    })
}

fn load_program(l: &LangArgs, input: Option<&str>) -> Result<Program, CliError> {
    let mut src = fj_fixture(l.lang, l.fixture.as_deref())?;
    if let Some(i) = input {
        src.push('\n');
        src.push_str(&read_input(i)?);
    }
    let p = parse_program(&src).map_err(err)?;
    let wf = match l.lang {
        Lang::Fj => minifj::class_table_wf(&p.table),
        _ => imperative::class_table_wf(&p.table),
    };
    if let Err(fails) = wf {
        let msgs: Vec<String> = fails.iter().map(|f| format!("{}: {f}", f.condition())).collect();
        return Err(CliError(format!("ill-formed class table: {}", msgs.join("; "))));
    }
    Ok(p)
}

fn main_expr(p: &Program) -> Result<bsm_lang::fj::FjExpr, CliError> {
    p.main.clone().ok_or_else(|| CliError("the program has no main expression".into()))
}

fn lambda_fixture(l: &LangArgs) -> Result<(bool, bool), CliError> {
    match l.fixture.as_deref().unwrap_or("typed") {
        "typed" => Ok((false, false)),
        "fool" => Ok((true, false)),
        "drop-succ" => Ok((false, true)),
        other => Err(CliError(format!("unknown λ-calculus fixture `{other}`"))),
    }
}

fn lambda_sem(l: &LangArgs, order: AppOrder) -> Result<LambdaSemantics, CliError> {
    let (_, drop_succ) = lambda_fixture(l)?;
    Ok(LambdaSemantics { strategy: app_strategy(order), drop_succ })
}

fn outcome_doc<L: Show>(sem: &L, o: &Outcome<L::Config, L::Res, L::Bindings>) -> Value {
    match o {
        Outcome::Converged { result, steps, .. } => json!({"kind": "ok", "result": sem.show_result(result), "steps": steps}),
        Outcome::Stuck { info, steps, .. } => {
            let mut d = render::stuck(sem, info);
            d["steps"] = json!(steps);
            d
        }
        Outcome::Diverges { certificate, steps, .. } => {
            json!({"kind": "infinity", "certificate": render::certificate(sem, certificate), "steps": steps})
        }
        Outcome::OutOfFuel { steps, .. } => json!({"kind": "timeout", "steps": steps}),
    }
}

/// Outcome documents of `c` under the chosen semantic construction.
pub fn eval_docs<L: Show>(sem: &L, c: &L::Config, mode: Mode, fuel: usize, strategy: Strategy) -> Vec<Value> {
    let ok = |r: &L::Res| json!({"kind": "ok", "result": sem.show_result(r)});
    let inf = |cert| json!({"kind": "infinity", "certificate": render::certificate(sem, cert)});
    let timeout = || json!({"kind": "timeout"});
    match mode {
        Mode::Plain => run(sem, c, fuel, strategy).iter().map(|o| outcome_doc(sem, o)).collect(),
        Mode::Wrong => eval_wrong(sem, c, fuel, strategy)
            .iter()
            .map(|o| match o {
                WrongOutcome::Ok(r) => ok(r),
                WrongOutcome::Wrong => json!({"kind": "wrong", "result": "wrong"}),
                WrongOutcome::Diverges(cert) => inf(cert),
                WrongOutcome::OutOfFuel => timeout(),
            })
            .collect(),
        Mode::Div => eval_div(sem, c, fuel, strategy)
            .iter()
            .map(|o| match o {
                DivOutcome::Ok(r) => ok(r),
                DivOutcome::Infinity(cert) => {
                    let mut d = inf(cert);
                    d["result"] = json!("∞");
                    d
                }
                DivOutcome::NoJudgment(info) => render::stuck(sem, info),
                DivOutcome::OutOfFuel => timeout(),
            })
            .collect(),
        Mode::Trace => eval_trace(sem, c, fuel, strategy)
            .iter()
            .map(|o| match o {
                TraceOutcome::Result(TraceResult::Fin(t, r)) => {
                    let mut d = ok(r);
                    d["trace"] = render::trace(sem, t, &[]);
                    d
                }
                TraceOutcome::Result(TraceResult::Inf(t)) => {
                    json!({"kind": "infinity", "trace": render::trace(sem, t.prefix(), t.period())})
                }
                TraceOutcome::Stuck(info) => render::stuck(sem, info),
                TraceOutcome::OutOfFuel => timeout(),
            })
            .collect(),
        Mode::Total => eval_total(sem, c, fuel, strategy)
            .iter()
            .map(|o| match o {
                TotalOutcome::Ok(r) => ok(r),
                TotalOutcome::Wrong => json!({"kind": "wrong", "result": "wrong"}),
                TotalOutcome::Infinity(cert) => {
                    let mut d = inf(cert);
                    d["result"] = json!("∞");
                    d
                }
                TotalOutcome::OutOfFuel => timeout(),
            })
            .collect(),
    }
}

fn docs_output(docs: Vec<Value>) -> Output {
    let code = combined_code(&docs);
    Output { docs, code }
}

fn eval(a: &EvalArgs) -> Result<Output, CliError> {
    let strategy = if a.exhaustive { Strategy::Exhaustive } else { Strategy::First };
    let docs = match a.lang.lang {
        Lang::Lambda => {
            let e = parse_expr(&read_input(&a.input)?).map_err(err)?;
            eval_docs(&lambda_sem(&a.lang, a.strategy)?, &e, a.mode, a.fuel, strategy)
        }
        Lang::Fj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            let c = MiniConf::closed(main_expr(&p)?);
            eval_docs(&MiniFj::new(p.table), &c, a.mode, a.fuel, strategy)
        }
        Lang::Impfj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            let c = ImpConf::closed(main_expr(&p)?);
            eval_docs(&ImperativeFj::new(p.table), &c, a.mode, a.fuel, strategy)
        }
    };
    Ok(docs_output(docs))
}

/// Tree documents of the first branch, the initial leaf included, and the
/// exit code of its outcome.
pub fn step_docs<L: Show>(sem: &L, c: &L::Config, max_steps: usize) -> Output {
    // The observer also sees the initial leaf; only trees reached by a step are printed.
    let mut docs = Vec::new();
    let mut initial = true;
    let outcomes = run_observed(sem, c, max_steps, Strategy::First, &mut |t| {
        if !std::mem::take(&mut initial) {
            docs.push(render::tree(sem, t));
        }
    });
    let code = outcomes.first().map_or(EXIT_OK, |o| kind_code(outcome_doc(sem, o)["kind"].as_str().unwrap_or("")));
    Output { docs, code }
}

fn step(a: &StepArgs) -> Result<Output, CliError> {
    Ok(match a.lang.lang {
        Lang::Lambda => {
            let e = parse_expr(&read_input(&a.input)?).map_err(err)?;
            step_docs(&lambda_sem(&a.lang, a.strategy)?, &e, a.max_steps)
        }
        Lang::Fj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            let c = MiniConf::closed(main_expr(&p)?);
            step_docs(&MiniFj::new(p.table), &c, a.max_steps)
        }
        Lang::Impfj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            let c = ImpConf::closed(main_expr(&p)?);
            step_docs(&ImperativeFj::new(p.table), &c, a.max_steps)
        }
    })
}

fn typed(doc: Value) -> Output {
    Output { docs: vec![doc], code: EXIT_OK }
}

fn untyped(e: impl fmt::Display) -> Output {
    Output { docs: vec![json!({"error": e.to_string()})], code: EXIT_INPUT }
}

fn typecheck(a: &TypecheckArgs) -> Result<Output, CliError> {
    Ok(match a.lang.lang {
        Lang::Lambda => {
            let e = parse_expr(&read_input(&a.input)?).map_err(err)?;
            match lambda::typecheck(&[], &e) {
                Ok(t) => typed(json!({"type": t.to_string()})),
                Err(e) => untyped(e),
            }
        }
        Lang::Fj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            match minifj::typecheck_config(&p.table, &MiniConf::closed(main_expr(&p)?)) {
                Ok(ts) => typed(json!({"types": ts})),
                Err(e) => untyped(e),
            }
        }
        Lang::Impfj => {
            let p = load_program(&a.lang, Some(&a.input))?;
            match imperative::typecheck_config(&p.table, &ImpConf::closed(main_expr(&p)?)) {
                Ok((sigma, t)) => typed(json!({"type": t, "sigma": sigma})),
                Err(e) => untyped(e),
            }
        }
    })
}

fn audit<L, P>(sem: &L, pred: &P, corpus: &[L::Config], a: &SoundnessArgs) -> Value
where
    L: Show + Sync,
    P: IndexedPredicate<L::Config, L::Res> + Sync,
    L::Config: Send + Sync,
    L::Res: Send + Sync,
    L::Bindings: Send + Sync,
{
    let mut doc = match a.flavor {
        Flavor::Must => render::report(sem, &soundness_must_audit(sem, pred, corpus, a.fuel)),
        Flavor::May => {
            let may = soundness_may_audit(sem, pred, corpus, a.fuel);
            let progress = progress_audit(sem, pred, corpus, a.fuel);
            let implied = check_progress_implies_may(&progress, &may).is_ok();
            let mut d = render::report(sem, &may);
            d["progress_implies_may"] = json!(implied);
            d["passed"] = json!(may.passed() && implied);
            d
        }
    };
    doc["corpus"] = json!(corpus.len());
    doc
}

fn fj_table(l: &LangArgs) -> Result<ClassTable, CliError> {
    Ok(load_program(l, None)?.table)
}

fn soundness(a: &SoundnessArgs) -> Result<Output, CliError> {
    let mut doc = match a.lang.lang {
        Lang::Lambda => {
            let (fool, drop_succ) = lambda_fixture(&a.lang)?;
            let sem = LambdaSemantics { strategy: AppStrategy::LeftToRight, drop_succ };
            audit(&sem, &SimpleTypes { fool }, &enumerate_terms(a.depth, true), a)
        }
        Lang::Fj => {
            let sem = MiniFj::new(fj_table(&a.lang)?);
            let corpus = minifj::typed_corpus(&sem.table, a.depth);
            audit(&sem, &MiniFjTypes { table: sem.table.clone() }, &corpus, a)
        }
        Lang::Impfj => {
            let sem = ImperativeFj::new(fj_table(&a.lang)?);
            let corpus = imperative::typed_corpus(&sem.table, a.depth);
            audit(&sem, &ImperativeTypes { table: sem.table.clone() }, &corpus, a)
        }
    };
    let flavor = match a.flavor {
        Flavor::Must => "must",
        Flavor::May => "may",
    };
    doc["flavor"] = json!(flavor);
    doc["depth"] = json!(a.depth);
    let code = if doc["passed"].as_bool() == Some(true) { EXIT_OK } else { EXIT_VIOLATIONS };
    Ok(Output { docs: vec![doc], code })
}

fn corules(a: &CorulesArgs) -> Result<Output, CliError> {
    let gis = max_elem_system();
    let goals: Vec<MaxElem> = match a.goal.parse::<MaxElem>() {
        Ok(g) => vec![g],
        Err(_) => {
            let list: RationalList = a.goal.parse().map_err(err)?;
            let values: BTreeSet<u64> = list.prefix().iter().chain(list.period()).copied().collect();
            values.into_iter().map(|v| MaxElem::new(list.clone(), v)).collect()
        }
    };
    let u = reachable_universe(&gis.with_corules(), goals.clone(), a.cap).map_err(err)?;
    let ind = interp_inductive(&gis.rules, &u);
    let coind = interp_coinductive(&gis.rules, &u);
    let flex = interp_corules(&gis, &u);
    let docs: Vec<Value> = goals
        .iter()
        .map(|g| {
            json!({
                "goal": g.to_string(),
                "inductive": ind.contains(g),
                "coinductive": coind.contains(g),
                "corules": flex.contains(g),
                "universe": u.len(),
            })
        })
        .collect();
    let code = if goals.len() == 1 && !flex.contains(&goals[0]) { EXIT_WRONG } else { EXIT_OK };
    Ok(Output { docs, code })
}
